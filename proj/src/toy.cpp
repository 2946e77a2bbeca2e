#include "strew/toy.hpp"

#include <algorithm>
#include <cmath>

#include "strew/parse.hpp"
#include "strew/rewards.hpp"

namespace strew {

const char* to_string(DomainTag tag) {
  return tag == DomainTag::InDomain ? "in_domain" : "shifted_domain";
}

namespace {

double round_ms(double seconds) { return std::llround(seconds * 1000.0) / 1000.0; }

struct Archetype {
  double start_frac;
  double length_frac;
};

Archetype archetype_params(int index, int n_archetypes, DomainTag tag,
                           const ToyEnvConfig& cfg) {
  double spread = n_archetypes > 1 ? static_cast<double>(index) / (n_archetypes - 1) : 0.0;
  Archetype a;
  a.start_frac = 0.05 + 0.80 * spread;
  a.length_frac = 0.12 + 0.06 * ((index * 3) % 4);
  if (tag == DomainTag::ShiftedDomain) {
    a.start_frac += cfg.shift_offset_start;
    a.length_frac += cfg.shift_offset_length;
  }
  a.length_frac = std::clamp(a.length_frac, 0.05, 0.9);
  a.start_frac = std::clamp(a.start_frac, 0.0, 0.98 - a.length_frac);
  return a;
}

void check_env(const ToyEnvConfig& cfg, TaskKind kind) {
  if (kind != TaskKind::TemporalGrounding && kind != TaskKind::MultiChoiceQA)
    throw Error(std::string("toy env supports temporal_grounding and multi_choice_qa, got ") +
                to_string(kind));
  int signal_dims = kind == TaskKind::MultiChoiceQA ? cfg.n_options : cfg.n_archetypes;
  if (signal_dims > cfg.feature_dim)
    throw Error("toy env: feature_dim too small for the archetype encoding");
  if (cfg.start_bins < 1 || cfg.length_bins < 1 || cfg.n_options < 2)
    throw Error("toy env: invalid grid sizes");
}

std::string render_action(int action, const SyntheticTask& task, const ToyEnvConfig& cfg) {
  if (task.instance.kind == TaskKind::MultiChoiceQA)
    return render_choice(ChoiceLetter{static_cast<char>('A' + action)});
  return render_interval(decode_action(action, task.instance.video.duration, cfg));
}

}  // namespace

TemporalInterval decode_action(int action, double duration, const ToyEnvConfig& cfg) {
  int start_bin = action / cfg.length_bins;
  int length_bin = action % cfg.length_bins;
  double start = static_cast<double>(start_bin) / cfg.start_bins * duration;
  double length = static_cast<double>(length_bin + 1) / cfg.length_bins * duration;
  return TemporalInterval{round_ms(start), round_ms(std::min(duration, start + length))};
}

int encode_action(const TemporalInterval& gt, double duration, const ToyEnvConfig& cfg) {
  int best = 0;
  double best_iou = -1.0;
  const int n = cfg.start_bins * cfg.length_bins;
  for (int a = 0; a < n; ++a) {
    double v = interval_iou(decode_action(a, duration, cfg), gt);
    if (v > best_iou) {
      best_iou = v;
      best = a;
    }
  }
  return best;
}

std::vector<SyntheticTask> gen_tasks(uint64_t seed, int n, TaskKind kind, DomainTag tag,
                                     const ToyEnvConfig& cfg) {
  if (n < 1) throw EmptyInput("gen_tasks: n must be >= 1");
  check_env(cfg, kind);

  Rng rng = Rng::derive(seed, std::string("toy/") + to_string(kind) + "/" + to_string(tag));
  const bool shifted = tag == DomainTag::ShiftedDomain;
  const double dur_lo = shifted ? cfg.dur_shift_lo : cfg.dur_in_lo;
  const double dur_hi = shifted ? cfg.dur_shift_hi : cfg.dur_in_hi;
  const double signal_scale = shifted ? cfg.signal_scale_shift : cfg.signal_scale_in;
  const double distractor = shifted ? cfg.distractor_noise_shift : cfg.distractor_noise;
  const int signal_dims = kind == TaskKind::MultiChoiceQA ? cfg.n_options : cfg.n_archetypes;

  std::vector<SyntheticTask> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    SyntheticTask task;
    task.domain = tag;
    task.archetype = rng.uniform_int(0, signal_dims - 1);

    TaskInstance& inst = task.instance;
    inst.kind = kind;
    char idbuf[64];
    std::snprintf(idbuf, sizeof(idbuf), "%s-%s-%05d", shifted ? "shift" : "in",
                  kind == TaskKind::MultiChoiceQA ? "qa" : "tg", i);
    inst.id = idbuf;
    inst.video.uri = "synth://toy/" + inst.id;
    inst.video.duration = round_ms(rng.uniform(dur_lo, dur_hi));
    inst.video.base_fps = 1.0;
    inst.video.width = 320;
    inst.video.height = 240;

    if (kind == TaskKind::TemporalGrounding) {
      Archetype a = archetype_params(task.archetype, cfg.n_archetypes, tag, cfg);
      double s_frac = a.start_frac + rng.uniform(-cfg.jitter, cfg.jitter);
      double l_frac = a.length_frac + rng.uniform(-cfg.jitter, cfg.jitter);
      l_frac = std::clamp(l_frac, 0.05, 0.95);
      s_frac = std::clamp(s_frac, 0.0, 1.0 - l_frac);
      TemporalInterval gt{round_ms(s_frac * inst.video.duration),
                          round_ms((s_frac + l_frac) * inst.video.duration)};
      gt.end = std::min(gt.end, inst.video.duration);
      inst.gt.value = gt;
      inst.question = "When does event pattern " + std::to_string(task.archetype) +
                      " occur in clip " + std::to_string(i) + "?";
      task.gt_action = encode_action(gt, inst.video.duration, cfg);
    } else {
      std::vector<std::string> options;
      for (int o = 0; o < cfg.n_options; ++o)
        options.push_back("pattern " + std::to_string(o));
      inst.options = std::move(options);
      inst.gt.value = ChoiceLetter{static_cast<char>('A' + task.archetype)};
      inst.question = "Which pattern appears in clip " + std::to_string(i) + "?";
      task.gt_action = task.archetype;
    }

    task.features.resize(cfg.feature_dim);
    for (int j = 0; j < cfg.feature_dim; ++j) {
      if (j < signal_dims)
        task.features[j] =
            (j == task.archetype ? signal_scale : 0.0) + rng.normal(0.0, cfg.signal_noise);
      else
        task.features[j] = rng.normal(0.0, distractor);
    }
    out.push_back(std::move(task));
  }
  return out;
}

std::vector<RolloutSample> policy_rollout(const ToyPolicy& policy, const SyntheticTask& task,
                                          int group_count, uint64_t seed,
                                          const ToyEnvConfig& cfg, bool with_think) {
  if (group_count < 1) throw EmptyInput("policy_rollout: group count must be >= 1");
  Rng rng(seed);
  std::vector<RolloutSample> out;
  out.reserve(group_count);

  if (policy.greedy_only()) {
    int action = policy.argmax(task.features);
    for (int g = 0; g < group_count; ++g)
      out.push_back({wrap_answer(render_action(action, task, cfg), with_think), 0.0, action});
    return out;
  }

  std::vector<double> lp = policy.log_probs(task.features);
  std::vector<double> probs(lp.size());
  for (size_t a = 0; a < lp.size(); ++a) probs[a] = std::exp(lp[a]);
  for (int g = 0; g < group_count; ++g) {
    double u = rng.uniform();
    double cum = 0.0;
    int action = policy.n_actions - 1;
    for (int a = 0; a < policy.n_actions; ++a) {
      cum += probs[a];
      if (u < cum) {
        action = a;
        break;
      }
    }
    out.push_back({wrap_answer(render_action(action, task, cfg), with_think), lp[action], action});
  }
  return out;
}

MetricReport eval_policy(const ToyPolicy& policy, const std::vector<SyntheticTask>& tasks,
                         const ToyEnvConfig& cfg, DecodeMode mode, uint64_t sample_seed) {
  if (tasks.empty()) throw EmptyInput("eval_policy: no tasks");
  const TaskKind kind = tasks[0].instance.kind;
  FormatSpec spec{false, grammar_for(kind)};
  Rng rng(sample_seed);

  std::vector<AnswerPayload> payloads;
  std::vector<GroundTruth> gts;
  payloads.reserve(tasks.size());
  for (const auto& task : tasks) {
    int action = mode == DecodeMode::Greedy ? policy.argmax(task.features)
                                            : policy.sample(task.features, rng);
    std::string text = wrap_answer(render_action(action, task, cfg), false);
    ParseContext ctx{task.instance.n_options(), 0};
    payloads.push_back(parse_response(text, spec, ctx).payload);
    gts.push_back(task.instance.gt);
  }
  return compute_metrics(kind, payloads, gts, nullptr);
}

double primary_score(const MetricReport& report) {
  if (report.miou) return *report.miou;
  if (report.accuracy) return *report.accuracy;
  if (report.avg_overlap) return *report.avg_overlap;
  return 0.0;
}

namespace {

struct SftBatchEntry {
  const std::vector<double>* features;
  int gt_action;
};

// cross-entropy ascent toward the gt actions; returns mean log-likelihood
double sft_step(ToyPolicy& policy, const std::vector<SftBatchEntry>& batch, double lr) {
  const int n_actions = policy.n_actions;
  const int d = policy.feature_dim;
  const double tau = policy.greedy_only() ? 1.0 : policy.temperature;
  std::vector<double> grad(static_cast<size_t>(n_actions) * d, 0.0);
  double objective = 0.0;
  const double weight = 1.0 / static_cast<double>(batch.size());

  for (const auto& entry : batch) {
    std::vector<double> lp = policy.log_probs(*entry.features);
    objective += lp[entry.gt_action] * weight;
    const double* x = entry.features->data();
    for (int a = 0; a < n_actions; ++a) {
      double scale = ((a == entry.gt_action ? 1.0 : 0.0) - std::exp(lp[a])) * weight / tau;
      double* row = grad.data() + static_cast<size_t>(a) * d;
      for (int j = 0; j < d; ++j) row[j] += scale * x[j];
    }
  }
  for (double g : grad)
    if (!std::isfinite(g)) throw NonFiniteGradient("sft_step: non-finite gradient component");
  for (size_t i = 0; i < grad.size(); ++i) policy.weights[i] += lr * grad[i];
  return objective;
}

TrainReport run_training(const ToyTrainConfig& cfg, bool sft) {
  check_env(cfg.env, cfg.kind);
  if (cfg.steps < 0 || cfg.batch_groups < 1 || cfg.n_train < 1 || cfg.n_eval < 1)
    throw Error("toy trainer: invalid steps/batch/task counts");
  if (cfg.grpo.group_size < 2)
    throw Error("toy trainer: group_size must be >= 2 for training");

  const uint64_t seed = cfg.grpo.seed;
  auto train_tasks = gen_tasks(Rng::mix(seed, "train"), cfg.n_train, cfg.kind,
                               DomainTag::InDomain, cfg.env);
  auto eval_in = gen_tasks(Rng::mix(seed, "eval_in"), cfg.n_eval, cfg.kind,
                           DomainTag::InDomain, cfg.env);
  auto eval_shift = gen_tasks(Rng::mix(seed, "eval_shift"), cfg.n_eval, cfg.kind,
                              DomainTag::ShiftedDomain, cfg.env);

  ToyPolicy policy = ToyPolicy::zeros(cfg.env.n_actions(cfg.kind), cfg.env.feature_dim,
                                      cfg.env.temperature);
  const ToyPolicy ref = policy;

  TrainReport report;
  report.algo = sft ? "sft" : "grpo";
  report.config = cfg;
  report.seed = seed;

  auto snapshot = [&](int step) {
    report.eval_series.push_back(
        {step, primary_score(eval_policy(policy, eval_in, cfg.env)),
         primary_score(eval_policy(policy, eval_shift, cfg.env))});
  };
  snapshot(0);

  Rng order_rng = Rng::derive(seed, "order");
  std::vector<int> order(train_tasks.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  order_rng.shuffle(order);
  size_t cursor = 0;

  for (int step = 0; step < cfg.steps; ++step) {
    std::vector<TrainGroup> groups;
    std::vector<SftBatchEntry> sft_batch;
    groups.reserve(cfg.batch_groups);

    for (int b = 0; b < cfg.batch_groups; ++b) {
      const SyntheticTask& task = train_tasks[order[cursor]];
      if (++cursor == order.size()) {
        order_rng.shuffle(order);
        cursor = 0;
      }
      uint64_t rollout_seed =
          Rng::mix(Rng::mix(seed, "rollout"), static_cast<uint64_t>(step) * 8192 + b);
      auto samples = policy_rollout(policy, task, cfg.grpo.group_size, rollout_seed,
                                    cfg.env, cfg.requires_think);
      std::vector<std::string> texts;
      for (const auto& s : samples) texts.push_back(s.answer_text);
      // no private reward path: candidates go through the reward engine
      auto breakdowns = score_group(task.instance, texts, nullptr, cfg.requires_think);

      TrainGroup group;
      group.query_id = task.instance.id;
      group.features = task.features;
      for (size_t i = 0; i < samples.size(); ++i) {
        group.actions.push_back(samples[i].action);
        group.rewards.push_back(breakdowns[i].total);
        group.logp_old.push_back(samples[i].logp);
        group.logp_ref.push_back(ref.logp(task.features, samples[i].action));
      }
      groups.push_back(std::move(group));
      if (sft) sft_batch.push_back({&task.features, task.gt_action});
    }

    StepRecord record;
    record.step = step;
    if (sft) {
      double reward_sum = 0.0, kl_sum = 0.0;
      size_t count = 0;
      for (const auto& g : groups)
        for (size_t i = 0; i < g.rewards.size(); ++i) {
          reward_sum += g.rewards[i];
          kl_sum += kl_penalty(g.logp_old[i], g.logp_ref[i]);
          ++count;
        }
      record.mean_reward = reward_sum / static_cast<double>(count);
      record.mean_kl = kl_sum / static_cast<double>(count);
      record.objective = sft_step(policy, sft_batch, cfg.sft_learning_rate);
    } else {
      StepStats stats = grpo_step(policy, groups, cfg.grpo);
      record.mean_reward = stats.mean_reward;
      record.mean_kl = stats.mean_kl;
      record.objective = stats.objective;
    }
    report.series.push_back(record);

    if (cfg.eval_every > 0 && (step + 1) % cfg.eval_every == 0) snapshot(step + 1);
  }

  if (report.eval_series.back().step != cfg.steps) snapshot(cfg.steps);
  report.final_in = eval_policy(policy, eval_in, cfg.env);
  report.final_shifted = eval_policy(policy, eval_shift, cfg.env);
  return report;
}

}  // namespace

TrainReport train_grpo(const ToyTrainConfig& cfg) { return run_training(cfg, false); }

TrainReport train_sft(const ToyTrainConfig& cfg) { return run_training(cfg, true); }

}  // namespace strew
