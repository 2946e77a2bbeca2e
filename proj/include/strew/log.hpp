#pragma once

#include <atomic>
#include <cstdio>
#include <string>

namespace strew {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline std::atomic<int>& log_level_ref() {
  static std::atomic<int> level{static_cast<int>(LogLevel::Warn)};
  return level;
}

inline void set_log_level(LogLevel level) { log_level_ref() = static_cast<int>(level); }

inline bool set_log_level(const std::string& name) {
  if (name == "error") set_log_level(LogLevel::Error);
  else if (name == "warn") set_log_level(LogLevel::Warn);
  else if (name == "info") set_log_level(LogLevel::Info);
  else if (name == "debug") set_log_level(LogLevel::Debug);
  else return false;
  return true;
}

inline void log_at(LogLevel level, const char* tag, const std::string& msg) {
  if (static_cast<int>(level) > log_level_ref().load()) return;
  std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}

inline void log_error(const std::string& msg) { log_at(LogLevel::Error, "error", msg); }
inline void log_warn(const std::string& msg) { log_at(LogLevel::Warn, "warn", msg); }
inline void log_info(const std::string& msg) { log_at(LogLevel::Info, "info", msg); }
inline void log_debug(const std::string& msg) { log_at(LogLevel::Debug, "debug", msg); }

}  // namespace strew
