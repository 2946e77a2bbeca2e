#pragma once

namespace strew {

inline constexpr const char* kEngineVersion = "strew/0.1.0";

}  // namespace strew
