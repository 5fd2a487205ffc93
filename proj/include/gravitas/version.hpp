#pragma once

namespace gravitas {

inline constexpr const char* kEngineVersion = "0.1.0";
inline constexpr const char* kGraphFormat = "gravitas-graph";
inline constexpr const char* kRngName = "mt19937_64/v1";

}  // namespace gravitas
