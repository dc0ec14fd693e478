#pragma once

namespace gpbound {

inline constexpr const char* kToolName = "gpbound";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace gpbound
