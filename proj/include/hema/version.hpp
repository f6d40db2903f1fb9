#pragma once

#include <string>

namespace hema {

inline constexpr const char* kToolName = "hemapipe";
inline constexpr const char* kToolVersion = "0.1.0";

inline std::string tool_id() {
    return std::string(kToolName) + " " + kToolVersion;
}

}  // namespace hema
