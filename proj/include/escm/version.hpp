#pragma once

namespace escm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace escm
