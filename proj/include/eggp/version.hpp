#pragma once

namespace eggp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace eggp
