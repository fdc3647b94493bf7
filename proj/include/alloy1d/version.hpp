#pragma once

namespace alloy1d {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace alloy1d
