#pragma once

namespace tfcr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tfcr
