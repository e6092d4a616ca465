#pragma once

namespace blochpert {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace blochpert
