#pragma once

namespace fourmoment {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fourmoment
