#pragma once

namespace notchset {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace notchset
