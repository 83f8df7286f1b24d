#pragma once

namespace sta {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sta
