#pragma once

namespace ghzforge {

inline constexpr const char* kVersion = "0.1.0";

} // namespace ghzforge
