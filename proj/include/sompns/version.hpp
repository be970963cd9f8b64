#pragma once

namespace sompns {

inline constexpr const char* kVersion = "0.1.0";

// Bumped whenever any CSV schema changes.
inline constexpr const char* kFormatVersion = "1";

}  // namespace sompns
