#pragma once

namespace qbring {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qbring
