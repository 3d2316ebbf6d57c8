#pragma once

namespace ebench {
inline constexpr const char* kVersion = "0.1.0";
}
