#pragma once

namespace graphmf {
inline constexpr const char* kVersion = "0.1.0";
}
