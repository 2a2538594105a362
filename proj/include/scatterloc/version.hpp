#pragma once

namespace scatterloc {
inline constexpr const char* kVersion = "0.1.0";
}
