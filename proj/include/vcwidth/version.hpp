#pragma once

namespace vcwidth {
inline constexpr const char* version = "0.1.0";
}
