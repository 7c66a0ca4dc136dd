#pragma once

namespace qtlab {

inline constexpr const char* kVersion = "0.1.0";

}
