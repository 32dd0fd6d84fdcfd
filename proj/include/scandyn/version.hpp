#pragma once

namespace scandyn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace scandyn
