#pragma once

namespace attoscat {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace attoscat
