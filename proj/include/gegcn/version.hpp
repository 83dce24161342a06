#pragma once

namespace gegcn {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace gegcn
