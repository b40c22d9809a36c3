#pragma once

namespace sensflow {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sensflow
