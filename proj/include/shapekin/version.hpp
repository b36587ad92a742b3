#pragma once

namespace shapekin {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace shapekin
