#pragma once

namespace frogsdm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace frogsdm
