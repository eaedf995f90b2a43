#pragma once

namespace kdvlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kdvlab
