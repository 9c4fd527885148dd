#pragma once

namespace bellhv {

inline constexpr const char* kArtifactName = "bell-hv-lab";
inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace bellhv
