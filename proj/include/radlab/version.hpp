#pragma once

namespace radlab {

inline constexpr const char* kArtifactName = "radius-lab";
inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace radlab
