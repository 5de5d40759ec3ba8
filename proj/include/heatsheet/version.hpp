#pragma once

namespace heatsheet {

inline constexpr const char* kArtifactName = "heatsheet";
inline constexpr const char* kArtifactVersion = "1.0.0";
inline constexpr const char* kOutputSchemaVersion = "1";

} // namespace heatsheet
