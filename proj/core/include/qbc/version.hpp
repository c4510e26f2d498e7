#pragma once

namespace qbc {

inline constexpr int kVersionMajor = 1;
inline constexpr int kVersionMinor = 0;
inline constexpr int kVersionPatch = 0;
inline constexpr const char* kVersionString = "1.0.0";

/// Version of the JSON layout used by transcripts and run reports.
inline constexpr int kSchemaVersion = 1;

}  // namespace qbc
