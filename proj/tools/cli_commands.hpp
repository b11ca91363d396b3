#pragma once

#include <string>
#include <vector>

namespace thermoscreen::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kProfilesEnv = "THERMOSCREEN_PROFILES";
inline constexpr const char* kRunManifestName = "run_manifest.json";

// Parses and runs one command line (without the program name).
// Returns the process exit status: 0 ok, 1 validation/usage, 2 I/O.
int run(const std::vector<std::string>& args);

} // namespace thermoscreen::cli
