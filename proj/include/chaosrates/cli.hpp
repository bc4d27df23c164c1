#pragma once

#include <string>

namespace chaosrates {

inline constexpr const char* kEngineVersion = "0.1.0";

// Exit-code contract: 0 success (and all validations pass), 1 validation
// failures, 2 config error, 3 runtime error.
int run_command(const std::string& verb, const std::string& config_path,
                const std::string& out_override, int threads);

} // namespace chaosrates
