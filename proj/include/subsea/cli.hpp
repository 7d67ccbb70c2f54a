#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace subsea {

inline constexpr const char* kToolVersion = "0.1.0";
// Default for --out when the flag is absent.
inline constexpr const char* kOutEnvVar = "SUBSEA_OUT";

// Exit codes: 0 success, 1 input or configuration error, 2 internal
// invariant violation. `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace subsea
