// tools/commands.h

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef SDRTSE_TOOLS_COMMANDS_H_
#define SDRTSE_TOOLS_COMMANDS_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace sdrtse {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

// Relative output paths are resolved against this directory when set.
inline constexpr const char *kOutputRootEnv = "SDRTSE_OUTPUT_ROOT";

// Runs `sdrtse <args...>`; args excludes the program name.
int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace sdrtse

#endif  // SDRTSE_TOOLS_COMMANDS_H_
