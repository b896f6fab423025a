#ifndef MODKALM_TOOLS_CLI_HPP_
#define MODKALM_TOOLS_CLI_HPP_

namespace modkalm::cli {

// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `modkalm` tool (subcommands enhance, bench, diagnose).
int Run(int argc, const char* const* argv);

}  // namespace modkalm::cli

#endif  // MODKALM_TOOLS_CLI_HPP_
