#ifndef HSDP_CLI_H_
#define HSDP_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace hsdp {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

// Number formatted with 17 significant digits, locale independent.
std::string FormatSig17(double value);

// "lo:hi:count" with count >= 1 uniform points including both endpoints.
std::vector<double> ParseGridSpec(const std::string& spec);

// Runs the command line given the argument vector (without the program
// name). All diagnostics go to `err`, values and reports to `out`.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace hsdp

#endif  // HSDP_CLI_H_
