#ifndef HCF_TOOLS_COMMANDS_HPP
#define HCF_TOOLS_COMMANDS_HPP

#include <iosfwd>

namespace hcf::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 2,
  kExitNumerical = 3,
  kExitUnconverged = 4,
};

/// Entry point of the `hcf` binary; usable in-process by tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hcf::cli

#endif  // HCF_TOOLS_COMMANDS_HPP
