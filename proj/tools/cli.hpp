#pragma once

#include <ostream>

namespace hfc::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kSimulationAborted = 3,
  kTunerFailure = 4,
};

/// Entry point of the hfcsim tool; argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hfc::cli
