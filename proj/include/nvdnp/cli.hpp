#pragma once

// Command-line driver: simulate, angle-sweep, validate, print-defaults.
// Exit codes: 0 success, 1 runtime error, 2 invalid configuration or
// arguments, 3 oracle failure.

#include "nvdnp/config.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace nvdnp {

namespace exit_code {
inline constexpr int success = 0;
inline constexpr int runtime_error = 1;
inline constexpr int invalid_config = 2;
inline constexpr int oracle_failure = 3;
}  // namespace exit_code

struct OracleResult {
  std::string name;
  double measured = 0.0;
  double limit = 0.0;
  bool passed = false;
  std::string detail;
};

/// Built-in consistency checks run by `validate`: LZ grid, P bar maximum,
/// propagator unitarity over an ISE sweep, NOVEL flip-flop, nearest-neighbour
/// dipolar coupling.
std::vector<OracleResult> run_oracles(const RunConfig& config);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nvdnp
