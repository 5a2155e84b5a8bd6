#pragma once

// Command-line driver: run, sweep, verify-bounds, chain-demo.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace flyq::cli {

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kConfigError = 2,
  kBoundViolation = 3,
  kCausalityViolation = 4,
};

struct BoundCheck {
  int d = 0;
  int m = 0;
  double bound = 0.0;
  double achieved = 0.0;
  double gap = 0.0;
  double envelope = 0.0;
  /// m = 2 only: peak of the constraint-curve sweep and |a - b| there.
  std::optional<double> lagrange_peak;
  std::optional<double> lagrange_asymmetry;
  bool pass = false;
};

/// Constructive versus closed-form bounds for 2 <= d <= d_max, 2 <= m <= m_max.
/// Throws ConfigError on caps outside [2, 32] x [2, 8].
std::vector<BoundCheck> verify_bounds(int d_max, int m_max);

/// Parses `args` (without the program name) and runs one subcommand.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flyq::cli
