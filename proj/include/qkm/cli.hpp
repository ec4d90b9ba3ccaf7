#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qkm/spectral.hpp"

namespace qkm {

enum ExitCode : int { kExitOk = 0, kExitConvergence = 2, kExitInvalidInput = 3, kExitVerification = 4 };

struct RunConfig {
  ModelInput model;
  SolveOptions solver;
  int series_order = 5;
  std::string format = "json";
  std::string out_path;
  double verify_threshold = 1e-8;
  int verify_samples = 20;
  std::uint64_t verify_seed = 1;
  /// Replaces the solved eps before verification (sensitivity probes).
  std::optional<std::vector<double>> eps_override;
};

/// Parses `key = value` lines with dotted keys; `#` starts a comment.
/// Lists are written [a, b, ...]. Throws Error(InvalidInput) naming the line.
RunConfig parse_config(std::string_view text);

/// Exit code for a library error.
int exit_code(ErrorKind kind);

/// Shortest round-trip decimal form of x.
std::string format_double(double x);

/// Entry point of the qkm tool; args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qkm
