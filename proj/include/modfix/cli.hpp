#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "modfix/io.hpp"

namespace modfix::cli {

enum ExitCode : int { ok = 0, math_failure = 1, usage_error = 2 };

struct Constants {
  std::optional<double> c, k, l, s, delta, L, M, beta;
};

struct ScheduleConfig {
  std::string rule = "geometric";
  std::size_t length = 16;
  std::vector<double> values;  // overrides rule/length when nonempty
};

/// One run. `modular` and `problem` hold the parsed specs; in a config file
/// they are either inline objects or paths relative to the file.
struct RunConfig {
  io::Json modular;
  io::Json problem;
  std::string solver = "strong";
  std::string mode = "scaled";
  Constants constants;
  std::vector<std::string> certify;  // axioms, strong, strict, nonexpansive, delta2, regular_growth
  ScheduleConfig schedule;
  std::optional<Vector> x0;
  double tol = 1e-10;
  std::size_t max_iter = 1'000'000;
  std::uint64_t seed = 0;
  std::string out = "modfix_out";
  std::size_t pairs = 1000;
  std::size_t samples = 2000;
};

RunConfig config_from_json(const io::Json& j, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// Default output directory: $MODFIX_OUT_DIR, else "modfix_out".
std::string default_out_dir();

int cmd_certify(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);
/// parameter ∈ {k, c, l, beta, schedule_length, grid_size}.
int cmd_sweep(const RunConfig& config, const std::string& parameter, const std::vector<double>& values,
              std::ostream& out, std::ostream& err);
int cmd_report(const std::vector<std::string>& trace_paths, std::ostream& out, std::ostream& err);

/// Entry point behind the modfix executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace modfix::cli
