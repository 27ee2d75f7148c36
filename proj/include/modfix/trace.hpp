#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace modfix {

struct TraceRow {
  std::size_t index = 0;
  double residual = 0.0;
  double bound = 0.0;
  // Distance to a reference fixed point and its a-priori bound; NaN when the
  // scheme does not record them.
  double error = std::nan("");
  double error_bound = std::nan("");
};

/// Per-step residuals of a solve paired with the theoretical bound at each
/// step. `meta` carries the scheme's constants (k, c, l, L, ...) as text so
/// that report tooling can read them back from the tabular form.
struct IterationTrace {
  std::string scheme;
  std::string residual_label;
  std::string bound_label;
  double initial_r = 0.0;
  std::map<std::string, double> meta;
  std::vector<TraceRow> rows;

  bool has_error_columns() const;
  /// Rows whose residual (or error) exceeds the recorded bound under the
  /// relative slack 1e-9 and absolute slack 1e-12.
  std::vector<std::size_t> violations() const;
  bool within_bounds() const { return violations().empty(); }
};

}  // namespace modfix
