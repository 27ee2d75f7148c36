#include "modfix/trace.hpp"

#include <algorithm>

#include "modfix/modular.hpp"

namespace modfix {

bool IterationTrace::has_error_columns() const {
  return std::any_of(rows.begin(), rows.end(), [](const TraceRow& r) { return !std::isnan(r.error); });
}

std::vector<std::size_t> IterationTrace::violations() const {
  const Tolerance tol;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const TraceRow& row = rows[i];
    bool ok = tol.le(row.residual, row.bound);
    if (!std::isnan(row.error) && !std::isnan(row.error_bound)) ok = ok && tol.le(row.error, row.error_bound);
    if (!ok) out.push_back(i);
  }
  return out;
}

}  // namespace modfix
