#include "modfix/nonexpansive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include "modfix/errors.hpp"

namespace modfix {

// ---------------------------------------------------------------------------
// Schedule

Schedule::Schedule(Rule rule, std::vector<double> values) : rule_(rule), values_(std::move(values)) {
  if (values_.empty()) throw PreconditionError("schedule must be nonempty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0 && values_[i] < 1.0)) throw PreconditionError("schedule values must lie in (0,1)");
    if (i > 0 && !(values_[i] > values_[i - 1])) throw PreconditionError("schedule must be strictly increasing");
  }
}

Schedule Schedule::harmonic(std::size_t length) {
  std::vector<double> v;
  for (std::size_t n = 0; n < length; ++n) v.push_back(1.0 - 1.0 / static_cast<double>(n + 2));
  return Schedule(Rule::harmonic, std::move(v));
}

Schedule Schedule::geometric(std::size_t length) {
  if (length > 52) throw PreconditionError("geometric schedule is exact only up to length 52");
  std::vector<double> v;
  for (std::size_t n = 1; n <= length; ++n) v.push_back(1.0 - std::ldexp(1.0, -static_cast<int>(n)));
  return Schedule(Rule::geometric, std::move(v));
}

Schedule Schedule::explicit_values(std::vector<double> values) {
  return Schedule(Rule::explicit_values, std::move(values));
}

Schedule Schedule::from_rule(const std::string& rule, std::size_t length) {
  if (rule == "harmonic") return harmonic(length);
  if (rule == "geometric") return geometric(length);
  throw PreconditionError("unknown schedule rule '" + rule + "' (expected harmonic or geometric)");
}

std::string to_string(Schedule::Rule rule) {
  switch (rule) {
    case Schedule::Rule::harmonic: return "harmonic";
    case Schedule::Rule::geometric: return "geometric";
    case Schedule::Rule::explicit_values: return "explicit";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

NonexpansiveReport certify_nonexpansive(const Mapping& T, const ModularFunctional& rho, std::size_t pair_count,
                                        std::uint64_t seed, Tolerance tol) {
  if (pair_count < 1) throw PreconditionError("pair_count must be >= 1");
  if (rho.dimension() != T.dimension()) throw PreconditionError("mapping and modular have different dimensions");
  std::mt19937_64 rng(seed);
  NonexpansiveReport report;
  report.margin = -std::numeric_limits<double>::infinity();
  report.passed = true;
  for (std::size_t k = 0; k < pair_count; ++k) {
    const Element x = T.domain().sample(rng);
    const Element y = T.domain().sample(rng);
    double image = 0.0, pre = 0.0;
    try {
      image = evaluate(rho, T(x) - T(y));
      pre = evaluate(rho, x - y);
    } catch (const ModularOverflow&) {
      continue;
    }
    ++report.pairs;
    const double margin = image - pre;
    if (margin > report.margin) {
      report.margin = margin;
      report.witness = {x, y};
    }
    if (!tol.le(image, pre)) report.passed = false;
  }
  if (report.pairs == 0) report.margin = 0.0;
  return report;
}

// ---------------------------------------------------------------------------
// Segment equation

SegmentSolution solve_segment(const Mapping& T, const Element& z, double beta, const ModularFunctional& rho,
                              const GrowthProfile& growth, double tol, const SegmentOptions& options) {
  if (!(beta > 0.0 && beta < 1.0)) throw PreconditionError("beta must lie in (0,1)");
  if (!(tol > 0.0)) throw PreconditionError("tol must be positive");
  if (!growth.regular_growth_ok) throw PreconditionError("segment solve needs a modular with regular growth");
  if (!T.domain().member(z)) throw PreconditionError("center z lies outside the mapping's domain");

  const double lambda = 0.5 * (1.0 + 1.0 / beta);
  const double w = growth_function_estimate(rho, lambda * beta, growth.sample_count, growth.seed).estimate;
  if (!(w < 1.0)) throw Rejection("regular growth violated at lambda*beta");

  const Mapping S("segment", T.domain(), [T, z, beta](const Element& x) { return (1.0 - beta) * z + beta * T(x); });
  const auto cert = StrongContractionCertificate::make(lambda, 1.0, w);

  StrongOptions inner;
  inner.tol = tol;
  inner.max_iter = options.max_iter;
  inner.mode = ConvergenceMode::unscaled_large_c;
  inner.record_rows = false;
  inner.error_columns = false;
  Element start = z;
  if (options.warm_start && T.domain().member(*options.warm_start)) start = *options.warm_start;

  const FixedPointResult fp = solve_strong(S, rho, cert, start, inner);
  if (!fp.converged) throw Rejection("segment solve did not converge: " + fp.status, {fp.point});

  SegmentSolution out;
  out.point = fp.point;
  out.residual = evaluate(rho, fp.point - S(fp.point));
  out.iterations = fp.iterations + 1;
  out.lambda = lambda;
  out.k = w;
  if (out.residual > tol) throw Rejection("segment residual above tolerance", {fp.point});
  return out;
}

// ---------------------------------------------------------------------------
// Approximating sequence

std::size_t ApproxFixedPointTrace::iterations() const {
  std::size_t total = 0;
  for (const auto& r : rows) total += r.iterations;
  return total;
}

IterationTrace ApproxFixedPointTrace::as_iteration_trace() const {
  IterationTrace t;
  t.scheme = "approx_schedule";
  t.residual_label = "rho(Tx_n - x_n)";
  t.bound_label = "rho(2(1-k_n)Tx_n) + rho(2(1-k_n)z)";
  for (const auto& r : rows) t.rows.push_back({r.n, r.residual, r.bound});
  return t;
}

ApproxFixedPointTrace approximating_sequence(const Mapping& T, const Element& z, const Schedule& schedule,
                                             const ModularFunctional& rho, const GrowthProfile& growth, double tol) {
  ApproxFixedPointTrace trace;
  std::optional<Element> warm;
  for (std::size_t n = 0; n < schedule.size(); ++n) {
    const double kn = schedule[n];
    SegmentOptions opts;
    opts.warm_start = warm;
    SegmentSolution sol;
    try {
      sol = solve_segment(T, z, kn, rho, growth, tol, opts);
    } catch (const Rejection& e) {
      throw Rejection("segment solve failed at index " + std::to_string(n) + ": " + e.what(), e.witness(),
                      std::make_shared<const IterationTrace>(trace.as_iteration_trace()));
    }
    ApproxRow row;
    row.n = n;
    row.k_n = kn;
    row.x = sol.point;
    row.Tx = T(sol.point);
    row.residual = evaluate(rho, row.Tx - row.x);
    row.tau_term = evaluate(rho, (2.0 * (1.0 - kn)) * row.Tx);
    row.bound = row.tau_term + evaluate(rho, (2.0 * (1.0 - kn)) * z);
    row.iterations = sol.iterations + 1;
    warm = sol.point;
    trace.rows.push_back(std::move(row));
    if (trace.rows.back().residual <= tol) {
      trace.reached_tol = true;
      break;
    }
  }
  // τ_ρ-boundedness along the orbit: ρ(2(1−k_n)Tx_n) has to be heading to 0.
  const auto& rows = trace.rows;
  const double last = rows.back().tau_term;
  if (rows.size() < 2 || last <= tol) {
    trace.tau_bounded_observed = true;
  } else {
    trace.tau_bounded_observed = last < rows[rows.size() / 2 - (rows.size() % 2 == 0 ? 1 : 0)].tau_term;
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Schauder-type extraction

FixedPointResult schauder_fixed_point(const Mapping& T, const DomainDescriptor& domain, const Schedule& schedule,
                                      const ModularFunctional& rho, const GrowthProfile& growth, double tol,
                                      const SchauderOptions& options) {
  if (!domain.star_center) throw PreconditionError("schauder_fixed_point needs a star-shaped domain with a center");
  if (!domain.closed) throw PreconditionError("schauder_fixed_point needs a closed domain");
  if (!(tol > 0.0)) throw PreconditionError("tol must be positive");
  const Element& z = *domain.star_center;

  const ApproxFixedPointTrace approx =
      approximating_sequence(T, z, schedule, rho, growth, tol * options.inner_tol_fraction);
  const auto& rows = approx.rows;

  FixedPointResult result;
  result.trace = approx.as_iteration_trace();
  result.trace.scheme = "schauder";
  result.iterations = approx.iterations();
  result.notes.push_back(
      "compactness of the closure of T(B) replaced by a boundedness check on {Tx_n}; closed bounded sets are compact in "
      "finite dimension");

  std::vector<double> magnitude;
  for (const auto& r : rows) magnitude.push_back(rho.evaluate_unchecked(r.Tx - z));
  bool unbounded = std::any_of(magnitude.begin(), magnitude.end(),
                               [&](double m) { return !std::isfinite(m) || m > options.magnitude_cap; });
  if (!unbounded && rows.size() >= 4) {
    const std::size_t half = rows.size() / 2;
    bool increasing = true;
    for (std::size_t i = half + 1; i < rows.size(); ++i) increasing = increasing && magnitude[i] > magnitude[i - 1];
    unbounded = increasing && magnitude.back() >= 2.0 * magnitude[half] && magnitude[half] > 0.0;
  }
  if (unbounded || !approx.tau_bounded_observed)
    throw Rejection("compactness surrogate violated: the iterates Tx_n grow without bound", {rows.back().Tx},
                    std::make_shared<const IterationTrace>(result.trace));

  // Medoid of the tail under ρ-distance at scale 1.
  const std::size_t tail = std::min(options.cluster_tail, rows.size());
  const std::size_t first = rows.size() - tail;
  std::size_t medoid = first;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = first; j < rows.size(); ++j) {
    double total = 0.0;
    for (std::size_t i = first; i < rows.size(); ++i) total += evaluate(rho, rows[i].Tx - rows[j].Tx);
    if (total < best) {
      best = total;
      medoid = j;
    }
  }
  const Element y = rows[medoid].Tx;

  double certificate = std::numeric_limits<double>::infinity();
  for (std::size_t i = first; i < rows.size(); ++i)
    certificate = std::min(certificate, 2.0 * evaluate(rho, rows[i].Tx - y) + rows[i].residual);
  const double observed = evaluate(rho, (1.0 / 3.0) * (T(y) - y));

  result.point = y;
  result.residual = observed;
  result.trace.meta = {{"cluster_tail", static_cast<double>(tail)},
                       {"cluster_index", static_cast<double>(rows[medoid].n)},
                       {"certificate_bound", certificate},
                       {"tol", tol}};
  const Tolerance cmp;
  if (!cmp.le(observed, certificate)) {
    result.converged = false;
    result.status = "certification inequality violated: T does not behave as a nonexpansive map";
  } else if (certificate <= tol) {
    result.converged = true;
    result.status = "converged";
  } else {
    result.converged = false;
    result.status = "no cluster point certified within the schedule";
  }
  return result;
}

// ---------------------------------------------------------------------------
// λ-schedule for strict contractions

double HomotopyResult::pair_bound(std::size_t n, std::size_t m) const {
  const double k = result.trace.meta.at("k");
  const double ln = rows[n].lambda, lm = rows[m].lambda;
  return (lm - ln) / (lm * (1.0 - k)) * sup_rho;
}

std::size_t HomotopyResult::pair_violations(const ModularFunctional& rho, Tolerance tol) const {
  std::size_t bad = 0;
  for (std::size_t n = 0; n < rows.size(); ++n)
    for (std::size_t m = n + 1; m < rows.size(); ++m)
      if (!tol.le(evaluate(rho, rows[m].x - rows[n].x), pair_bound(n, m))) ++bad;
  return bad;
}

HomotopyResult solve_by_homotopy(const Mapping& T, const ModularFunctional& rho, double k, const Schedule& schedule,
                                 double tol, const HomotopyOptions& options) {
  if (!rho.is_convex()) throw PreconditionError("the lambda schedule needs a convex modular");
  if (!(k > 0.0 && k < 1.0)) throw PreconditionError("k must lie in (0,1)");
  if (!(tol > 0.0)) throw PreconditionError("tol must be positive");
  const std::size_t n = T.dimension();
  const Element origin = Element::zero(n);
  if (!T.domain().member(origin)) throw PreconditionError("the domain must contain 0");
  if (!T.domain().convex) throw PreconditionError("the domain must be convex");

  HomotopyResult out;
  FixedPointResult& result = out.result;
  IterationTrace& trace = result.trace;
  trace.scheme = "homotopy";
  trace.residual_label = "rho(x_n - x_{n-1})";
  trace.bound_label = "(lambda_n - lambda_{n-1})/(lambda_n (1-k)) sup rho(x_j)";
  trace.meta = {{"k", k}, {"tol", tol}};

  Element prev = origin;
  double tail_bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const double lambda = schedule[i];
    const Mapping U("lambda*T", T.domain(), [T, lambda](const Element& x) { return lambda * T(x); });
    const auto cert = StrongContractionCertificate::make(1.0 / lambda, 1.0, k);
    StrongOptions inner;
    inner.tol = tol * options.inner_tol_fraction;
    inner.max_iter = options.max_iter;
    inner.record_rows = false;
    inner.error_columns = false;
    const FixedPointResult fp = solve_strong(U, rho, cert, prev, inner);
    if (!fp.converged)
      throw Rejection("inner solve failed at lambda index " + std::to_string(i) + ": " + fp.status, {fp.point},
                      std::make_shared<const IterationTrace>(trace));
    HomotopyRow row{i, lambda, fp.point, evaluate(rho, fp.point), fp.iterations};
    out.sup_rho = std::max(out.sup_rho, row.rho_x);
    result.iterations += fp.iterations;
    prev = fp.point;
    out.rows.push_back(std::move(row));
    if (out.sup_rho > options.sup_cap)
      throw Rejection("hypothesis sup_{x in A} rho(x) < infinity not observed: running sup exceeds the cap",
                      {prev}, std::make_shared<const IterationTrace>(trace));
    tail_bound = (1.0 - lambda) * out.sup_rho / (1.0 - k);
    if (tail_bound <= tol) break;
  }

  for (std::size_t i = 1; i < out.rows.size(); ++i)
    trace.rows.push_back({i, evaluate(rho, out.rows[i].x - out.rows[i - 1].x), out.pair_bound(i - 1, i)});
  trace.meta["sup_rho"] = out.sup_rho;
  trace.meta["tail_bound"] = tail_bound;

  result.point = prev;
  result.residual = evaluate(rho, (1.0 / 3.0) * (T(prev) - prev));
  result.converged = tail_bound <= tol && result.residual <= tol;
  result.status = result.converged ? "converged"
                                   : (tail_bound > tol ? "schedule exhausted before the tail bound fell below tol"
                                                       : "residual check failed");
  result.notes.push_back("inner problems x = lambda T x solved as strong contractions with c = 1/lambda, l = 1");
  return out;
}

}  // namespace modfix
