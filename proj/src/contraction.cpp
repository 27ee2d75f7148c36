#include "modfix/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "modfix/errors.hpp"

namespace modfix {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RatioEstimate {
  double k_hat = 0.0;
  std::vector<Element> witness;
  bool zero_denominator_violation = false;
};

// max over sampled pairs of ρ(num·(Tx−Ty)) / ρ(den·(x−y)). Every third pair
// differs along a single axis, which is where the sup sits for diagonal and
// weighted-ℓ¹ problems.
RatioEstimate estimate_ratio(const Mapping& T, const ModularFunctional& rho, double num_scale, double den_scale,
                             std::size_t pair_count, std::uint64_t seed) {
  if (pair_count < 1) throw PreconditionError("pair_count must be >= 1");
  const std::size_t n = T.dimension();
  if (rho.dimension() != n) throw PreconditionError("mapping and modular have different dimensions");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> decade(-2.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  RatioEstimate est;
  for (std::size_t k = 0; k < pair_count; ++k) {
    const Element x = T.domain().sample(rng);
    Element y;
    if (k % 3 == 2) {
      const double h = std::pow(10.0, decade(rng)) * (coin(rng) ? 1.0 : -1.0);
      y = x + Element::unit(n, (k / 3) % n, h);
      if (!T.domain().member(y)) y = T.domain().sample(rng);
    } else {
      y = T.domain().sample(rng);
    }
    double num = 0.0, den = 0.0;
    try {
      num = evaluate(rho, num_scale * (T(x) - T(y)));
      den = evaluate(rho, den_scale * (x - y));
    } catch (const ModularOverflow&) {
      continue;
    }
    if (den == 0.0) {
      if (num > 0.0) {
        est.zero_denominator_violation = true;
        est.witness = {x, y};
        return est;
      }
      continue;
    }
    const double ratio = num / den;
    if (ratio > est.k_hat || est.witness.empty()) {
      est.k_hat = std::max(est.k_hat, ratio);
      est.witness = {x, y};
    }
  }
  return est;
}

double inflate(double k_hat, double safety) {
  // never let the safety margin push a sub-unit estimate to 1
  return std::min(k_hat * (1.0 + safety), 0.5 * (1.0 + k_hat));
}

std::string describe(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

StrongContractionCertificate StrongContractionCertificate::make(double c, double l, double k, double s) {
  if (!(l > 0.0)) throw PreconditionError("strong contraction needs l > 0");
  if (!(c > l)) throw PreconditionError("strong contraction needs c > l (got c=" + describe(c) + ", l=" + describe(l) + ")");
  if (!(k >= 0.0 && k < 1.0)) throw PreconditionError("strong contraction needs k in [0,1)");
  if (!(s > 0.0 && s <= 1.0)) throw PreconditionError("s must lie in (0,1]");
  StrongContractionCertificate cert;
  cert.c = c;
  cert.l = l;
  cert.k = k;
  cert.s = s;
  return cert;
}

double StrongContractionCertificate::alpha() const { return conjugate_exponent(*this); }

StrictContractionCertificate StrictContractionCertificate::make(double c, double k) {
  if (!(c > 0.0)) throw PreconditionError("strict contraction needs c > 0");
  if (!(k >= 0.0 && k < 1.0)) throw PreconditionError("strict contraction needs k in [0,1)");
  StrictContractionCertificate cert;
  cert.c = c;
  cert.k = k;
  return cert;
}

double conjugate_exponent(double c, double l, double s) {
  if (!(l > 0.0) || !(c > l)) throw PreconditionError("conjugate exponent needs c > l > 0");
  if (!(s > 0.0 && s <= 1.0)) throw PreconditionError("s must lie in (0,1]");
  if (s == 1.0) return c / (c - l);
  return std::pow(1.0 - std::pow(l / c, s), -1.0 / s);
}

double conjugate_exponent(const StrongContractionCertificate& cert) {
  return conjugate_exponent(cert.c, cert.l, cert.s);
}

std::string to_string(ConvergenceMode mode) {
  switch (mode) {
    case ConvergenceMode::scaled: return "scaled";
    case ConvergenceMode::unscaled_large_c: return "unscaled_large_c";
    case ConvergenceMode::unscaled_delta2: return "unscaled_delta2";
  }
  return "unknown";
}

ConvergenceMode parse_convergence_mode(const std::string& text) {
  if (text == "scaled") return ConvergenceMode::scaled;
  if (text == "unscaled_large_c") return ConvergenceMode::unscaled_large_c;
  if (text == "unscaled_delta2") return ConvergenceMode::unscaled_delta2;
  throw PreconditionError("unknown convergence mode '" + text + "'");
}

StrongContractionCertificate certify_strong(const Mapping& T, const ModularFunctional& rho, double c, double l,
                                            std::size_t pair_count, std::uint64_t seed, double safety) {
  if (!(l > 0.0) || !(c > l)) throw PreconditionError("certify_strong needs c > l > 0");
  const RatioEstimate est = estimate_ratio(T, rho, c, l, pair_count, seed);
  if (est.zero_denominator_violation)
    throw Rejection("rho(l(x-y)) = 0 but rho(c(Tx-Ty)) > 0: no finite k exists", est.witness);
  if (est.k_hat >= 1.0)
    throw Rejection("estimated contraction constant " + describe(est.k_hat) + " >= 1", est.witness);
  StrongContractionCertificate cert = StrongContractionCertificate::make(c, l, inflate(est.k_hat, safety), rho.s());
  cert.k_estimate = est.k_hat;
  return cert;
}

StrictContractionCertificate certify_strict(const Mapping& T, const ModularFunctional& rho, double c,
                                            std::size_t pair_count, std::uint64_t seed, double safety) {
  if (!(c > 0.0)) throw PreconditionError("certify_strict needs c > 0");
  const RatioEstimate est = estimate_ratio(T, rho, c, c, pair_count, seed);
  if (est.zero_denominator_violation)
    throw Rejection("rho(c(x-y)) = 0 but rho(c(Tx-Ty)) > 0: no finite k exists", est.witness);
  if (est.k_hat >= 1.0)
    throw Rejection("estimated contraction constant " + describe(est.k_hat) + " >= 1", est.witness);
  StrictContractionCertificate cert = StrictContractionCertificate::make(c, inflate(est.k_hat, safety));
  cert.k_estimate = est.k_hat;
  return cert;
}

StrongContractionCertificate reduce_s_convex_certificate(double s, double c, double k, double l) {
  if (!(s > 0.0 && s <= 1.0)) throw PreconditionError("s must lie in (0,1]");
  if (!(k > 0.0) || !(l > 0.0)) throw PreconditionError("reduction needs k > 0 and l > 0");
  const double floor = std::max(l, k * l);
  if (!(c > floor)) throw PreconditionError("reduction needs c > max(l, kl)");
  const double l0 = 0.5 * (c + floor);
  const double k0 = std::pow(l * k / l0, s);
  return StrongContractionCertificate::make(c, l0, k0, s);
}

double residual(const ModularFunctional& rho, double c, const Element& x, const Element& Tx) {
  return evaluate(rho, (0.5 * c) * (Tx - x));
}

// ---------------------------------------------------------------------------
// Strong contraction

namespace {

// Continue the orbit past the stopping index until ρ(c(Ty − y)) stops
// improving; the best point serves as the reference limit.
Element refine_limit(const Mapping& T, const ModularFunctional& rho, double c, const Element& start,
                     std::size_t budget) {
  Element best = start;
  Element y = start;
  Element Ty = T(y);
  double best_res = evaluate(rho, c * (Ty - y));
  int stale = 0;
  for (std::size_t i = 0; i < budget && best_res > 0.0 && stale < 5; ++i) {
    y = Ty;
    Ty = T(y);
    const double res = evaluate(rho, c * (Ty - y));
    if (res < best_res) {
      best_res = res;
      best = y;
      stale = 0;
    } else {
      ++stale;
    }
  }
  return best;
}

}  // namespace

FixedPointResult solve_strong(const Mapping& T, const ModularFunctional& rho,
                              const StrongContractionCertificate& cert_in, const Element& x0,
                              const StrongOptions& options) {
  StrongContractionCertificate cert = StrongContractionCertificate::make(cert_in.c, cert_in.l, cert_in.k, cert_in.s);
  cert.k_estimate = cert_in.k_estimate;
  if (!(options.tol > 0.0)) throw PreconditionError("tol must be positive");
  if (x0.size() != T.dimension()) throw PreconditionError("starting point has the wrong dimension");
  if (!T.domain().member(x0)) throw PreconditionError("starting point lies outside the domain");
  switch (options.mode) {
    case ConvergenceMode::scaled: break;
    case ConvergenceMode::unscaled_large_c:
      if (cert.c < 1.0) throw PreconditionError("unscaled convergence without a Delta2 certificate needs c >= 1");
      break;
    case ConvergenceMode::unscaled_delta2:
      if (!(cert.c < 1.0)) throw PreconditionError("unscaled_delta2 mode is for 0 < c < 1");
      if (!options.delta2 || !options.delta2->valid)
        throw PreconditionError("unscaled_delta2 mode requires a valid Delta2 certificate");
      break;
  }

  const double c = cert.c, l = cert.l, k = cert.k;
  const double alpha = conjugate_exponent(cert);

  FixedPointResult result;
  result.certificate = cert;
  IterationTrace& trace = result.trace;
  trace.scheme = "strong";
  trace.residual_label = "rho(c(T^{m+1}x0 - T^m x0))";
  trace.bound_label = "k^m r";
  trace.meta = {{"c", c}, {"l", l}, {"k", k}, {"s", cert.s}, {"alpha", alpha}, {"tol", options.tol}};

  auto abort_overflow = [&](std::size_t m) {
    throw Rejection("modular overflow at iteration " + std::to_string(m), {},
                    std::make_shared<const IterationTrace>(trace));
  };

  Element x = x0;
  Element Tx = T(x);
  std::size_t iterations = 1;
  double r = 0.0;
  try {
    r = evaluate(rho, (alpha * l) * (Tx - x));
  } catch (const ModularOverflow&) {
    throw Rejection("no admissible starting point: rho(alpha*l*(Tx0 - x0)) is not finite", {x0});
  }
  trace.initial_r = r;

  // The contraction has to be applied at least once before k^m·r bounds
  // anything, so rows start at m = 1; r = 0 means x0 is already fixed.
  bool stopped = (r == 0.0);
  double km = 1.0;
  for (std::size_t m = 1; !stopped; ++m) {
    if (iterations >= options.max_iter) break;
    x = Tx;
    Tx = T(x);
    ++iterations;
    km *= k;
    double step = 0.0;
    try {
      step = evaluate(rho, c * (Tx - x));
    } catch (const ModularOverflow&) {
      abort_overflow(m);
    }
    const double err_bound = km * r / (1.0 - k);
    TraceRow row{m, step, km * r, kNaN, err_bound};
    if (options.record_rows || trace.rows.empty()) trace.rows.push_back(row);
    else trace.rows.back() = row;
    if (err_bound <= options.tol) stopped = true;
  }

  result.point = x;
  result.iterations = iterations;
  try {
    result.residual = residual(rho, c, x, Tx);
  } catch (const ModularOverflow&) {
    abort_overflow(iterations);
  }
  result.converged = stopped && result.residual <= options.tol;
  if (result.converged) result.status = "converged";
  else if (!stopped) result.status = "max_iter reached before the a-priori bound fell below tol";
  else result.status = "residual check failed: rho((c/2)(Tz - z)) > tol";

  result.notes.push_back("convergence mode " + to_string(options.mode) +
                         "; on a finite-dimensional coordinate-wise modular every mode runs the same iteration");
  if (options.mode == ConvergenceMode::unscaled_delta2)
    result.notes.push_back("Delta2 certificate attached (delta=" + describe(options.delta2->delta) +
                           ", L=" + describe(options.delta2->L) + ", M=" + describe(options.delta2->M) + ")");

  if (options.error_columns && options.record_rows && !trace.rows.empty()) {
    const Element ref = options.reference ? *options.reference
                                          : refine_limit(T, rho, c, Tx, std::max<std::size_t>(100, iterations));
    result.notes.push_back(options.reference ? "error columns measured against the supplied reference"
                                             : "error columns measured against the refined orbit limit; the "
                                               "coordinate-wise modular is continuous, so the bound passes to the limit");
    Element y = x0;
    for (TraceRow& row : trace.rows) {
      y = T(y);
      row.error = evaluate(rho, c * (ref - y));
    }
    result.reference = ref;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Strict contraction under Δ₂

std::size_t strict_power(double k, double delta, double L, double M, double r) {
  if (!(k >= 0.0 && k < 1.0)) throw PreconditionError("k must lie in [0,1)");
  const double threshold = delta / (M + r + L * delta);
  std::size_t p = 1;
  double kp = k;
  while (kp > threshold) {
    kp *= k;
    if (++p > 100'000) throw PreconditionError("no power of k falls below the Delta2 threshold within 1e5 steps");
  }
  return p;
}

namespace {

FixedPointResult strict_run(const Mapping& T, const ModularFunctional& rho, const StrictContractionCertificate& cert,
                            const Delta2Certificate& d2, const Element& x0, const StrictOptions& options) {
  const double c = cert.c, k = cert.k;
  const double r_target = options.r_target.value_or(d2.delta);

  FixedPointResult result;
  result.certificate = cert;
  IterationTrace& trace = result.trace;
  trace.scheme = "strict_delta2";
  trace.residual_label = "rho(c(S^n x0 - x0))";
  trace.bound_label = "(1-(L k0)^n)/(1-L k0) (M+r)";

  // Burn-in: move along the orbit until r = ρ(2c(Tx − x)) is small.
  Element x = x0;
  Element Tx = T(x);
  std::size_t iterations = 1;
  double r = evaluate(rho, (2.0 * c) * (Tx - x));
  std::size_t burn = 0;
  while (r > r_target) {
    if (burn >= options.burn_in_budget || iterations >= options.max_iter)
      throw Rejection("burn-in budget exhausted before rho(2c(Tx - x)) <= " + describe(r_target), {x});
    x = Tx;
    Tx = T(x);
    ++iterations;
    ++burn;
    r = evaluate(rho, (2.0 * c) * (Tx - x));
  }
  trace.initial_r = r;

  const std::size_t p0 = strict_power(k, d2.delta, d2.L, d2.M, r);
  const double k0 = std::pow(k, static_cast<double>(p0));
  const double Lk0 = d2.L * k0;
  if (!(Lk0 < 1.0)) throw std::logic_error("L*k0 >= 1 after choosing p0; the threshold guarantees L*k0 < 1");
  const double threshold = d2.delta / (d2.M + r + d2.L * d2.delta);
  trace.meta = {{"c", c},       {"k", k},   {"L", d2.L},   {"M", d2.M},        {"delta", d2.delta},
                {"r", r},       {"p0", static_cast<double>(p0)}, {"k0", k0}, {"threshold", threshold},
                {"burn_in", static_cast<double>(burn)}, {"tol", options.tol}};

  const Mapping S = T.power(p0);
  const Element start = x;
  Element xn = x;
  bool stopped = false;
  double Lk0n = 1.0, k0n = 1.0;
  double res_T = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1;; ++n) {
    if (iterations + p0 > options.max_iter) break;
    xn = S(xn);
    iterations += p0;
    Lk0n *= Lk0;
    k0n *= k0;
    const double res = evaluate(rho, c * (xn - start));
    const double bound = (1.0 - Lk0n) / (1.0 - Lk0) * (d2.M + r);
    const double cauchy = k0n * (d2.M + r) / (1.0 - Lk0);
    TraceRow row{n, res, bound, kNaN, cauchy};
    if (options.record_rows || trace.rows.empty()) trace.rows.push_back(row);
    else trace.rows.back() = row;
    if (cauchy <= options.tol) {
      const Element Txn = T(xn);
      ++iterations;
      res_T = residual(rho, c, xn, Txn);
      if (res_T <= options.tol) {
        stopped = true;
        break;
      }
    }
  }

  result.point = xn;
  result.iterations = iterations;
  result.residual = std::isfinite(res_T) ? res_T : residual(rho, c, xn, T(xn));
  result.converged = stopped;
  result.status = stopped ? "converged" : "max_iter reached before convergence";
  const auto flagged = trace.violations();
  if (!flagged.empty())
    result.notes.push_back(std::to_string(flagged.size()) + " rows exceed the (L, k0) envelope");
  return result;
}

}  // namespace

FixedPointResult solve_strict_delta2(const Mapping& T, const ModularFunctional& rho,
                                     const StrictContractionCertificate& cert_in, const Delta2Certificate& d2,
                                     const Element& x0, const StrictOptions& options) {
  if (!d2.valid) throw PreconditionError("Delta2 certificate required (the supplied one is invalid)");
  StrictContractionCertificate cert = StrictContractionCertificate::make(cert_in.c, cert_in.k);
  cert.k_estimate = cert_in.k_estimate;
  if (!(options.tol > 0.0)) throw PreconditionError("tol must be positive");
  if (x0.size() != T.dimension()) throw PreconditionError("starting point has the wrong dimension");
  if (!T.domain().member(x0)) throw PreconditionError("starting point lies outside the domain");

  FixedPointResult result = strict_run(T, rho, cert, d2, x0, options);
  if (!options.uniqueness_probe) return result;

  Element second;
  if (options.second_start) {
    second = *options.second_start;
  } else {
    std::mt19937_64 rng(options.seed);
    second = T.domain().sample(rng);
  }
  StrictOptions probe = options;
  probe.uniqueness_probe = false;
  probe.record_rows = false;
  const FixedPointResult other = strict_run(T, rho, cert, d2, second, probe);
  const double gap = evaluate(rho, cert.c * (result.point - other.point));
  result.uniqueness_gap = gap;
  result.iterations += other.iterations;
  if (!other.converged) {
    result.converged = false;
    result.status = "uniqueness probe run did not converge";
  } else if (gap > 2.0 * options.tol) {
    result.converged = false;
    result.status = "uniqueness probe failed: rho(c(z - z')) = " + describe(gap);
  }
  return result;
}

}  // namespace modfix
