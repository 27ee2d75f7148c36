#include "modfix/modular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "modfix/errors.hpp"

namespace modfix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double exp_generator(double t) {
  if (t < 1e-3) {
    // e^t − 1 − t loses every digit to cancellation near zero
    const double t2 = t * t;
    return t2 * (0.5 + t * (1.0 / 6.0 + t * (1.0 / 24.0 + t / 120.0)));
  }
  return std::expm1(t) - t;
}

std::vector<double> log_grid(double lo_exp, double hi_exp, int points) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double e = lo_exp + (hi_exp - lo_exp) * i / (points - 1);
    out.push_back(std::pow(10.0, e));
  }
  return out;
}

}  // namespace

double Tolerance::slack(double a, double b) const {
  return std::max(abs, rel * std::max(std::fabs(a), std::fabs(b)));
}

// --------------------------------------------------------------------------
// OrliczGenerator

OrliczGenerator OrliczGenerator::power(double p) { return power(p, std::min(1.0, p)); }

OrliczGenerator OrliczGenerator::power(double p, double s) {
  if (!(p > 0.0) || !std::isfinite(p)) throw PreconditionError("power generator needs a positive exponent");
  if (!(s > 0.0 && s <= 1.0)) throw PreconditionError("s-convexity parameter must lie in (0,1]");
  if (p < s) throw PreconditionError("power generator exponent must be >= s");
  return OrliczGenerator(Kind::power, p, s, {});
}

OrliczGenerator OrliczGenerator::exponential() { return OrliczGenerator(Kind::exponential, 1.0, 1.0, {}); }

OrliczGenerator OrliczGenerator::piecewise_linear(std::vector<Knot> knots, double s) {
  if (knots.size() < 2) throw PreconditionError("piecewise-linear generator needs at least two knots");
  if (knots.front().first != 0.0 || knots.front().second != 0.0)
    throw PreconditionError("piecewise-linear generator must start at the knot (0,0)");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i].first > knots[i - 1].first))
      throw PreconditionError("piecewise-linear knots must have strictly increasing abscissae");
    if (!std::isfinite(knots[i].first) || !std::isfinite(knots[i].second))
      throw PreconditionError("piecewise-linear knots must be finite");
  }
  if (!(s > 0.0 && s <= 1.0)) throw PreconditionError("s-convexity parameter must lie in (0,1]");
  return OrliczGenerator(Kind::piecewise_linear, 1.0, s, std::move(knots));
}

double OrliczGenerator::operator()(double t) const {
  switch (kind_) {
    case Kind::power:
      if (p_ == 1.0) return t;
      if (p_ == 2.0) return t * t;
      return std::pow(t, p_);
    case Kind::exponential:
      return exp_generator(t);
    case Kind::piecewise_linear: {
      auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                 [](double v, const Knot& k) { return v < k.first; });
      std::size_t hi = static_cast<std::size_t>(it - knots_.begin());
      if (hi == 0) return knots_.front().second;
      if (hi >= knots_.size()) hi = knots_.size() - 1;
      const Knot& a = knots_[hi - 1];
      const Knot& b = knots_[hi];
      const double slope = (b.second - a.second) / (b.first - a.first);
      return a.second + slope * (t - a.first);
    }
  }
  return 0.0;
}

std::vector<double> OrliczGenerator::probe_magnitudes() const {
  std::vector<double> out = log_grid(-3.0, 3.0, 121);
  if (kind_ == Kind::piecewise_linear) {
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      out.push_back(knots_[i].first);
      out.push_back(0.5 * (knots_[i - 1].first + knots_[i].first));
    }
    out.push_back(1.5 * knots_.back().first);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string to_string(OrliczGenerator::Kind kind) {
  switch (kind) {
    case OrliczGenerator::Kind::power: return "power";
    case OrliczGenerator::Kind::exponential: return "exponential";
    case OrliczGenerator::Kind::piecewise_linear: return "piecewise_linear";
  }
  return "unknown";
}

// --------------------------------------------------------------------------
// ModularFunctional

ModularFunctional::ModularFunctional(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw PreconditionError("modular functional needs dimension >= 1");
  for (const auto& e : entries_) {
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw PreconditionError("modular weights must be positive and finite");
  }
}

ModularFunctional ModularFunctional::unchecked(std::vector<Entry> entries) {
  return ModularFunctional(std::move(entries), NoCheck{});
}

ModularFunctional ModularFunctional::uniform(std::size_t n, const OrliczGenerator& g, double weight) {
  return ModularFunctional(std::vector<Entry>(n, Entry{weight, g}));
}

ModularFunctional ModularFunctional::weighted(const std::vector<double>& weights, const OrliczGenerator& g) {
  std::vector<Entry> entries;
  entries.reserve(weights.size());
  for (double w : weights) entries.push_back({w, g});
  return ModularFunctional(std::move(entries));
}

double ModularFunctional::s() const {
  double s = 1.0;
  for (const auto& e : entries_) s = std::min(s, e.generator.s());
  return s;
}

double ModularFunctional::evaluate_unchecked(const Element& x) const {
  double sum = 0.0;
  const Vector& v = x.coords();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    sum += e.weight * e.generator(std::fabs(v[static_cast<Eigen::Index>(i)]));
  }
  return sum;
}

double evaluate(const ModularFunctional& rho, const Element& x) {
  if (x.size() != rho.dimension()) {
    std::ostringstream msg;
    msg << "dimension mismatch: modular has dimension " << rho.dimension() << ", element has " << x.size();
    throw PreconditionError(msg.str());
  }
  const double v = rho.evaluate_unchecked(x);
  if (!std::isfinite(v)) throw ModularOverflow("modular value overflowed");
  return v;
}

// --------------------------------------------------------------------------
// Sampling

Element sample_element(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> decade(-2.0, 1.0);
  Element x = Element::zero(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = gauss(rng);
  x *= std::pow(10.0, decade(rng));
  return x;
}

double scale_to_level(const ModularFunctional& rho, const Element& u, double level) {
  if (u.coords().isZero(0.0)) return 0.0;
  auto f = [&](double lambda) { return rho.evaluate_unchecked(lambda * u); };
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (f(hi) < level) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 200) return lo;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-16 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < level) lo = mid;
    else hi = mid;
  }
  return lo;
}

// --------------------------------------------------------------------------
// Axioms

bool AxiomReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return c.passed; });
}

const AxiomCheck* AxiomReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

void record(AxiomCheck& check, double violation, std::vector<Element> witness) {
  if (violation > 0.0 && violation > check.worst_violation) {
    check.passed = false;
    check.worst_violation = violation;
    check.witness = std::move(witness);
  }
}

}  // namespace

AxiomReport verify_modular_axioms(const ModularFunctional& rho, std::size_t sample_count,
                                  std::uint64_t seed, Tolerance tol) {
  if (sample_count < 1) throw PreconditionError("sample_count must be >= 1");
  const std::size_t n = rho.dimension();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  AxiomCheck zero{"zero", true, 0.0, {}}, symmetry{"symmetry", true, 0.0, {}}, subadditivity{"subadditivity", true, 0.0, {}},
      monotonicity{"monotonicity", true, 0.0, {}}, sconvex{"s_convexity", true, 0.0, {}};

  const Element origin = Element::zero(n);
  const double at_zero = rho.evaluate_unchecked(origin);
  if (std::fabs(at_zero) > tol.abs) record(zero, std::fabs(at_zero), {origin});

  for (std::size_t k = 0; k < sample_count; ++k) {
    const Element x = sample_element(n, rng);
    const Element y = sample_element(n, rng);
    const double a = unit(rng);
    double t1 = 2.0 * unit(rng);
    double t2 = 2.0 * unit(rng);
    if (t1 > t2) std::swap(t1, t2);

    const double rx = rho.evaluate_unchecked(x);
    const double ry = rho.evaluate_unchecked(y);
    if (!std::isfinite(rx) || !std::isfinite(ry)) continue;

    if (!(rx > 0.0) && !x.coords().isZero(0.0)) record(zero, std::max(-rx, tol.abs), {x});

    const double rmx = rho.evaluate_unchecked(-x);
    if (std::fabs(rx - rmx) > tol.slack(rx, rmx)) record(symmetry, std::fabs(rx - rmx), {x});

    const double rc = rho.evaluate_unchecked(a * x + (1.0 - a) * y);
    if (!tol.le(rc, rx + ry)) record(subadditivity, rc - (rx + ry), {x, y, Element{a}});

    const double r1 = rho.evaluate_unchecked(t1 * x);
    const double r2 = rho.evaluate_unchecked(t2 * x);
    if (!tol.le(r1, r2)) record(monotonicity, r1 - r2, {x, Element{t1, t2}});
  }

  // Axis scans catch narrow defects (a decreasing table segment) that random
  // sampling can step over.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = rho.entries()[i].generator;
    std::vector<double> mags = g.probe_magnitudes();
    mags.insert(mags.begin(), 0.0);
    double prev = 0.0;
    for (std::size_t j = 0; j < mags.size(); ++j) {
      const Element x = Element::unit(n, i, mags[j]);
      const double r = rho.evaluate_unchecked(x);
      if (!std::isfinite(r)) break;
      if (j > 0 && !tol.le(prev, r)) record(monotonicity, prev - r, {Element::unit(n, i, mags[j - 1]), x});
      if (mags[j] > 0.0 && !(r > 0.0)) record(zero, std::max(-r, tol.abs), {x});
      prev = r;
    }
    for (double t : g.probe_magnitudes()) {
      const double ft = g(t);
      if (!std::isfinite(ft)) break;
      for (int ai = 1; ai < 20; ++ai) {
        const double a = ai / 20.0;
        const double lhs = g(a * t);
        const double rhs = std::pow(a, g.s()) * ft;
        if (!tol.le(lhs, rhs)) record(sconvex, lhs - rhs, {Element::unit(n, i, t), Element{a}});
      }
    }
  }

  AxiomReport report;
  report.checks = {zero, symmetry, subadditivity, monotonicity, sconvex};
  return report;
}

// --------------------------------------------------------------------------
// Growth function

namespace {

std::vector<Element> growth_candidates(const ModularFunctional& rho, std::size_t sample_count,
                                       std::uint64_t seed) {
  const std::size_t n = rho.dimension();
  std::vector<Element> out;
  for (std::size_t i = 0; i < n; ++i)
    for (double m : rho.entries()[i].generator.probe_magnitudes()) out.push_back(Element::unit(n, i, m));
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < sample_count; ++k) out.push_back(sample_element(n, rng));
  return out;
}

}  // namespace

GrowthSample growth_function_estimate(const ModularFunctional& rho, double t, std::size_t sample_count,
                                      std::uint64_t seed) {
  if (!(t >= 0.0 && t < 1.0)) throw PreconditionError("growth function is defined for t in [0,1)");
  GrowthSample out{t, 0.0, Element::zero(rho.dimension())};
  for (const Element& x : growth_candidates(rho, sample_count, seed)) {
    const double rx = rho.evaluate_unchecked(x);
    if (!(rx > 0.0) || !std::isfinite(rx)) continue;
    const double ratio = rho.evaluate_unchecked(t * x) / rx;
    if (ratio > out.estimate) {
      out.estimate = ratio;
      out.witness = x;
    }
  }
  return out;
}

GrowthProfile check_regular_growth(const ModularFunctional& rho, const std::vector<double>& t_grid,
                                   std::size_t sample_count, std::uint64_t seed, double margin) {
  if (t_grid.empty()) throw PreconditionError("regular growth check needs a nonempty t grid");
  GrowthProfile profile;
  profile.sample_count = sample_count;
  profile.seed = seed;
  profile.margin = margin;
  profile.s = rho.s();
  profile.worst_gap = 1.0;
  profile.regular_growth_ok = true;
  for (double t : t_grid) {
    GrowthSample g = growth_function_estimate(rho, t, sample_count, seed);
    const double gap = 1.0 - g.estimate;
    profile.worst_gap = std::min(profile.worst_gap, gap);
    if (!(g.estimate < 1.0 - margin)) profile.regular_growth_ok = false;
    profile.analytic_bound.push_back(std::pow(t, *profile.s));
    profile.samples.push_back(std::move(g));
  }
  return profile;
}

// --------------------------------------------------------------------------
// Δ₂

namespace {

struct Delta2Sample {
  double r1;  // ρ(x)
  double r2;  // ρ(2x)
};

std::vector<Delta2Sample> delta2_samples(const ModularFunctional& rho, double delta, std::size_t count,
                                         std::uint64_t seed, bool with_axes) {
  const std::size_t n = rho.dimension();
  std::vector<Delta2Sample> out;
  auto push = [&](const Element& u, double level) {
    const double lambda = scale_to_level(rho, u, level);
    const Element x = lambda * u;
    out.push_back({rho.evaluate_unchecked(x), rho.evaluate_unchecked(2.0 * x)});
  };
  if (with_axes) {
    for (std::size_t i = 0; i < n; ++i)
      for (int j = 0; j <= 24; ++j) push(Element::unit(n, i), delta * std::pow(10.0, -j / 4.0));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> decades(0.0, 6.0);
  for (std::size_t k = 0; k < count; ++k) {
    Element u = Element::zero(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = gauss(rng);
    const double level = (k % 4 == 0) ? delta : delta * std::pow(10.0, -decades(rng));
    push(u, level);
  }
  return out;
}

double bound_margin(const std::vector<Delta2Sample>& samples, double L, double M) {
  double worst = -kInf;
  for (const auto& s : samples) worst = std::max(worst, s.r2 - (L * s.r1 + M));
  return worst;
}

}  // namespace

Delta2Certificate estimate_delta2(const ModularFunctional& rho, double delta, std::size_t sample_count,
                                  std::uint64_t seed, const Delta2Options& options) {
  if (!(delta > 0.0)) throw PreconditionError("delta must be positive");
  const std::size_t count = std::min(sample_count, options.max_samples);
  const auto samples = delta2_samples(rho, delta, count, seed, true);

  Delta2Certificate cert;
  cert.delta = delta;
  cert.samples_used = samples.size();

  std::vector<double> ratios;
  ratios.reserve(samples.size());
  double worst_ratio = 0.0;
  for (const auto& s : samples) {
    if (s.r1 == 0.0 && s.r2 == 0.0) continue;
    const double ratio = (s.r1 > 0.0 && std::isfinite(s.r2)) ? s.r2 / s.r1 : kInf;
    worst_ratio = std::max(worst_ratio, ratio);
    ratios.push_back(ratio);
  }
  cert.worst_ratio = worst_ratio;

  // First fit: M fixed, L = smallest slope covering every sample.
  double L = 0.0;
  bool finite = true;
  for (const auto& s : samples) {
    if (s.r1 == 0.0 && s.r2 == 0.0) continue;
    if (!(s.r1 > 0.0) || !std::isfinite(s.r2)) {
      if (s.r2 > options.fixed_m || !std::isfinite(s.r2)) finite = false;
      continue;
    }
    L = std::max(L, (s.r2 - options.fixed_m) / s.r1);
  }
  // Round up so that L·ρ(x) ≥ ρ(2x) survives the multiplication.
  L *= 1.0 + 4.0 * std::numeric_limits<double>::epsilon();
  if (finite && L <= options.ratio_cap) {
    cert.L = L;
    cert.M = options.fixed_m;
    cert.empirical_margin = bound_margin(samples, cert.L, cert.M);
    cert.valid = cert.empirical_margin <= 0.0;
    if (cert.valid || !options.allow_free_m) return cert;
  } else if (!options.allow_free_m) {
    cert.L = L;
    cert.M = options.fixed_m;
    cert.empirical_margin = std::isfinite(L) ? bound_margin(samples, L, cert.M) : kInf;
    cert.valid = false;
    return cert;
  }

  // Free M: choose the breakpoint L minimizing M(L) + Lδ, the quantity that
  // enters the admissible contraction threshold δ/(M + r + Lδ).
  std::vector<double> cand{0.0};
  for (double r : ratios)
    if (std::isfinite(r) && r <= options.ratio_cap) cand.push_back(r);
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  auto m_of = [&](double l) {
    double m = 0.0;
    for (const auto& s : samples) m = std::max(m, s.r2 - l * s.r1);
    return m;
  };
  auto cost = [&](std::size_t i) { return m_of(cand[i]) + cand[i] * delta; };
  std::size_t lo = 0, hi = cand.size() - 1;
  while (hi - lo > 2) {
    const std::size_t m1 = lo + (hi - lo) / 3;
    const std::size_t m2 = hi - (hi - lo) / 3;
    if (cost(m1) <= cost(m2)) hi = m2;
    else lo = m1;
  }
  std::size_t best = lo;
  for (std::size_t i = lo; i <= hi; ++i)
    if (cost(i) < cost(best)) best = i;
  cert.L = cand[best];
  cert.M = m_of(cert.L);
  cert.M *= 1.0 + 4.0 * std::numeric_limits<double>::epsilon();
  cert.empirical_margin = bound_margin(samples, cert.L, cert.M);
  cert.valid = std::isfinite(cert.M) && cert.empirical_margin <= 0.0;
  return cert;
}

bool replay_delta2(const ModularFunctional& rho, const Delta2Certificate& cert, std::size_t sample_count,
                   std::uint64_t seed, Tolerance tol) {
  const auto samples = delta2_samples(rho, cert.delta, sample_count, seed, false);
  for (const auto& s : samples) {
    if (!tol.le(s.r2, cert.L * s.r1 + cert.M)) return false;
  }
  return true;
}

}  // namespace modfix
