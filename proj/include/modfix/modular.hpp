#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "modfix/element.hpp"

namespace modfix {

/// Comparison rule for modular values: a ≤ b holds when a exceeds b by no
/// more than max(abs, rel·max(|a|,|b|)).
struct Tolerance {
  double abs = 1e-12;
  double rel = 1e-9;

  double slack(double a, double b) const;
  bool le(double a, double b) const { return a <= b + slack(a, b); }
  bool eq(double a, double b) const { return le(a, b) && le(b, a); }
};

/// A one-dimensional Orlicz-type function φ: [0,∞) → [0,∞).
///
/// Three families are admitted:
///   - power:        φ(t) = t^p
///   - exponential:  φ(t) = e^t − 1 − t
///   - piecewise:    linear interpolation through a knot table starting at
///                   (0,0); the last segment is extended past the final knot.
///
/// `s` is the declared s-convexity parameter in (0,1]: φ(a·t) ≤ a^s·φ(t)
/// for a in [0,1]. The declaration is checked by verify_modular_axioms, not
/// at construction, so that broken tables can be diagnosed.
class OrliczGenerator {
 public:
  enum class Kind { power, exponential, piecewise_linear };
  using Knot = std::pair<double, double>;

  static OrliczGenerator power(double p);
  static OrliczGenerator power(double p, double s);
  static OrliczGenerator exponential();
  static OrliczGenerator piecewise_linear(std::vector<Knot> knots, double s = 1.0);

  double operator()(double t) const;

  Kind kind() const noexcept { return kind_; }
  double exponent() const noexcept { return p_; }
  double s() const noexcept { return s_; }
  const std::vector<Knot>& knots() const noexcept { return knots_; }

  /// Grid of magnitudes on which the generator's shape is probed
  /// (log grid plus, for tables, knots and knot midpoints).
  std::vector<double> probe_magnitudes() const;

 private:
  OrliczGenerator(Kind kind, double p, double s, std::vector<Knot> knots)
      : kind_(kind), p_(p), s_(s), knots_(std::move(knots)) {}

  Kind kind_;
  double p_ = 1.0;
  double s_ = 1.0;
  std::vector<Knot> knots_;
};

std::string to_string(OrliczGenerator::Kind kind);

/// ρ(x) = Σ_i w_i·φ_i(|x_i|) on ℝⁿ.
class ModularFunctional {
 public:
  struct Entry {
    double weight;
    OrliczGenerator generator;
  };

  /// Requires n ≥ 1 and positive finite weights.
  explicit ModularFunctional(std::vector<Entry> entries);

  /// Skips the weight check. Only useful for exercising the axiom verifier
  /// on corrupted functionals.
  static ModularFunctional unchecked(std::vector<Entry> entries);

  static ModularFunctional uniform(std::size_t n, const OrliczGenerator& g, double weight = 1.0);
  static ModularFunctional weighted(const std::vector<double>& weights, const OrliczGenerator& g);

  std::size_t dimension() const noexcept { return entries_.size(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  /// Smallest declared s over all coordinates.
  double s() const;
  bool is_convex() const { return s() >= 1.0; }

  /// Raw sum; may be +inf for exponential generators.
  double evaluate_unchecked(const Element& x) const;

 private:
  struct NoCheck {};
  ModularFunctional(std::vector<Entry> entries, NoCheck) : entries_(std::move(entries)) {}

  std::vector<Entry> entries_;
};

/// ρ(x). Throws PreconditionError on a dimension mismatch and
/// ModularOverflow when the value is not finite.
double evaluate(const ModularFunctional& rho, const Element& x);

// ---------------------------------------------------------------------------
// Sampling helpers shared by the certification routines.

/// Gaussian direction scaled by a log-uniform magnitude in [1e-2, 1e1].
Element sample_element(std::size_t n, std::mt19937_64& rng);

/// Scale λ ≥ 0 with ρ(λ·u) ≈ level (bisection on the monotone map λ ↦ ρ(λu)).
/// If ρ(λu) stays below `level` for every λ the largest probed λ is returned.
double scale_to_level(const ModularFunctional& rho, const Element& u, double level);

// ---------------------------------------------------------------------------
// Axiom verification.

struct AxiomCheck {
  std::string name;
  bool passed = true;
  double worst_violation = 0.0;  // amount by which the inequality failed
  std::vector<Element> witness;
};

struct AxiomReport {
  std::vector<AxiomCheck> checks;
  bool all_passed() const;
  const AxiomCheck* find(const std::string& name) const;
};

/// Checks zero (ρ(0) = 0, ρ(x) > 0 for x ≠ 0), symmetry, convex-combination
/// subadditivity, scalar monotonicity and the declared s-convexity of every
/// generator. Random samples are complemented by a deterministic scan along
/// the coordinate axes.
AxiomReport verify_modular_axioms(const ModularFunctional& rho, std::size_t sample_count,
                                  std::uint64_t seed, Tolerance tol = {});

// ---------------------------------------------------------------------------
// Growth function W_ρ(t) = sup ρ(tx)/ρ(x).

struct GrowthSample {
  double t = 0.0;
  double estimate = 0.0;  // Ŵ(t), a lower bound of the true sup
  Element witness;
};

struct GrowthProfile {
  std::vector<GrowthSample> samples;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
  bool regular_growth_ok = false;
  double margin = 0.0;         // threshold used: Ŵ(t) < 1 − margin
  double worst_gap = 0.0;      // min over t of 1 − Ŵ(t)
  std::optional<double> s;     // set when every generator is declared s-convex
  std::vector<double> analytic_bound;  // t^s per sample when s is set
};

/// Ŵ(t) over a candidate set that depends only on (ρ, sample_count, seed):
/// axis-aligned witnesses on each generator's probe grid plus random
/// elements. Throws PreconditionError unless 0 ≤ t < 1.
GrowthSample growth_function_estimate(const ModularFunctional& rho, double t,
                                      std::size_t sample_count, std::uint64_t seed);

GrowthProfile check_regular_growth(const ModularFunctional& rho, const std::vector<double>& t_grid,
                                   std::size_t sample_count, std::uint64_t seed = 0,
                                   double margin = 1e-9);

// ---------------------------------------------------------------------------
// Local Δ₂ condition: ρ(x) ≤ δ ⟹ ρ(2x) ≤ L·ρ(x) + M.

struct Delta2Options {
  double fixed_m = 0.0;             // M used on the first fit
  bool allow_free_m = true;         // retry with M fitted when the first fit fails
  double ratio_cap = 1e8;           // L beyond this is declared unbounded
  std::size_t max_samples = 100000; // sampling cap
};

struct Delta2Certificate {
  double delta = 0.0;
  double L = 0.0;
  double M = 0.0;
  double empirical_margin = 0.0;  // max over samples of ρ(2x) − (Lρ(x) + M)
  double worst_ratio = 0.0;       // max ρ(2x)/ρ(x) seen, diagnostic
  std::size_t samples_used = 0;
  bool valid = false;
};

Delta2Certificate estimate_delta2(const ModularFunctional& rho, double delta,
                                  std::size_t sample_count, std::uint64_t seed,
                                  const Delta2Options& options = {});

/// Replays a certificate on a fresh sample set; true when no sample violates it.
bool replay_delta2(const ModularFunctional& rho, const Delta2Certificate& cert,
                   std::size_t sample_count, std::uint64_t seed, Tolerance tol = {});

}  // namespace modfix
