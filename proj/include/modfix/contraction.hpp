#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "modfix/element.hpp"
#include "modfix/mapping.hpp"
#include "modfix/modular.hpp"
#include "modfix/trace.hpp"

namespace modfix {

/// Constants (c, l, k, s) witnessing ρ(c(Tx−Ty)) ≤ k·ρ(l(x−y)) with c > l.
struct StrongContractionCertificate {
  double c = 0.0;
  double l = 0.0;
  double k = 0.0;
  double s = 1.0;
  double k_estimate = std::nan("");  // sampled sup, when produced by certify_strong

  /// Validates c > l > 0, 0 ≤ k < 1 and s ∈ (0,1]; throws PreconditionError.
  static StrongContractionCertificate make(double c, double l, double k, double s = 1.0);

  double alpha() const;
};

/// ρ(c(Tx−Ty)) ≤ k·ρ(c(x−y)).
struct StrictContractionCertificate {
  double c = 0.0;
  double k = 0.0;
  double k_estimate = std::nan("");

  static StrictContractionCertificate make(double c, double k);
};

/// Solves (l/c)^s + α^{−s} = 1 for α; α = c/(c−l) when s = 1. Always > 1.
double conjugate_exponent(const StrongContractionCertificate& cert);
double conjugate_exponent(double c, double l, double s = 1.0);

/// Which notion of convergence the limit is taken in. On ℝⁿ with a
/// coordinate-wise modular they all coincide, so the iteration is the same;
/// the mode only changes which preconditions are checked.
enum class ConvergenceMode {
  scaled,            // ρ(c(x_n − z)) → 0 at the certificate's scale c
  unscaled_large_c,  // ρ(x_n − z) → 0, needs c ≥ 1
  unscaled_delta2,   // ρ(x_n − z) → 0 with 0 < c < 1, needs a valid Δ₂ certificate
};

std::string to_string(ConvergenceMode mode);
ConvergenceMode parse_convergence_mode(const std::string& text);

using AnyCertificate = std::variant<std::monostate, StrongContractionCertificate, StrictContractionCertificate>;

struct FixedPointResult {
  Element point;
  double residual = 0.0;
  std::size_t iterations = 0;
  IterationTrace trace;
  AnyCertificate certificate;
  bool converged = false;
  std::string status;
  std::vector<std::string> notes;
  std::optional<Element> reference;
  std::optional<double> uniqueness_gap;
};

struct SolveOptions {
  double tol = 1e-12;
  std::size_t max_iter = 1'000'000;
  bool record_rows = true;
};

struct StrongOptions : SolveOptions {
  ConvergenceMode mode = ConvergenceMode::scaled;
  std::optional<Delta2Certificate> delta2;  // required by unscaled_delta2
  /// Fixed point the error columns are measured against. Without one, the
  /// run is continued past the stopping index to refine its own limit.
  std::optional<Element> reference;
  bool error_columns = true;
};

struct StrictOptions : SolveOptions {
  std::optional<double> r_target;        // burn-in target for ρ(2c(Tx−x)); defaults to δ
  std::size_t burn_in_budget = 100'000;
  bool uniqueness_probe = true;
  std::optional<Element> second_start;   // defaults to a domain sample
  std::uint64_t seed = 0;
};

/// Sampled estimate of the best k in ρ(c(Tx−Ty)) ≤ k·ρ(l(x−y)).
/// The certified k is k̂ inflated by `safety` (kept strictly below 1).
/// Throws PreconditionError when c ≤ l and Rejection (with the offending
/// pair as witness) when k̂ ≥ 1 or a pair has ρ(l(x−y)) = 0 < ρ(c(Tx−Ty)).
StrongContractionCertificate certify_strong(const Mapping& T, const ModularFunctional& rho, double c, double l,
                                            std::size_t pair_count, std::uint64_t seed, double safety = 0.01);

StrictContractionCertificate certify_strict(const Mapping& T, const ModularFunctional& rho, double c,
                                            std::size_t pair_count, std::uint64_t seed, double safety = 0.01);

/// For an s-convex modular, rewrites ρ(c(Tx−Ty)) ≤ k^s·ρ(l(x−y)) with
/// c > max(l, kl) into a strong certificate (c, l₀, (lk/l₀)^s) where
/// l₀ = (c + max(l, kl))/2.
StrongContractionCertificate reduce_s_convex_certificate(double s, double c, double k, double l);

/// ρ((c/2)(Tx − x)).
double residual(const ModularFunctional& rho, double c, const Element& x, const Element& Tx);

/// Picard iteration for a strong ρ-contraction.
///
/// With r = ρ(αl(Tx₀ − x₀)), the step residual ρ(c(T^{m+1}x₀ − T^m x₀)) is
/// bounded by k^m·r, and the distance to the fixed point by
/// ρ(c(z − T^m x₀)) ≤ k^m·r/(1−k). The loop stops at the first m where the
/// latter bound is ≤ tol and then checks ρ((c/2)(Tz − z)) ≤ tol.
FixedPointResult solve_strong(const Mapping& T, const ModularFunctional& rho,
                              const StrongContractionCertificate& cert, const Element& x0,
                              const StrongOptions& options = {});

/// Picard iteration for a strict ρ-contraction under a local Δ₂ condition.
///
/// Advances x₀ along its orbit until r = ρ(2c(Tx₀−x₀)) ≤ r_target, picks the
/// smallest p₀ with k^{p₀} ≤ δ/(M + r + Lδ), then iterates S = T^{p₀} with
/// k₀ = k^{p₀}, recording ρ(c(Sⁿx₀ − x₀)) against (1−(Lk₀)ⁿ)/(1−Lk₀)·(M + r).
/// Rows over that envelope are flagged in the trace, not thrown.
FixedPointResult solve_strict_delta2(const Mapping& T, const ModularFunctional& rho,
                                     const StrictContractionCertificate& cert, const Delta2Certificate& d2,
                                     const Element& x0, const StrictOptions& options = {});

/// Smallest p ≥ 1 with k^p ≤ δ/(M + r + Lδ).
std::size_t strict_power(double k, double delta, double L, double M, double r);

}  // namespace modfix
