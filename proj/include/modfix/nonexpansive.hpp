#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "modfix/contraction.hpp"

namespace modfix {

/// Strictly increasing values in (0,1) tending to 1.
class Schedule {
 public:
  enum class Rule { harmonic, geometric, explicit_values };

  /// k_n = 1 − 1/(n+2), n = 0, 1, ...
  static Schedule harmonic(std::size_t length);
  /// k_n = 1 − 2^{−n}, n = 1, 2, ...
  static Schedule geometric(std::size_t length);
  static Schedule explicit_values(std::vector<double> values);
  static Schedule from_rule(const std::string& rule, std::size_t length);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  Rule rule() const noexcept { return rule_; }

 private:
  Schedule(Rule rule, std::vector<double> values);

  Rule rule_;
  std::vector<double> values_;
};

std::string to_string(Schedule::Rule rule);

struct NonexpansiveReport {
  double margin = 0.0;  // max over pairs of ρ(Tx−Ty) − ρ(x−y)
  bool passed = false;
  std::size_t pairs = 0;
  std::vector<Element> witness;
};

NonexpansiveReport certify_nonexpansive(const Mapping& T, const ModularFunctional& rho, std::size_t pair_count,
                                        std::uint64_t seed, Tolerance tol = {});

struct SegmentSolution {
  Element point;
  double residual = 0.0;  // ρ(x − ((1−β)z + βTx))
  std::size_t iterations = 0;
  double lambda = 0.0;
  double k = 0.0;         // Ŵ(λβ)
};

struct SegmentOptions {
  std::optional<Element> warm_start;
  std::size_t max_iter = 100'000'000;
};

/// Solves x = (1−β)z + βTx for a nonexpansive T.
///
/// With λ = (1 + 1/β)/2, the map Sx = (1−β)z + βTx satisfies
/// ρ(λ(Sx−Sy)) ≤ Ŵ(λβ)·ρ(x−y), a strong contraction with c = λ, l = 1,
/// which is handed to solve_strong.
SegmentSolution solve_segment(const Mapping& T, const Element& z, double beta, const ModularFunctional& rho,
                              const GrowthProfile& growth, double tol, const SegmentOptions& options = {});

struct ApproxRow {
  std::size_t n = 0;
  double k_n = 0.0;
  Element x;
  Element Tx;
  double residual = 0.0;  // ρ(Tx_n − x_n)
  double bound = 0.0;     // ρ(2(1−k_n)Tx_n) + ρ(2(1−k_n)z)
  double tau_term = 0.0;  // ρ(2(1−k_n)Tx_n)
  std::size_t iterations = 0;
};

struct ApproxFixedPointTrace {
  std::vector<ApproxRow> rows;
  bool reached_tol = false;
  /// ρ(2(1−k_n)Tx_n) is observed to decay along the run.
  bool tau_bounded_observed = false;

  std::size_t iterations() const;
  IterationTrace as_iteration_trace() const;
};

/// x_n = (1−k_n)z + k_n·Tx_n for each schedule value, warm-started from
/// x_{n−1}. Stops early once ρ(Tx_n − x_n) ≤ tol. A segment failure is
/// rethrown as Rejection naming the index, with the partial trace attached.
ApproxFixedPointTrace approximating_sequence(const Mapping& T, const Element& z, const Schedule& schedule,
                                             const ModularFunctional& rho, const GrowthProfile& growth, double tol);

struct SchauderOptions {
  std::size_t cluster_tail = 3;     // trace points the medoid is taken over
  double magnitude_cap = 1e8;       // ρ(Tx_n − z) beyond this counts as unbounded
  double inner_tol_fraction = 0.1;  // approximating-sequence tolerance relative to tol
};

/// Fixed point of a nonexpansive map on a closed star-shaped set.
///
/// Runs the approximating sequence from the domain's star center, checks that
/// {Tx_n} stays bounded (the finite-dimensional stand-in for compactness of
/// the closure of T(B)), takes the ρ-medoid y of the last few Tx_n and
/// certifies it through ρ((Ty−y)/3) ≤ 2ρ(Tx_n' − y) + ρ(Tx_n' − x_n').
/// Unbounded iterates throw Rejection("compactness surrogate violated").
FixedPointResult schauder_fixed_point(const Mapping& T, const DomainDescriptor& domain, const Schedule& schedule,
                                      const ModularFunctional& rho, const GrowthProfile& growth, double tol,
                                      const SchauderOptions& options = {});

struct HomotopyRow {
  std::size_t n = 0;
  double lambda = 0.0;
  Element x;
  double rho_x = 0.0;
  std::size_t iterations = 0;
};

struct HomotopyOptions {
  double sup_cap = 1e8;
  double inner_tol_fraction = 0.01;
  std::size_t max_iter = 1'000'000;
};

struct HomotopyResult {
  FixedPointResult result;
  std::vector<HomotopyRow> rows;
  double sup_rho = 0.0;

  /// ((λ_m − λ_n)/(λ_m(1−k)))·sup ρ(x_j), the Cauchy bound for m > n.
  double pair_bound(std::size_t n, std::size_t m) const;
  /// Recorded pairs (n < m) with ρ(x_m − x_n) above pair_bound.
  std::size_t pair_violations(const ModularFunctional& rho, Tolerance tol = {}) const;
};

/// Solves x_n = λ_n·Tx_n along the schedule for a strict ρ-contraction T
/// (ρ(Tx−Ty) ≤ kρ(x−y)) on a convex set containing 0, with ρ convex. Each
/// inner problem is a strong contraction with c = 1/λ_n, l = 1 and the same
/// k. Returns x_N once (1−λ_N)·sup ρ(x_j)/(1−k) ≤ tol.
HomotopyResult solve_by_homotopy(const Mapping& T, const ModularFunctional& rho, double k, const Schedule& schedule,
                                 double tol, const HomotopyOptions& options = {});

}  // namespace modfix
