#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modfix/contraction.hpp"
#include "modfix/element.hpp"
#include "modfix/mapping.hpp"
#include "modfix/modular.hpp"

namespace modfix {

// ---------------------------------------------------------------------------
// Affine and rotation families

struct AffineMapSpec {
  Matrix A;
  Vector b;
  std::optional<Vector> lo;  // box bounds; both or neither
  std::optional<Vector> hi;
};

/// x ↦ Ax + b on the declared box (or all of ℝⁿ). A box that is not mapped
/// into itself on 10³ samples is rejected with PreconditionError.
Mapping make_affine_map(const AffineMapSpec& spec);

/// Largest eigenvalue modulus.
double spectral_radius(const Matrix& A);

/// Block-diagonal matrix of n/2 planar rotations by theta. n must be even.
Matrix rotation_matrix(double theta, std::size_t n);

/// x ↦ R_θ x + b on ℝⁿ (n even); an isometry for the p = 2 power modular.
Mapping make_rotation_map(double theta, const Vector& b);

// ---------------------------------------------------------------------------
// Discretized Volterra operator  u(t) = g(t) + ∫₀ᵗ K(t,s) f(u(s)) ds

using Params = std::map<std::string, double>;

struct Kernel {
  std::string name;
  Params params;
  std::function<double(double, double)> fn;
  double sup_abs = 0.0;  // sup of |K| over the triangle 0 ≤ s ≤ t
};

struct Nonlinearity {
  std::string name;
  Params params;
  std::function<double(double)> fn;
  double lipschitz = 0.0;  // declared
};

struct Forcing {
  std::string name;
  Params params;
  std::function<double(double)> fn;
};

/// Registries. Kernels: zero, constant{kappa}, exp_decay{kappa, rate}.
/// Nonlinearities: identity, sin, tanh, scaled{a}.
/// Forcings: zero, constant{value}, linear{a, b} (a + b·t), exp{value, rate}.
/// Unknown names or missing parameters throw PreconditionError.
Kernel make_kernel(const std::string& name, const Params& params = {});
Nonlinearity make_nonlinearity(const std::string& name, const Params& params = {});
Forcing make_forcing(const std::string& name, const Params& params = {});

std::vector<std::string> kernel_names();
std::vector<std::string> nonlinearity_names();
std::vector<std::string> forcing_names();

struct VolterraSpec {
  double horizon = 1.0;      // A
  std::size_t grid_size = 0; // m
  Kernel kernel;
  Nonlinearity nonlinearity;
  Forcing forcing;
};

/// t_i = i·h, h = A/m, i = 0..m−1.
std::vector<double> volterra_grid(const VolterraSpec& spec);

/// ρ(u) = Σ h·|u_i|, the p = 1 power modular with quadrature weights.
ModularFunctional volterra_modular(const VolterraSpec& spec);

/// (Tu)_i = g(t_i) + h·Σ_{j<i} K(t_i, t_j)·f(u_j).
///
/// Checks the grid size (≥ 2), evaluates K at every node pair (a non-finite
/// value throws PreconditionError) and verifies the declared Lipschitz
/// constant of f on a sample grid.
Mapping make_volterra_operator(const VolterraSpec& spec);

struct VolterraConstants {
  double continuous = 0.0;  // Lip(f)·sup|K|·A
  /// ρ(Tu−Tv) ≤ k·ρ(u−v) under volterra_modular: k = Lip(f)·sup|K|·h·(m−1).
  double strict_k = 0.0;
  /// Strong form (c = 1, l = √k, k = √k), available when strict_k < 1.
  std::optional<StrongContractionCertificate> strong;
};

/// Contraction constants for the p = 1 weighted modular. Other generators
/// have no translation of the sup-norm bound and are not covered.
VolterraConstants volterra_contraction(const VolterraSpec& spec);

/// g₀·e^{κt} on the grid for the constant-kernel, identity, constant-forcing
/// case; nullopt otherwise.
std::optional<Element> volterra_reference(const VolterraSpec& spec);

// ---------------------------------------------------------------------------
// Oracles

enum class OracleMethod { linear_solve, dense_picard };

struct OracleResult {
  Element point;
  double displacement = 0.0;  // max |x_budget − x_{budget−1}| for dense_picard, 0 for linear_solve
  std::size_t iterations = 0;
};

/// linear_solve: (I−A)^{−1}b for affine mappings, Rejection("no unique fixed
/// point") when I−A is singular. dense_picard: `budget` plain iterations from
/// 0 (or the domain's star center when 0 lies outside it).
OracleResult brute_force_fixed_point(const Mapping& T, OracleMethod method, std::size_t budget = 10000);

}  // namespace modfix
