#include "modfix/problems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "modfix/errors.hpp"

namespace modfix {

namespace {

double param(const Params& params, const std::string& key, const std::string& owner) {
  auto it = params.find(key);
  if (it == params.end()) throw PreconditionError(owner + " needs parameter '" + key + "'");
  if (!std::isfinite(it->second)) throw PreconditionError(owner + ": parameter '" + key + "' is not finite");
  return it->second;
}

double param_or(const Params& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

}  // namespace

// ---------------------------------------------------------------------------

Mapping make_affine_map(const AffineMapSpec& spec) {
  const auto n = spec.A.rows();
  if (n == 0 || spec.A.cols() != n) throw PreconditionError("affine map: A must be square and nonempty");
  if (spec.b.size() != n) {
    std::ostringstream msg;
    msg << "affine map: A is " << n << "x" << n << " but b has dimension " << spec.b.size();
    throw PreconditionError(msg.str());
  }
  if (spec.lo.has_value() != spec.hi.has_value()) throw PreconditionError("affine map: box needs both lo and hi");

  DomainDescriptor domain = DomainDescriptor::whole_space(static_cast<std::size_t>(n));
  if (spec.lo) {
    if (spec.lo->size() != n || spec.hi->size() != n) throw PreconditionError("affine map: box dimension mismatch");
    domain = DomainDescriptor::box(*spec.lo, *spec.hi);
  }
  const Matrix A = spec.A;
  const Vector b = spec.b;
  Mapping T("affine", domain, [A, b](const Element& x) { return Element(Vector(A * x.coords() + b), x.grid()); });
  T.with_affine({A, b});
  if (spec.lo && count_self_map_violations(T, 1000, 0) > 0)
    throw PreconditionError("affine map does not send the declared box into itself");
  return T;
}

double spectral_radius(const Matrix& A) {
  if (A.rows() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> solver(A, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix rotation_matrix(double theta, std::size_t n) {
  if (n == 0 || n % 2 != 0) throw PreconditionError("rotation map needs an even dimension");
  Matrix R = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double c = std::cos(theta), s = std::sin(theta);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); i += 2) {
    R(i, i) = c;
    R(i, i + 1) = -s;
    R(i + 1, i) = s;
    R(i + 1, i + 1) = c;
  }
  return R;
}

Mapping make_rotation_map(double theta, const Vector& b) {
  const Matrix R = rotation_matrix(theta, static_cast<std::size_t>(b.size()));
  Mapping T("rotation", DomainDescriptor::whole_space(static_cast<std::size_t>(b.size())),
            [R, b](const Element& x) { return Element(Vector(R * x.coords() + b), x.grid()); });
  T.with_affine({R, b});
  return T;
}

// ---------------------------------------------------------------------------
// Registries

Kernel make_kernel(const std::string& name, const Params& params) {
  Kernel k{name, params, {}, 0.0};
  if (name == "zero") {
    k.fn = [](double, double) { return 0.0; };
  } else if (name == "constant") {
    const double kappa = param(params, "kappa", "kernel constant");
    k.fn = [kappa](double, double) { return kappa; };
    k.sup_abs = std::abs(kappa);
  } else if (name == "exp_decay") {
    const double kappa = param(params, "kappa", "kernel exp_decay");
    const double rate = param(params, "rate", "kernel exp_decay");
    if (rate < 0.0) throw PreconditionError("kernel exp_decay: rate must be >= 0");
    k.fn = [kappa, rate](double t, double s) { return kappa * std::exp(-rate * (t - s)); };
    k.sup_abs = std::abs(kappa);
  } else {
    throw PreconditionError("unknown kernel '" + name + "'");
  }
  return k;
}

Nonlinearity make_nonlinearity(const std::string& name, const Params& params) {
  Nonlinearity f{name, params, {}, 1.0};
  if (name == "identity") {
    f.fn = [](double u) { return u; };
  } else if (name == "sin") {
    f.fn = [](double u) { return std::sin(u); };
  } else if (name == "tanh") {
    f.fn = [](double u) { return std::tanh(u); };
  } else if (name == "scaled") {
    const double a = param(params, "a", "nonlinearity scaled");
    f.fn = [a](double u) { return a * u; };
    f.lipschitz = std::abs(a);
  } else {
    throw PreconditionError("unknown nonlinearity '" + name + "'");
  }
  f.lipschitz = param_or(params, "lipschitz", f.lipschitz);
  return f;
}

Forcing make_forcing(const std::string& name, const Params& params) {
  Forcing g{name, params, {}};
  if (name == "zero") {
    g.fn = [](double) { return 0.0; };
  } else if (name == "constant") {
    const double v = param(params, "value", "forcing constant");
    g.fn = [v](double) { return v; };
  } else if (name == "linear") {
    const double a = param(params, "a", "forcing linear");
    const double b = param(params, "b", "forcing linear");
    g.fn = [a, b](double t) { return a + b * t; };
  } else if (name == "exp") {
    const double v = param(params, "value", "forcing exp");
    const double rate = param(params, "rate", "forcing exp");
    g.fn = [v, rate](double t) { return v * std::exp(rate * t); };
  } else {
    throw PreconditionError("unknown forcing '" + name + "'");
  }
  return g;
}

std::vector<std::string> kernel_names() { return {"zero", "constant", "exp_decay"}; }
std::vector<std::string> nonlinearity_names() { return {"identity", "sin", "tanh", "scaled"}; }
std::vector<std::string> forcing_names() { return {"zero", "constant", "linear", "exp"}; }

// ---------------------------------------------------------------------------
// Volterra

namespace {

void check_volterra(const VolterraSpec& spec) {
  if (spec.grid_size < 2) throw PreconditionError("volterra: grid size must be >= 2");
  if (!(spec.horizon > 0.0) || !std::isfinite(spec.horizon)) throw PreconditionError("volterra: horizon must be > 0");
  if (!spec.kernel.fn || !spec.nonlinearity.fn || !spec.forcing.fn)
    throw PreconditionError("volterra: kernel, nonlinearity and forcing are required");
}

double step(const VolterraSpec& spec) { return spec.horizon / static_cast<double>(spec.grid_size); }

std::string grid_tag(const VolterraSpec& spec) {
  std::ostringstream tag;
  tag << "grid[0," << spec.horizon << "]:" << spec.grid_size;
  return tag.str();
}

void verify_lipschitz(const Nonlinearity& f) {
  double worst = 0.0;
  for (int i = -400; i < 400; ++i) {
    const double u = i * 0.025, v = (i + 1) * 0.025;
    worst = std::max(worst, std::abs(f.fn(v) - f.fn(u)) / (v - u));
  }
  const Tolerance tol;
  if (!tol.le(worst, f.lipschitz)) {
    std::ostringstream msg;
    msg << "nonlinearity " << f.name << ": declared Lipschitz constant " << f.lipschitz
        << " is below the observed difference quotient " << worst;
    throw PreconditionError(msg.str());
  }
}

}  // namespace

std::vector<double> volterra_grid(const VolterraSpec& spec) {
  check_volterra(spec);
  const double h = step(spec);
  std::vector<double> t(spec.grid_size);
  for (std::size_t i = 0; i < spec.grid_size; ++i) t[i] = static_cast<double>(i) * h;
  return t;
}

ModularFunctional volterra_modular(const VolterraSpec& spec) {
  check_volterra(spec);
  return ModularFunctional::uniform(spec.grid_size, OrliczGenerator::power(1.0), step(spec));
}

Mapping make_volterra_operator(const VolterraSpec& spec) {
  check_volterra(spec);
  verify_lipschitz(spec.nonlinearity);
  const std::size_t m = spec.grid_size;
  const double h = step(spec);
  const std::vector<double> t = volterra_grid(spec);

  auto kernel = std::make_shared<Matrix>(Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)));
  Vector forcing(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    forcing[static_cast<Eigen::Index>(i)] = spec.forcing.fn(t[i]);
    if (!std::isfinite(forcing[static_cast<Eigen::Index>(i)]))
      throw PreconditionError("volterra: forcing is not finite at t = " + std::to_string(t[i]));
    for (std::size_t j = 0; j < i; ++j) {
      const double value = spec.kernel.fn(t[i], t[j]);
      if (!std::isfinite(value))
        throw PreconditionError("volterra: kernel evaluation failed at (" + std::to_string(t[i]) + ", " +
                                std::to_string(t[j]) + ")");
      (*kernel)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h * value;
    }
  }
  const auto f = spec.nonlinearity.fn;
  const std::string tag = grid_tag(spec);
  DomainDescriptor domain = DomainDescriptor::whole_space(m);
  domain.name = tag;
  return Mapping("volterra", domain, [kernel, forcing, f, tag](const Element& u) {
    Vector fu = u.coords().unaryExpr(f);
    return Element(Vector(forcing + kernel->triangularView<Eigen::StrictlyLower>() * fu), tag);
  });
}

VolterraConstants volterra_contraction(const VolterraSpec& spec) {
  check_volterra(spec);
  VolterraConstants out;
  const double lip_k = spec.nonlinearity.lipschitz * spec.kernel.sup_abs;
  out.continuous = lip_k * spec.horizon;
  out.strict_k = lip_k * step(spec) * static_cast<double>(spec.grid_size - 1);
  if (out.strict_k < 1.0) {
    const double root = std::sqrt(out.strict_k);
    out.strong = StrongContractionCertificate::make(1.0, root > 0.0 ? root : 0.5, root);
  }
  return out;
}

std::optional<Element> volterra_reference(const VolterraSpec& spec) {
  check_volterra(spec);
  if (spec.kernel.name != "constant" && spec.kernel.name != "zero") return std::nullopt;
  if (spec.nonlinearity.name != "identity") return std::nullopt;
  if (spec.forcing.name != "constant") return std::nullopt;
  const double kappa = spec.kernel.name == "zero" ? 0.0 : spec.kernel.params.at("kappa");
  const double g0 = spec.forcing.params.at("value");
  const std::vector<double> t = volterra_grid(spec);
  Element u = Element::zero(spec.grid_size, grid_tag(spec));
  for (std::size_t i = 0; i < t.size(); ++i) u[i] = g0 * std::exp(kappa * t[i]);
  return u;
}

// ---------------------------------------------------------------------------

OracleResult brute_force_fixed_point(const Mapping& T, OracleMethod method, std::size_t budget) {
  OracleResult out;
  if (method == OracleMethod::linear_solve) {
    if (!T.affine()) throw PreconditionError("linear_solve needs an affine mapping");
    const AffineForm& form = *T.affine();
    const Matrix M = Matrix::Identity(form.A.rows(), form.A.cols()) - form.A;
    Eigen::FullPivLU<Matrix> lu(M);
    if (!lu.isInvertible()) throw Rejection("no unique fixed point: I - A is singular");
    out.point = Element(Vector(lu.solve(form.b)));
    return out;
  }
  if (budget < 1) throw PreconditionError("dense_picard needs a budget >= 1");
  const std::size_t n = T.dimension();
  Element x = Element::zero(n);
  if (!T.domain().member(x)) {
    if (!T.domain().star_center) throw PreconditionError("dense_picard: 0 lies outside the domain and no center is set");
    x = *T.domain().star_center;
  }
  for (std::size_t i = 0; i < budget; ++i) {
    Element next = T(x);
    out.displacement = next.max_abs_diff(x);
    x = std::move(next);
  }
  out.point = std::move(x);
  out.iterations = budget;
  return out;
}

}  // namespace modfix
