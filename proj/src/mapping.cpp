#include "modfix/mapping.hpp"

#include <sstream>

#include "modfix/errors.hpp"
#include "modfix/modular.hpp"

namespace modfix {

bool DomainDescriptor::member(const Element& x) const {
  if (x.size() != dimension) return false;
  return !contains || contains(x);
}

Element DomainDescriptor::sample(std::mt19937_64& rng) const {
  if (sampler) return sampler(rng);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Element x = sample_element(dimension, rng);
    if (member(x)) return x;
  }
  throw PreconditionError("could not draw a sample from domain " + name);
}

DomainDescriptor DomainDescriptor::whole_space(std::size_t n) {
  DomainDescriptor d;
  d.dimension = n;
  d.name = "R^" + std::to_string(n);
  d.star_center = Element::zero(n);
  return d;
}

DomainDescriptor DomainDescriptor::box(const Vector& lo, const Vector& hi) {
  if (lo.size() != hi.size()) throw PreconditionError("box bounds have different dimensions");
  if ((lo.array() > hi.array()).any()) throw PreconditionError("box lower bound exceeds upper bound");
  DomainDescriptor d;
  d.dimension = static_cast<std::size_t>(lo.size());
  d.name = "box";
  d.contains = [lo, hi](const Element& x) {
    return (x.coords().array() >= lo.array()).all() && (x.coords().array() <= hi.array()).all();
  };
  d.sampler = [lo, hi](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Element x = Element::zero(static_cast<std::size_t>(lo.size()));
    for (Eigen::Index i = 0; i < lo.size(); ++i) x.coords()[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
    return x;
  };
  d.star_center = Element(Vector(0.5 * (lo + hi)));
  return d;
}

bool check_star_shaped(const DomainDescriptor& domain, std::size_t samples, std::uint64_t seed) {
  if (!domain.star_center) return false;
  const Element& z = *domain.star_center;
  if (!domain.member(z)) return false;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 0; k < samples; ++k) {
    const Element x = domain.sample(rng);
    const double a = unit(rng);
    if (!domain.member(a * z + (1.0 - a) * x)) return false;
  }
  return true;
}

Mapping::Mapping(std::string name, DomainDescriptor domain, Fn fn)
    : name_(std::move(name)),
      domain_(std::make_shared<const DomainDescriptor>(std::move(domain))),
      fn_(std::make_shared<const Fn>(std::move(fn))) {}

Element Mapping::operator()(const Element& x) const {
  const DomainDescriptor& d = *domain_;
  if (x.size() != d.dimension) {
    std::ostringstream msg;
    msg << name_ << ": argument has dimension " << x.size() << ", domain has " << d.dimension;
    throw PreconditionError(msg.str());
  }
  if (d.contains && !d.contains(x)) throw DomainViolation(name_ + ": argument outside domain " + d.name);
  Element y = (*fn_)(x);
  if (!d.member(y)) throw DomainViolation(name_ + ": image leaves domain " + d.name);
  return y;
}

Mapping& Mapping::with_affine(AffineForm form) {
  affine_ = std::move(form);
  return *this;
}

Mapping Mapping::power(std::size_t p) const {
  if (p == 0) throw PreconditionError("mapping power must be >= 1");
  if (p == 1) return *this;
  Mapping base = *this;
  Mapping out(name_ + "^" + std::to_string(p), *domain_, [base, p](const Element& x) {
    Element y = x;
    for (std::size_t i = 0; i < p; ++i) y = base(y);
    return y;
  });
  return out;
}

std::size_t count_self_map_violations(const Mapping& T, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::size_t bad = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const Element x = T.domain().sample(rng);
    try {
      T(x);
    } catch (const DomainViolation&) {
      ++bad;
    }
  }
  return bad;
}

}  // namespace modfix
