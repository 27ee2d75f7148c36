#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>

#include "modfix/element.hpp"

namespace modfix {

/// The set B a mapping acts on.
struct DomainDescriptor {
  std::size_t dimension = 0;
  std::string name = "R^n";
  std::function<bool(const Element&)> contains;        // empty means "everything"
  std::function<Element(std::mt19937_64&)> sampler;    // draws points of B
  bool closed = true;
  bool convex = true;
  std::optional<Element> star_center;

  bool member(const Element& x) const;
  Element sample(std::mt19937_64& rng) const;

  static DomainDescriptor whole_space(std::size_t n);
  /// Axis-aligned box [lo, hi]; convex, closed, star-shaped about its midpoint.
  static DomainDescriptor box(const Vector& lo, const Vector& hi);
};

/// Checks the star-center invariant on sampled points: α·z + β·x ∈ B.
bool check_star_shaped(const DomainDescriptor& domain, std::size_t samples, std::uint64_t seed);

/// x ↦ A·x + b, kept alongside affine mappings so that linear-solve oracles
/// can recover it.
struct AffineForm {
  Matrix A;
  Vector b;
};

/// A self-map T: B → B. Every application checks that the argument lies in B
/// and that the image does too; a violation throws DomainViolation.
class Mapping {
 public:
  using Fn = std::function<Element(const Element&)>;

  Mapping(std::string name, DomainDescriptor domain, Fn fn);

  Element operator()(const Element& x) const;

  const std::string& name() const noexcept { return name_; }
  const DomainDescriptor& domain() const noexcept { return *domain_; }
  std::size_t dimension() const noexcept { return domain_->dimension; }

  const std::optional<AffineForm>& affine() const noexcept { return affine_; }
  Mapping& with_affine(AffineForm form);

  /// T^p (p ≥ 1).
  Mapping power(std::size_t p) const;

 private:
  std::string name_;
  std::shared_ptr<const DomainDescriptor> domain_;
  std::shared_ptr<const Fn> fn_;
  std::optional<AffineForm> affine_;
};

/// Number of sampled domain points whose image leaves the domain.
std::size_t count_self_map_violations(const Mapping& T, std::size_t samples, std::uint64_t seed);

}  // namespace modfix
