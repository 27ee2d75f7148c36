#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>

#include <Eigen/Dense>

namespace modfix {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point of the discretized modular space: a coordinate vector plus an
/// optional tag naming the discretization it lives on ("seq", "grid[0,1]:128").
/// Arithmetic keeps the tag of the left operand.
class Element {
 public:
  Element() = default;
  explicit Element(Vector coords, std::string grid = {})
      : coords_(std::move(coords)), grid_(std::move(grid)) {}
  Element(std::initializer_list<double> values) : coords_(static_cast<Eigen::Index>(values.size())) {
    Eigen::Index i = 0;
    for (double v : values) coords_[i++] = v;
  }

  static Element zero(std::size_t n, std::string grid = {}) {
    return Element(Vector::Zero(static_cast<Eigen::Index>(n)), std::move(grid));
  }
  static Element unit(std::size_t n, std::size_t i, double magnitude = 1.0) {
    Element e = zero(n);
    e.coords_[static_cast<Eigen::Index>(i)] = magnitude;
    return e;
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(coords_.size()); }
  double operator[](std::size_t i) const { return coords_[static_cast<Eigen::Index>(i)]; }
  double& operator[](std::size_t i) { return coords_[static_cast<Eigen::Index>(i)]; }

  const Vector& coords() const noexcept { return coords_; }
  Vector& coords() noexcept { return coords_; }
  const std::string& grid() const noexcept { return grid_; }

  Element& operator+=(const Element& o) {
    coords_ += o.coords_;
    return *this;
  }
  Element& operator-=(const Element& o) {
    coords_ -= o.coords_;
    return *this;
  }
  Element& operator*=(double a) {
    coords_ *= a;
    return *this;
  }

  friend Element operator+(Element a, const Element& b) { return a += b; }
  friend Element operator-(Element a, const Element& b) { return a -= b; }
  friend Element operator-(Element a) { return a *= -1.0; }
  friend Element operator*(double s, Element a) { return a *= s; }
  friend Element operator*(Element a, double s) { return a *= s; }

  /// Largest absolute coordinate difference.
  double max_abs_diff(const Element& o) const { return (coords_ - o.coords_).cwiseAbs().maxCoeff(); }

  friend bool operator==(const Element& a, const Element& b) {
    return a.coords_.size() == b.coords_.size() && a.coords_ == b.coords_;
  }

 private:
  Vector coords_;
  std::string grid_;
};

}  // namespace modfix
