#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "modfix/errors.hpp"
#include "modfix/nonexpansive.hpp"
#include "modfix/problems.hpp"

using namespace modfix;

namespace {

ModularFunctional squares(std::size_t n = 2) { return ModularFunctional::uniform(n, OrliczGenerator::power(2.0)); }

std::vector<double> growth_grid() {
  std::vector<double> t;
  for (int i = 0; i < 20; ++i) t.push_back(0.05 * i);
  t.push_back(0.99);
  return t;
}

GrowthProfile growth_of(const ModularFunctional& rho) { return check_regular_growth(rho, growth_grid(), 300, 1); }

Mapping linear(const Matrix& A, const Vector& b) { return make_affine_map({A, b, std::nullopt, std::nullopt}); }

Mapping translation(const Vector& b) { return linear(Matrix::Identity(b.size(), b.size()), b); }

// x = (1−β)z + β(Ax + b), solved directly.
Vector segment_oracle(const Matrix& A, const Vector& b, const Vector& z, double beta) {
  const Matrix M = Matrix::Identity(A.rows(), A.cols()) - beta * A;
  return M.fullPivLu().solve((1 - beta) * z + beta * b);
}

}  // namespace

// ---------------------------------------------------------------------------

TEST(Schedule, Rules) {
  const auto h = Schedule::harmonic(3);
  EXPECT_DOUBLE_EQ(h[0], 0.5);
  EXPECT_DOUBLE_EQ(h[2], 0.75);
  const auto g = Schedule::geometric(3);
  EXPECT_DOUBLE_EQ(g[0], 0.5);
  EXPECT_DOUBLE_EQ(g[2], 0.875);
  EXPECT_EQ(Schedule::from_rule("harmonic", 4).rule(), Schedule::Rule::harmonic);
  EXPECT_EQ(Schedule::geometric(52).size(), 52u);
}

TEST(Schedule, Validation) {
  EXPECT_THROW(Schedule::explicit_values({}), PreconditionError);
  EXPECT_THROW(Schedule::explicit_values({0.5, 0.5}), PreconditionError);
  EXPECT_THROW(Schedule::explicit_values({0.9, 0.5}), PreconditionError);
  EXPECT_THROW(Schedule::explicit_values({0.0, 0.5}), PreconditionError);
  EXPECT_THROW(Schedule::explicit_values({0.5, 1.0}), PreconditionError);
  EXPECT_THROW(Schedule::geometric(53), PreconditionError);
  EXPECT_THROW(Schedule::from_rule("cubic", 4), PreconditionError);
}

// ---------------------------------------------------------------------------

TEST(CertifyNonexpansive, RotationIsAnIsometry) {
  const auto report = certify_nonexpansive(make_rotation_map(0.7, Vector::Zero(2)), squares(), 500, 2);
  EXPECT_TRUE(report.passed);
  EXPECT_NEAR(report.margin, 0.0, 1e-9);
}

TEST(CertifyNonexpansive, ShrinkPassesWithNegativeMargin) {
  const auto report = certify_nonexpansive(linear(0.5 * Matrix::Identity(2, 2), Vector::Zero(2)), squares(), 200, 2);
  EXPECT_TRUE(report.passed);
  EXPECT_LT(report.margin, 0.0);
}

TEST(CertifyNonexpansive, StretchFailsWithWitness) {
  const auto report = certify_nonexpansive(linear(2.0 * Matrix::Identity(2, 2), Vector::Zero(2)), squares(), 200, 2);
  EXPECT_FALSE(report.passed);
  EXPECT_GT(report.margin, 0.0);
  EXPECT_EQ(report.witness.size(), 2u);
}

// ---------------------------------------------------------------------------

TEST(Segment, ShrinkAgainstOracle) {
  const auto rho = squares();
  const Matrix A = 0.5 * Matrix::Identity(2, 2);
  const Vector z{{0.6, 0.3}};
  // x = 0.5z + 0.25x gives x = (2/3)z = (0.4, 0.2).
  const auto sol = solve_segment(linear(A, Vector::Zero(2)), Element(z), 0.5, rho, growth_of(rho), 1e-16);
  EXPECT_NEAR(sol.point[0], 0.4, 1e-7);
  EXPECT_NEAR(sol.point[1], 0.2, 1e-7);
  EXPECT_LE(sol.residual, 1e-16);
  EXPECT_DOUBLE_EQ(sol.lambda, 1.5);
  EXPECT_NEAR(sol.k, 0.5625, 1e-9);  // Ŵ(0.75) = 0.75² for p = 2
}

TEST(Segment, RotationAgainstOracle) {
  const auto rho = squares();
  const Matrix R = rotation_matrix(1.1, 2);
  const Vector b{{0.3, -0.2}}, z{{1.0, 2.0}};
  for (double beta : {0.1, 0.5, 0.9, 0.99}) {
    const auto sol = solve_segment(make_rotation_map(1.1, b), Element(z), beta, rho, growth_of(rho), 1e-20);
    const Vector x = segment_oracle(R, b, z, beta);
    EXPECT_LE((sol.point.coords() - x).cwiseAbs().maxCoeff(), 1e-8) << beta;
  }
}

TEST(Segment, IdentityReturnsCenter) {
  const auto rho = squares();
  const Element z{1.5, -0.5};
  const auto sol = solve_segment(linear(Matrix::Identity(2, 2), Vector::Zero(2)), z, 0.7, rho, growth_of(rho), 1e-14);
  EXPECT_LE((sol.point.coords() - z.coords()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Segment, ConstantMap) {
  const auto rho = squares();
  const Vector b{{2.0, 1.0}}, z{{0.0, 4.0}};
  const auto sol = solve_segment(linear(Matrix::Zero(2, 2), b), Element(z), 0.25, rho, growth_of(rho), 1e-16);
  EXPECT_NEAR(sol.point[0], 0.5, 1e-8);
  EXPECT_NEAR(sol.point[1], 3.25, 1e-8);
}

TEST(Segment, Preconditions) {
  const auto rho = squares();
  const auto g = growth_of(rho);
  const Mapping T = linear(Matrix::Identity(2, 2), Vector::Zero(2));
  EXPECT_THROW(solve_segment(T, Element{0.0, 0.0}, 0.0, rho, g, 1e-10), PreconditionError);
  EXPECT_THROW(solve_segment(T, Element{0.0, 0.0}, 1.0, rho, g, 1e-10), PreconditionError);
  EXPECT_THROW(solve_segment(T, Element{0.0, 0.0}, 0.5, rho, g, 0.0), PreconditionError);
  GrowthProfile bad = g;
  bad.regular_growth_ok = false;
  EXPECT_THROW(solve_segment(T, Element{0.0, 0.0}, 0.5, rho, bad, 1e-10), PreconditionError);
}

// ---------------------------------------------------------------------------

TEST(ApproximatingSequence, IdentityStaysAtCenter) {
  const auto rho = squares();
  const Element z{1.0, -2.0};
  const auto trace = approximating_sequence(linear(Matrix::Identity(2, 2), Vector::Zero(2)), z,
                                            Schedule::geometric(8), rho, growth_of(rho), 1e-12);
  ASSERT_FALSE(trace.rows.empty());
  EXPECT_TRUE(trace.reached_tol);
  EXPECT_LE(trace.rows.back().residual, 1e-12);
}

TEST(ApproximatingSequence, RotationResidualsFollowClosedForm) {
  const auto rho = squares();
  const Matrix R = rotation_matrix(0.9, 2);
  const Vector b{{0.5, 0.0}}, z{{3.0, -1.0}};
  const auto trace = approximating_sequence(make_rotation_map(0.9, b), Element(z), Schedule::harmonic(12), rho,
                                            growth_of(rho), 1e-30);
  ASSERT_EQ(trace.rows.size(), 12u);
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const auto& row = trace.rows[i];
    const Vector x = segment_oracle(R, b, z, row.k_n);
    const Vector r = R * x + b - x;
    EXPECT_NEAR(row.residual, r.squaredNorm(), 1e-8 + 1e-6 * r.squaredNorm()) << i;
    if (i > 0) {
      EXPECT_LT(row.residual, trace.rows[i - 1].residual) << i;
    }
    EXPECT_LE(row.residual, row.bound * (1 + 1e-9) + 1e-12) << i;
  }
  EXPECT_TRUE(trace.tau_bounded_observed);
}

TEST(ApproximatingSequence, ZeroCenterDropsSecondTerm) {
  const auto rho = squares();
  const auto trace = approximating_sequence(make_rotation_map(0.4, Vector{{1.0, 1.0}}), Element{0.0, 0.0},
                                            Schedule::geometric(6), rho, growth_of(rho), 1e-14);
  for (const auto& row : trace.rows) EXPECT_DOUBLE_EQ(row.bound, row.tau_term);
}

TEST(ApproximatingSequence, AsIterationTraceKeepsRows) {
  const auto rho = squares();
  const auto trace = approximating_sequence(make_rotation_map(0.4, Vector::Zero(2)), Element{1.0, 0.0},
                                            Schedule::geometric(5), rho, growth_of(rho), 1e-30);
  const auto it = trace.as_iteration_trace();
  EXPECT_EQ(it.rows.size(), trace.rows.size());
  EXPECT_EQ(it.scheme, "approx_schedule");
}

// ---------------------------------------------------------------------------

TEST(Schauder, RotationReachesTolerance) {
  const auto rho = squares();
  const Vector b{{0.5, 0.5}};
  const Mapping T = make_rotation_map(0.8, b);
  const double tol = 1e-6;
  const auto r = schauder_fixed_point(T, T.domain(), Schedule::geometric(30), rho, growth_of(rho), tol);
  EXPECT_TRUE(r.converged) << r.status;
  const Vector fixed = (Matrix::Identity(2, 2) - rotation_matrix(0.8, 2)).fullPivLu().solve(b);
  EXPECT_LE(evaluate(rho, Element(Vector(r.point.coords() - fixed))), 10 * tol);
  EXPECT_LE(evaluate(rho, T(r.point) - r.point), 10 * tol);
}

TEST(Schauder, TranslationIsRejected) {
  const auto rho = squares();
  const Mapping T = translation(Vector{{1.0, 0.0}});
  try {
    schauder_fixed_point(T, T.domain(), Schedule::geometric(16), rho, growth_of(rho), 1e-6);
    FAIL() << "translation has no fixed point";
  } catch (const Rejection& e) {
    EXPECT_NE(std::string(e.what()).find("compactness surrogate violated"), std::string::npos) << e.what();
  }
}

TEST(Schauder, ClampedShiftOnABox) {
  // Shift right by 1 and clamp into [-1,2]×[-1,1]: the fixed points are the
  // right edge x₁ = 2.
  const Vector lo{{-1.0, -1.0}}, hi{{2.0, 1.0}};
  const DomainDescriptor box = DomainDescriptor::box(lo, hi);
  ASSERT_TRUE(box.star_center.has_value());
  EXPECT_DOUBLE_EQ((*box.star_center)[0], 0.5);
  EXPECT_DOUBLE_EQ((*box.star_center)[1], 0.0);
  const Mapping T("clamped_shift", box, [lo, hi](const Element& x) {
    Vector y = x.coords();
    y[0] += 1.0;
    return Element(Vector(y.cwiseMax(lo).cwiseMin(hi)));
  });
  const auto rho = squares();
  EXPECT_TRUE(certify_nonexpansive(T, rho, 300, 4).passed);
  const double tol = 1e-6;
  const auto r = schauder_fixed_point(T, box, Schedule::geometric(30), rho, growth_of(rho), tol);
  EXPECT_TRUE(r.converged) << r.status;
  EXPECT_TRUE(box.member(r.point));
  EXPECT_LE(evaluate(rho, T(r.point) - r.point), 10 * tol);
  EXPECT_NEAR(r.point[0], 2.0, 1e-2);
}

// ---------------------------------------------------------------------------

TEST(Homotopy, ZeroMapGivesZero) {
  const auto rho = squares();
  const auto h = solve_by_homotopy(linear(Matrix::Zero(2, 2), Vector::Zero(2)), rho, 0.5, Schedule::geometric(10),
                                   1e-10);
  EXPECT_TRUE(h.result.converged);
  EXPECT_EQ(evaluate(rho, h.result.point), 0.0);
}

TEST(Homotopy, ExplicitScheduleCauchyBound) {
  const auto rho = squares();
  const Mapping T = linear(0.5 * Matrix::Identity(2, 2), Vector{{1.0, 0.0}});
  const auto h = solve_by_homotopy(T, rho, 0.25, Schedule::explicit_values({0.9, 0.99}), 1e-12);
  ASSERT_EQ(h.rows.size(), 2u);
  // x = λ(0.5x + e₁) gives x₁ = λ/(1 − λ/2).
  for (const auto& row : h.rows) EXPECT_NEAR(row.x[0], row.lambda / (1 - row.lambda / 2), 1e-6);
  const double gap = evaluate(rho, h.rows[1].x - h.rows[0].x);
  EXPECT_LE(gap, h.pair_bound(0, 1));
  EXPECT_EQ(h.pair_violations(rho), 0u);
}

TEST(Homotopy, CauchyBoundsHoldAlongGeometricSchedule) {
  const auto rho = squares();
  const Mapping T = make_affine_map({Matrix{{0.3, 0.1}, {-0.1, 0.3}}, Vector{{1.0, -1.0}}, std::nullopt, std::nullopt});
  const auto h = solve_by_homotopy(T, rho, 0.2, Schedule::geometric(40), 1e-9);
  EXPECT_TRUE(h.result.converged) << h.result.status;
  EXPECT_EQ(h.pair_violations(rho), 0u);
  const Vector fixed = (Matrix::Identity(2, 2) - T.affine()->A).fullPivLu().solve(T.affine()->b);
  EXPECT_LE(evaluate(rho, Element(Vector(h.result.point.coords() - fixed))), 1e-9);
}

TEST(Homotopy, UnboundedSupIsRejected) {
  const auto rho = squares();
  const Mapping T = linear(0.5 * Matrix::Identity(2, 2), Vector{{1.0, 0.0}});
  HomotopyOptions options;
  options.sup_cap = 1.5;
  EXPECT_THROW(solve_by_homotopy(T, rho, 0.25, Schedule::geometric(10), 1e-9, options), Rejection);
}

TEST(Homotopy, Preconditions) {
  const Mapping T = linear(Matrix::Zero(2, 2), Vector::Zero(2));
  EXPECT_THROW(solve_by_homotopy(T, squares(), 1.0, Schedule::geometric(4), 1e-9), PreconditionError);
  EXPECT_THROW(solve_by_homotopy(T, squares(), 0.0, Schedule::geometric(4), 1e-9), PreconditionError);
  const auto concave = ModularFunctional::uniform(2, OrliczGenerator::power(0.5, 0.5));
  EXPECT_THROW(solve_by_homotopy(T, concave, 0.5, Schedule::geometric(4), 1e-9), PreconditionError);
}
