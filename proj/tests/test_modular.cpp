#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

#include "modfix/errors.hpp"
#include "modfix/modular.hpp"

using namespace modfix;

TEST(Evaluate, ZeroVector) {
  const auto rho = ModularFunctional::uniform(2, OrliczGenerator::power(2.0));
  EXPECT_EQ(evaluate(rho, Element{0.0, 0.0}), 0.0);
}

TEST(Evaluate, SquaresSum) {
  const auto rho = ModularFunctional::uniform(2, OrliczGenerator::power(2.0));
  EXPECT_DOUBLE_EQ(evaluate(rho, Element{3.0, 4.0}), 25.0);
}

TEST(Evaluate, SquareRoots) {
  const auto rho = ModularFunctional::uniform(2, OrliczGenerator::power(0.5, 0.5));
  EXPECT_DOUBLE_EQ(evaluate(rho, Element{4.0, 9.0}), 5.0);
}

TEST(Evaluate, DimensionMismatchReportsBoth) {
  const auto rho = ModularFunctional::uniform(2, OrliczGenerator::power(2.0));
  try {
    evaluate(rho, Element{1.0, 2.0, 3.0});
    FAIL() << "expected PreconditionError";
  } catch (const PreconditionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('2'), std::string::npos);
    EXPECT_NE(msg.find('3'), std::string::npos);
  }
}

TEST(Evaluate, ExponentialOverflowIsAnError) {
  const auto rho = ModularFunctional::uniform(1, OrliczGenerator::exponential());
  EXPECT_THROW(evaluate(rho, Element{1000.0}), ModularOverflow);
}

TEST(Generator, ExponentialSmallArgumentIsAccurate) {
  const auto phi = OrliczGenerator::exponential();
  const double t = 1e-5;
  // Taylor oracle: t²/2 + t³/6 + t⁴/24.
  EXPECT_NEAR(phi(t), t * t / 2 + t * t * t / 6 + t * t * t * t / 24, 1e-24);
  EXPECT_NEAR(phi(2.0), std::exp(2.0) - 3.0, 1e-15);
}

TEST(Generator, PiecewiseInterpolatesAndExtends) {
  const auto phi = OrliczGenerator::piecewise_linear({{0, 0}, {1, 2}, {3, 3}});
  EXPECT_DOUBLE_EQ(phi(0.5), 1.0);
  EXPECT_DOUBLE_EQ(phi(2.0), 2.5);
  EXPECT_DOUBLE_EQ(phi(5.0), 4.0);
}

TEST(Generator, PiecewiseMustStartAtOrigin) {
  EXPECT_THROW(OrliczGenerator::piecewise_linear({{0, 1}, {1, 2}}), PreconditionError);
}

TEST(Generator, PowerExponentBelowS) { EXPECT_THROW(OrliczGenerator::power(0.5, 1.0), PreconditionError); }

TEST(Modular, RejectsNonPositiveWeights) {
  EXPECT_THROW(ModularFunctional({{-1.0, OrliczGenerator::power(2.0)}}), PreconditionError);
  EXPECT_THROW(ModularFunctional({{0.0, OrliczGenerator::power(2.0)}}), PreconditionError);
}

// ---------------------------------------------------------------------------

TEST(Axioms, PowerTwoPasses) {
  const auto rho = ModularFunctional::weighted({1.0, 2.0, 0.5}, OrliczGenerator::power(2.0));
  const AxiomReport report = verify_modular_axioms(rho, 1000, 1);
  EXPECT_TRUE(report.all_passed());
  for (const char* name : {"zero", "symmetry", "subadditivity", "monotonicity", "s_convexity"})
    EXPECT_NE(report.find(name), nullptr) << name;
}

TEST(Axioms, NegativeWeightFailsZeroWithWitness) {
  const auto rho = ModularFunctional::unchecked({{1.0, OrliczGenerator::power(2.0)}, {-3.0, OrliczGenerator::power(2.0)}});
  const AxiomReport report = verify_modular_axioms(rho, 200, 1);
  const AxiomCheck* zero = report.find("zero");
  ASSERT_NE(zero, nullptr);
  EXPECT_FALSE(zero->passed);
  ASSERT_FALSE(zero->witness.empty());
  EXPECT_LT(rho.evaluate_unchecked(zero->witness.front()), 0.0);
}

TEST(Axioms, NonMonotoneTableFailsMonotonicity) {
  const auto phi = OrliczGenerator::piecewise_linear({{0, 0}, {1, 2}, {2, 1}, {3, 4}});
  const auto rho = ModularFunctional::uniform(2, phi);
  const AxiomReport report = verify_modular_axioms(rho, 200, 1);
  const AxiomCheck* mono = report.find("monotonicity");
  ASSERT_NE(mono, nullptr);
  EXPECT_FALSE(mono->passed);
  EXPECT_FALSE(mono->witness.empty());
  EXPECT_GT(mono->worst_violation, 0.0);
}

TEST(Axioms, WrongSDeclarationIsCaught) {
  // Concave table declared convex: φ(0.5·2) = 3 > 0.5·φ(2) = 1.75.
  const auto phi = OrliczGenerator::piecewise_linear({{0, 0}, {1, 3}, {2, 3.5}}, 1.0);
  const AxiomReport report = verify_modular_axioms(ModularFunctional::uniform(1, phi), 200, 1);
  EXPECT_FALSE(report.find("s_convexity")->passed);
  EXPECT_TRUE(report.find("monotonicity")->passed);
}

// ---------------------------------------------------------------------------

TEST(Growth, PowerIsTToTheP) {
  for (double p : {0.5, 1.0, 2.0, 3.0}) {
    const auto rho = ModularFunctional::weighted({1.0, 4.0}, OrliczGenerator::power(p));
    for (double t : {0.0, 0.1, 0.37, 0.5, 0.9, 0.999}) {
      EXPECT_NEAR(growth_function_estimate(rho, t, 300, 3).estimate, std::pow(t, p), 1e-12) << p << " " << t;
    }
  }
}

TEST(Growth, ZeroAtZero) {
  const auto rho = ModularFunctional::uniform(3, OrliczGenerator::exponential());
  EXPECT_EQ(growth_function_estimate(rho, 0.0, 100, 1).estimate, 0.0);
}

TEST(Growth, MixedModularTakesLargestAxisRatio) {
  const auto rho = ModularFunctional({{1.0, OrliczGenerator::power(1.0)}, {1.0, OrliczGenerator::power(3.0)}});
  const GrowthSample g = growth_function_estimate(rho, 0.5, 300, 3);
  // Brute force over axis witnesses: max(0.5¹, 0.5³).
  EXPECT_GE(g.estimate, 0.5 - 1e-12);
  EXPECT_LE(g.estimate, 0.5 + 1e-12);
  EXPECT_NE(g.witness[0], 0.0);
}

TEST(Growth, RejectsTOutsideUnitInterval) {
  const auto rho = ModularFunctional::uniform(1, OrliczGenerator::power(2.0));
  EXPECT_THROW(growth_function_estimate(rho, 1.0, 10, 1), PreconditionError);
  EXPECT_THROW(growth_function_estimate(rho, -0.1, 10, 1), PreconditionError);
}

TEST(RegularGrowth, PowerModularsPass) {
  const std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 0.99};
  for (double p : {1.0, 2.0}) {
    const GrowthProfile profile = check_regular_growth(ModularFunctional::uniform(2, OrliczGenerator::power(p)), grid, 200);
    EXPECT_TRUE(profile.regular_growth_ok);
    for (const auto& s : profile.samples) EXPECT_NEAR(s.estimate, std::pow(s.t, p), 1e-12);
    ASSERT_TRUE(profile.s.has_value());
  }
}

TEST(RegularGrowth, FlatGeneratorFails) {
  // φ(t) = min(1, t): a witness with every |x_i| ≥ 1/0.99 has ρ(0.99x) = ρ(x).
  const auto phi = OrliczGenerator::piecewise_linear({{0, 0}, {1, 1}, {2, 1}});
  const auto rho = ModularFunctional::uniform(2, phi);
  const GrowthProfile profile = check_regular_growth(rho, {0.5, 0.99}, 200);
  EXPECT_FALSE(profile.regular_growth_ok);
  EXPECT_NEAR(profile.samples.back().estimate, 1.0, 1e-12);
}

TEST(RegularGrowth, EstimatesMonotoneAndBounded) {
  const auto rho = ModularFunctional({{1.0, OrliczGenerator::exponential()},
                                      {0.5, OrliczGenerator::piecewise_linear({{0, 0}, {1, 0.5}, {2, 3}})}});
  std::vector<double> grid;
  for (int i = 0; i < 40; ++i) grid.push_back(i / 40.0);
  const GrowthProfile profile = check_regular_growth(rho, grid, 300, 5);
  for (std::size_t i = 0; i < profile.samples.size(); ++i) {
    EXPECT_LE(profile.samples[i].estimate, 1.0);
    if (i > 0) {
      EXPECT_GE(profile.samples[i].estimate, profile.samples[i - 1].estimate);
    }
  }
}

// ---------------------------------------------------------------------------

TEST(Delta2, PowerGivesTwoToTheP) {
  for (double p : {1.0, 2.0, 3.0}) {
    for (double delta : {0.1, 1.0, 10.0}) {
      const auto cert = estimate_delta2(ModularFunctional::uniform(3, OrliczGenerator::power(p)), delta, 500, 2);
      EXPECT_TRUE(cert.valid);
      EXPECT_NEAR(cert.L, std::pow(2.0, p), 1e-6);
      EXPECT_EQ(cert.M, 0.0);
      EXPECT_LE(cert.empirical_margin, 0.0);
    }
  }
}

TEST(Delta2, ExponentialNearZeroIsAboutFour) {
  const double delta = 0.01;
  const auto rho = ModularFunctional::uniform(4, OrliczGenerator::exponential());
  const auto cert = estimate_delta2(rho, delta, 2000, 4);
  ASSERT_TRUE(cert.valid);
  // Oracle: φ(2t)/φ(t) is increasing, so its sup over the admissible range
  // sits at the t with φ(t) = δ.
  auto phi = [](double t) { return std::expm1(t) - t; };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) <= delta ? lo : hi) = mid;
  }
  const double oracle = phi(2 * lo) / phi(lo);
  EXPECT_GE(cert.L, 4.0);
  EXPECT_LE(cert.L, oracle * (1 + 1e-6));
  EXPECT_NEAR(cert.L, oracle, 1e-3);
}

TEST(Delta2, RejectsNonPositiveDelta) {
  EXPECT_THROW(estimate_delta2(ModularFunctional::uniform(1, OrliczGenerator::power(2.0)), 0.0, 10, 1),
               PreconditionError);
}

TEST(Delta2, ReplayOnFreshSeedPasses) {
  const auto rho = ModularFunctional::weighted({1.0, 3.0}, OrliczGenerator::power(2.5));
  const auto cert = estimate_delta2(rho, 1.0, 500, 1);
  for (std::uint64_t seed = 10; seed < 20; ++seed) EXPECT_TRUE(replay_delta2(rho, cert, 500, seed));
}

TEST(Delta2, UnderstatedLFailsReplay) {
  const auto rho = ModularFunctional::uniform(2, OrliczGenerator::power(2.0));
  Delta2Certificate cert;
  cert.delta = 1.0;
  cert.L = 3.0;
  cert.valid = true;
  EXPECT_FALSE(replay_delta2(rho, cert, 200, 1));
}

// ---------------------------------------------------------------------------

TEST(Properties, PowerHomogeneityAndScalarMonotonicity) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unit(0.0, 3.0);
  for (double p : {0.5, 1.0, 2.0, 3.0}) {
    const auto rho = ModularFunctional::weighted({0.7, 1.0, 2.0, 5.0}, OrliczGenerator::power(p));
    for (int i = 0; i < 200; ++i) {
      const Element x = sample_element(4, rng);
      const double t1 = unit(rng), t2 = t1 + unit(rng);
      const double base = evaluate(rho, x);
      EXPECT_NEAR(evaluate(rho, t1 * x), std::pow(t1, p) * base, 1e-12 * std::max(1.0, std::pow(t1, p) * base));
      EXPECT_LE(evaluate(rho, t1 * x), evaluate(rho, t2 * x));
    }
  }
}

TEST(Properties, ScaleToLevelHitsTarget) {
  const auto rho = ModularFunctional::uniform(3, OrliczGenerator::exponential());
  const Element u{1.0, -2.0, 0.5};
  const double lambda = scale_to_level(rho, u, 0.3);
  EXPECT_NEAR(evaluate(rho, lambda * u), 0.3, 1e-9);
}
