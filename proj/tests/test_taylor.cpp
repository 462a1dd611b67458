#include <gtest/gtest.h>

#include <random>

#include "golden.hpp"
#include "harsanyi/taylor.hpp"

using namespace harsanyi;

namespace {

PolynomialValueFunction golden_polynomial() {
  const std::vector<double> b{0.5, -1.0, 0.25, 2.0};
  return PolynomialValueFunction(b, 0.3,
                                 {{DegreeVector({1, 1, 0, 0}), 2.0},
                                  {DegreeVector({2, 0, 1, 0}), -1.5},
                                  {DegreeVector({0, 1, 1, 1}), 0.7},
                                  {DegreeVector({3, 0, 0, 0}), 0.4},
                                  {DegreeVector({1, 0, 0, 2}), 1.1}});
}

}  // namespace

TEST(ClosedForm, MatchesFrozenOracle) {
  const auto poly = golden_polynomial();
  const std::vector<double> x{1.5, 0.5, -0.75, 1.0};
  for (Mask s = 0; s < 16; ++s) {
    EXPECT_NEAR(harsanyi_closed_form(poly, VariableSet(s, 4), x), golden::kPolynomialEffects[s], 1e-12) << s;
  }
}

TEST(ClosedForm, EqualsLatticeTransformOnRandomPolynomials) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> deg(0, 3);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 3 + rep % 6;
    std::vector<double> b(n), x(n);
    for (int i = 0; i < n; ++i) {
      b[i] = g(rng);
      x[i] = g(rng);
    }
    std::vector<PolynomialTerm> terms;
    for (int k = 0; k < 15; ++k) {
      std::vector<int> kappa(n, 0);
      int total = 0;
      for (int& d : kappa) {
        d = std::min(deg(rng), 3 - total);
        total += d;
      }
      const DegreeVector dv(kappa);
      bool dup = dv.total() == 0;
      for (const auto& t : terms) dup = dup || t.degree == dv;
      if (!dup) terms.push_back({dv, g(rng)});
    }
    const PolynomialValueFunction poly(b, g(rng), terms);
    const auto effects = mobius_transform(polynomial_value_table(poly, x));
    for (Mask s = 0; s < effects.size(); ++s) {
      const double want = effects[s];
      EXPECT_LE(std::abs(harsanyi_closed_form(poly, VariableSet(s, n), x) - want),
                1e-8 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST(Polynomial, RejectsDuplicateTerms) {
  EXPECT_THROW(PolynomialValueFunction({0.0}, 0.0, {{DegreeVector({1}), 1.0}, {DegreeVector({1}), 2.0}}),
               DimensionError);
}

TEST(ShiftedBaseline, BothBranches) {
  const std::vector<double> mu{1.0};
  EXPECT_EQ(shifted_baseline(std::vector<double>{0.0}, {0.5, mu}), std::vector<double>{0.5});
  EXPECT_EQ(shifted_baseline(std::vector<double>{2.0}, {0.5, mu}), std::vector<double>{1.5});
  // tie goes to the lower side
  EXPECT_EQ(shifted_baseline(std::vector<double>{1.0}, {0.5, mu}), std::vector<double>{0.5});
}

TEST(StandardAnd, OneAtUnperturbedSample) {
  const std::vector<double> x{0.2, -0.4, 1.0}, mu{0.0, 0.0, 0.0};
  const auto b = shifted_baseline(x, {0.5, mu});
  EXPECT_DOUBLE_EQ(standard_and(DegreeVector({2, 1, 3}), x, x, b, 0.5), 1.0);
}

TEST(SecondMoment, MatchesExactGaussianIntegrals) {
  EXPECT_NEAR(predicted_second_moment(DegreeVector({2, 1, 0, 2}), 0.05, 0.5), golden::kSecondMoments[0], 1e-12);
  EXPECT_NEAR(predicted_second_moment(DegreeVector({1, 2, 2}), 0.02, 2.0), golden::kSecondMoments[1], 1e-12);
  EXPECT_NEAR(predicted_second_moment(DegreeVector({2}), 0.1, 0.5), golden::kSecondMoments[2], 1e-12);
  EXPECT_NEAR(predicted_second_moment(DegreeVector({1, 1, 1, 1, 1, 1}), 0.05, 0.5), std::pow(1.01, 6), 1e-12);
  EXPECT_EQ(predicted_second_moment(DegreeVector({2, 2}), 0.0, 0.5), 1.0);
}

TEST(SecondMoment, MonteCarloWithinThreeStandardErrors) {
  const std::vector<double> x{0.3, -0.2}, mu{0.0, 0.0};
  const auto b = shifted_baseline(x, {0.5, mu});
  const DegreeVector kappa({2, 1});
  const auto est = monte_carlo_moments(kappa, x, b, 0.5, {0.1, 20000, 4});
  const double want = predicted_second_moment(kappa, 0.1, 0.5);
  EXPECT_LE(std::abs(est.second.mean - want), 3.0 * est.second.std_error);
  // E[pi_hat] = (1 + delta^2 / tau^2) for this kappa
  EXPECT_LE(std::abs(est.first.mean - 1.04), 3.0 * est.first.std_error);
}

TEST(Substream, DependsOnEveryCoordinate) {
  EXPECT_EQ(substream(1, 2, 3)(), substream(1, 2, 3)());
  EXPECT_NE(substream(1, 2, 3)(), substream(1, 2, 4)());
  EXPECT_NE(substream(1, 2, 3)(), substream(1, 3, 3)());
  EXPECT_NE(substream(1, 2, 3)(), substream(2, 2, 3)());
}

namespace {

VarianceScanConfig scan_config(int n, double delta) {
  VarianceScanConfig c;
  c.perturbation = {delta, 8, 17};
  c.mu.assign(n, 0.0);
  c.orders = {1, 2, 3};
  return c;
}

}  // namespace

TEST(VarianceScan, LinearFunctionHasNoHigherOrderVariance) {
  auto linear = [](std::span<const double> x) { return 1.5 * x[0] - 2.0 * x[1] + 0.5 * x[3]; };
  const std::vector<std::vector<double>> samples{{0.1, 0.7, -0.3, 1.2}, {-1.0, 0.2, 0.4, 0.0}};
  const auto r = effect_variance_scan(linear, samples, scan_config(4, 0.05));
  EXPECT_GT(r.variance[0], 0.0);
  EXPECT_LE(r.variance[1], 1e-20);
  EXPECT_LE(r.variance[2], 1e-20);
}

TEST(VarianceScan, ZeroDeltaGivesZeroVariance) {
  auto fn = [](std::span<const double> x) { return std::exp(x[0] * x[1]) + x[2] * x[0]; };
  const std::vector<std::vector<double>> samples{{0.1, 0.7, -0.3}};
  const auto r = effect_variance_scan(fn, samples, scan_config(3, 0.0));
  for (double v : r.variance) EXPECT_EQ(v, 0.0);
}

TEST(VarianceScan, ThreadCountDoesNotChangeResult) {
  auto fn = [](std::span<const double> x) { return std::tanh(x[0] * x[1] * x[2]) + x[3]; };
  const std::vector<std::vector<double>> samples{{0.1, 0.7, -0.3, 1.0}, {0.4, -0.2, 0.9, 0.3}};
  auto c = scan_config(4, 0.05);
  const auto one = effect_variance_scan(fn, samples, c);
  c.threads = 3;
  EXPECT_EQ(one.variance, effect_variance_scan(fn, samples, c).variance);
}

TEST(VarianceScan, InputValidation) {
  auto fn = [](std::span<const double>) { return 0.0; };
  auto c = scan_config(2, 0.05);
  c.perturbation.trials = 1;
  EXPECT_THROW(effect_variance_scan(fn, {{0.0, 0.0}}, c), DimensionError);
  c = scan_config(2, 0.05);
  EXPECT_THROW(effect_variance_scan(fn, {{0.0, 0.0}}, c), DimensionError);  // order 3 > n
}
