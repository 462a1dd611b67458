#include <gtest/gtest.h>

#include <random>

#include "golden.hpp"
#include "harsanyi/axioms.hpp"
#include "harsanyi/lattice.hpp"

using namespace harsanyi;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

std::vector<double> random_table(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_values(n, rng);
}

}  // namespace

TEST(VariableSet, BitstringIsLeftmostVariableFirst) {
  const auto s = VariableSet::from_bitstring("1000");
  EXPECT_EQ(s.mask(), 1u);
  EXPECT_EQ(VariableSet(0b0110, 4).to_bitstring(), "0110");
  EXPECT_EQ(to_bitstring(0b1011, 5), "11010");
  EXPECT_THROW(VariableSet::from_bitstring("10x"), DimensionError);
  EXPECT_THROW(VariableSet(4, 2), DimensionError);
}

TEST(VariableSet, CapAtTwentyVariables) {
  EXPECT_NO_THROW(check_variable_count(20));
  EXPECT_THROW(check_variable_count(21), DimensionError);
  EXPECT_THROW(check_variable_count(0), DimensionError);
}

TEST(ApplyMask, KeepsPresentVariablesAndUsesBaselineElsewhere) {
  const std::vector<double> x{1, 2, 3}, b{-1, -2, -3};
  EXPECT_EQ(apply_mask(x, b, VariableSet::from_bitstring("101")), (std::vector<double>{1, -2, 3}));
  EXPECT_EQ(apply_mask({x, b, VariableSet::full(3)}), x);
  EXPECT_EQ(apply_mask(x, b, VariableSet::empty(3)), b);
  const std::vector<double> short_b{0.0, 0.0};
  EXPECT_THROW(apply_mask(x, short_b, VariableSet::full(3)), DimensionError);
}

TEST(BuildValueTable, SimpleEvaluators) {
  const auto c = build_value_table([](const VariableSet&) { return 2.5; }, 2);
  EXPECT_EQ(std::vector<double>(c.entries().begin(), c.entries().end()),
            (std::vector<double>{2.5, 2.5, 2.5, 2.5}));
  const auto p = build_value_table([](const VariableSet& s) { return double(s.order()); }, 2);
  EXPECT_EQ(std::vector<double>(p.entries().begin(), p.entries().end()),
            (std::vector<double>{0, 1, 1, 2}));
}

TEST(BuildValueTable, NonFiniteValueNamesMask) {
  try {
    build_value_table([](const VariableSet& s) { return s.mask() == 5 ? NAN : 0.0; }, 3);
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_EQ(e.mask(), 5u);
  }
}

TEST(BuildValueTable, ThreadCountDoesNotChangeResult) {
  auto fn = [](const VariableSet& s) { return std::sin(0.1 * s.mask()); };
  EXPECT_EQ(build_value_table(fn, 10, 1), build_value_table(fn, 10, 4));
}

TEST(Mobius, HandExample) {
  const ValueTable v(2, {0, 1, 2, 5});
  const auto i = mobius_transform(v);
  EXPECT_EQ(std::vector<double>(i.entries().begin(), i.entries().end()),
            (std::vector<double>{0, 1, 2, 2}));
  EXPECT_EQ(harsanyi_single(v, VariableSet(3, 2)), 2.0);
}

TEST(Mobius, AndFunctionHasSingleEffect) {
  // v(T) = 1 iff {0,1} subset of T, n = 3
  const auto v = build_value_table([](const VariableSet& s) { return (s.mask() & 3u) == 3u ? 1.0 : 0.0; }, 3);
  const auto i = mobius_transform(v);
  for (Mask m = 0; m < 8; ++m) EXPECT_EQ(i[m], m == 3 ? 1.0 : 0.0) << m;
}

TEST(Mobius, MatchesFrozenOracle) {
  const int n = 5;
  std::vector<double> v(32);
  for (Mask t = 0; t < 32; ++t) v[t] = std::sin(1.0 + t) + 0.1 * popcount(t) * popcount(t);
  const auto i = mobius_transform(ValueTable(n, v));
  for (Mask s = 0; s < 32; ++s) EXPECT_LE(rel(i[s], golden::kFormulaEffects[s]), 1e-12) << s;
}

TEST(Mobius, FastEqualsAlternatingSumOnRandomTables) {
  for (int n : {1, 3, 6, 10}) {
    const ValueTable v(n, random_table(n, 100 + n));
    const auto i = mobius_transform(v);
    for (Mask s = 0; s < v.size(); ++s) {
      EXPECT_LE(rel(i[s], harsanyi_single(v, VariableSet(s, n))), 1e-9);
    }
  }
}

TEST(Zeta, RoundTripAndPointReconstruction) {
  const int n = 10;
  const ValueTable v(n, random_table(n, 7));
  const auto i = mobius_transform(v);
  const auto back = zeta_transform(i);
  for (Mask t = 0; t < v.size(); ++t) {
    EXPECT_LE(rel(back[t], v[t]), 1e-9);
    if (t % 97 == 0) {
      EXPECT_LE(rel(zeta_reconstruct(i, VariableSet(t, n)), v[t]), 1e-9);
    }
  }
}

TEST(Axioms, EfficiencyLinearityDummySymmetry) {
  const TransformFn t = [](std::span<double> f, int n) { mobius_in_place(f, n); };
  std::mt19937_64 rng(3);
  for (int n : {2, 5, 8}) {
    EXPECT_LE(efficiency_gap(t, random_values(n, rng), n), 1e-9);
    EXPECT_LE(linearity_gap(t, random_values(n, rng), random_values(n, rng), -2.0, 0.25, n), 1e-9);
    EXPECT_LE(dummy_gap(t, random_values(n, rng), n - 1, 0.3, n), 1e-9);
    EXPECT_LE(symmetry_gap(t, random_values(n, rng), 0, n - 1, n), 1e-9);
    EXPECT_LE(distribution_gap(t, static_cast<Mask>(table_size(n) - 1), 2.0, n), 1e-9);
    EXPECT_LE(recursive_gap(t, random_values(n, rng), 1, n), 1e-9);
  }
}

TEST(Axioms, SignBugIsCaught) {
  // Mutation: adding instead of subtracting breaks efficiency.
  const TransformFn broken = [](std::span<double> f, int n) { zeta_in_place(f, n); };
  std::mt19937_64 rng(9);
  EXPECT_GT(efficiency_gap(broken, random_values(6, rng), 6), 1e-3);
}

TEST(SubsetTable, RejectsWrongSizeAndNonFinite) {
  EXPECT_THROW(ValueTable(3, std::vector<double>(7)), DimensionError);
  EXPECT_THROW(InteractionTable(1, {0.0, INFINITY}), EvaluationError);
}

TEST(Combinatorics, MasksOfOrderAndBinomial) {
  EXPECT_EQ(masks_of_order(4, 2).size(), 6u);
  EXPECT_EQ(masks_of_order(4, 0), std::vector<Mask>{0});
  EXPECT_EQ(binomial(10, 5), 252.0);
  EXPECT_EQ(binomial(3, 4), 0.0);
}
