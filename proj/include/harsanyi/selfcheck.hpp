#pragma once

// Fast property suite behind `harsanyi selfcheck`.

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "harsanyi/axioms.hpp"
#include "harsanyi/lattice.hpp"
#include "harsanyi/metrics.hpp"
#include "harsanyi/mlp.hpp"
#include "harsanyi/salience.hpp"
#include "harsanyi/table_io.hpp"
#include "harsanyi/taylor.hpp"

namespace harsanyi {

struct SelfcheckOptions {
  bool quick = false;  // skip Monte-Carlo checks
  std::uint64_t seed = 20240601;
  TransformFn transform = [](std::span<double> f, int n) { mobius_in_place(f, n); };
};

struct PropertyResult {
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

inline PropertyResult gap_result(std::string name, double gap, double tol) {
  return {std::move(name), gap <= tol, false, "max deviation " + fmt(gap) + " (tol " + fmt(tol) + ")"};
}

inline double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace detail

inline std::vector<PropertyResult> run_selfcheck(const SelfcheckOptions& opt = {}) {
  using detail::gap_result;
  using detail::relative_gap;
  std::mt19937_64 rng(opt.seed);
  const TransformFn& t = opt.transform;
  std::vector<PropertyResult> out;
  auto timed = [&](auto&& fn) {
    const auto start = std::chrono::steady_clock::now();
    PropertyResult r = fn();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(r));
  };

  timed([&] {
    double gap = 0.0;
    for (int n : {1, 4, 8, 12}) {
      const auto v = random_values(n, rng);
      const auto fast = transformed(t, v, n);
      const ValueTable table(n, v);
      for (Mask s = 0; s < v.size(); ++s) {
        gap = std::max(gap, relative_gap(fast[s], harsanyi_single(table, VariableSet(s, n))));
      }
    }
    return gap_result("transform matches alternating-sum oracle", gap, 1e-9);
  });

  timed([&] {
    double gap = 0.0;
    for (int n : {4, 8, 12}) {
      const auto v = random_values(n, rng);
      auto f = transformed(t, v, n);
      zeta_in_place(f, n);
      for (Mask m = 0; m < v.size(); ++m) gap = std::max(gap, relative_gap(f[m], v[m]));
    }
    return gap_result("zeta round trip", gap, 1e-9);
  });

  timed([&] {
    double gap = 0.0;
    for (int n : {3, 6, 8}) gap = std::max(gap, efficiency_gap(t, random_values(n, rng), n));
    const auto model = init_model({{10, 16, 16, 1}, opt.seed, 1.0});
    std::vector<double> x(10), b(10, 0.0);
    std::normal_distribution<double> g(0.0, 1.0);
    for (double& xi : x) xi = g(rng);
    const auto v = build_value_table(
        [&](const VariableSet& s) { return model.forward(apply_mask(x, b, s))[0]; }, 10);
    const double full = v[static_cast<Mask>(v.size() - 1)];
    gap = std::max(gap, efficiency_gap(t, v.entries(), 10) / std::max(1.0, std::abs(full)));
    return gap_result("efficiency: effects sum to v(x_N)", gap, 1e-6);
  });

  timed([&] {
    const int n = 8;
    const auto u = random_values(n, rng);
    const auto v = random_values(n, rng);
    return gap_result("linearity", linearity_gap(t, u, v, 1.75, -0.5, n), 1e-9);
  });

  timed([&] {
    const int n = 8;
    double gap = 0.0;
    for (int i : {0, 3, 7}) gap = std::max(gap, dummy_gap(t, random_values(n, rng), i, 0.8, n));
    return gap_result("dummy variable", gap, 1e-9);
  });

  timed([&] {
    const int n = 8;
    return gap_result("symmetry", symmetry_gap(t, random_values(n, rng), 1, 5, n), 1e-9);
  });

  timed([&] {
    const int n = 8;
    double gap = 0.0;
    for (Mask target : {Mask{0b11}, Mask{0b10110}, Mask{0xff}}) {
      gap = std::max(gap, distribution_gap(t, target, 1.5, n));
    }
    return gap_result("interaction distribution", gap, 1e-9);
  });

  timed([&] {
    const int n = 8;
    double gap = 0.0;
    for (int i : {0, 4}) gap = std::max(gap, recursive_gap(t, random_values(n, rng), i, n));
    return gap_result("recursive property", gap, 1e-9);
  });

  timed([&] {
    const int n = 10;
    const auto v = random_values(n, rng);
    const ValueTable values(n, v);
    const InteractionTable table(n, transformed(t, v, n));
    bool ok = true;
    for (double ratio : {0.0, 0.05, 0.2, 1.0}) {
      const auto salient = extract_salient(table, relative_threshold(table, ratio));
      double worst = 0.0;
      for (double e : residual_table(values, salient)) worst = std::max(worst, std::abs(e));
      ok = ok && worst <= residual_bound(table, salient) + 1e-9;
    }
    return PropertyResult{"residual bounded by excluded effects", ok, false,
                          ok ? "all ratios" : "bound violated"};
  });

  timed([&] {
    const std::vector<double> a{1, -2, 0.5, 0};
    std::vector<double> k3(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) k3[i] = 3.0 * a[i];
    const double self = jaccard_similarity(nonneg_extend(a), nonneg_extend(a));
    const double scaled = jaccard_similarity(nonneg_extend(k3), nonneg_extend(a));
    const double hand = jaccard_similarity({{1, 0, 0, 2}}, {{2, 0, 0, 1}});
    const double gap = std::max({std::abs(self - 1.0), std::abs(scaled - 1.0 / 3.0), std::abs(hand - 0.5)});
    return gap_result("jaccard identities", gap, 1e-12);
  });

  timed([&] {
    const int n = 10;
    std::vector<double> v = random_values(n, rng, 1e3);
    v[3] = 1e-300;
    v[5] = -0.1;
    std::stringstream buf;
    write_table(buf, {TableKind::kValue, n, "check", v});
    const auto back = read_table(buf);
    bool ok = back.n == n && back.values.size() == v.size();
    for (std::size_t m = 0; ok && m < v.size(); ++m) ok = back.values[m] == v[m];
    return PropertyResult{"table file round trip is bit exact", ok, false, ok ? "1024 values" : "mismatch"};
  });

  timed([&] {
    double worst = 0.0;
    for (int k = 0; k < 6; ++k) {
      const auto model = init_model({{4, 5, 3}, opt.seed + k, 1.0});
      Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 6);
      Eigen::MatrixXd y = Eigen::MatrixXd::Random(3, 6);
      const std::vector<int> labels{0, 1, 2, 1, 0, 2};
      worst = std::max(worst, gradient_check(model, x, y, {}));
      worst = std::max(worst, gradient_check(model, x, y, labels));
    }
    return gap_result("backprop matches central differences", worst, 1e-4);
  });

  timed([&] {
    const int n = 6;
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> b(n), x(n);
    for (int i = 0; i < n; ++i) {
      b[i] = g(rng);
      x[i] = g(rng);
    }
    std::vector<PolynomialTerm> terms;
    std::uniform_int_distribution<int> deg(0, 2);
    for (int k = 0; k < 20; ++k) {
      std::vector<int> kappa(n);
      for (int& d : kappa) d = deg(rng);
      DegreeVector dv(kappa);
      bool dup = dv.total() == 0;
      for (const auto& term : terms) dup = dup || term.degree == dv;
      if (!dup) terms.push_back({dv, g(rng)});
    }
    const PolynomialValueFunction poly(b, 0.3, terms);
    const auto table = polynomial_value_table(poly, x);
    std::vector<double> f(table.entries().begin(), table.entries().end());
    t(f, n);
    double gap = 0.0;
    for (Mask s = 0; s < f.size(); ++s) {
      gap = std::max(gap, relative_gap(f[s], harsanyi_closed_form(poly, VariableSet(s, n), x)));
    }
    return gap_result("closed-form effects of a polynomial", gap, 1e-8);
  });

  if (opt.quick) {
    out.push_back({"second moment of standard AND (Monte Carlo)", true, true, "skipped (--quick)"});
    out.push_back({"mean of standard AND (Monte Carlo)", true, true, "skipped (--quick)"});
    return out;
  }

  timed([&] {
    const std::vector<double> x{0.2, -0.4, 1.0}, mu{0.0, 0.0, 0.0};
    const auto b = shifted_baseline(x, {0.5, mu});
    bool ok = true;
    std::string worst;
    for (const auto& kappa : {std::vector<int>{1, 1, 0}, std::vector<int>{2, 1, 1}, std::vector<int>{2, 2, 2}}) {
      const DegreeVector dv(kappa);
      const auto est = monte_carlo_moments(dv, x, b, 0.5, {0.05, 100000, opt.seed});
      const double want = predicted_second_moment(dv, 0.05, 0.5);
      const double z = std::abs(est.second.mean - want) / est.second.std_error;
      if (z > 3.0) ok = false;
      worst = "z = " + detail::fmt(z);
    }
    return PropertyResult{"second moment of standard AND (Monte Carlo)", ok, false, worst};
  });

  timed([&] {
    const std::vector<double> x{0.2, -0.4}, mu{0.0, 0.0};
    const auto b = shifted_baseline(x, {0.5, mu});
    const DegreeVector dv({1, 1});
    const auto est = monte_carlo_moments(dv, x, b, 0.5, {0.05, 100000, opt.seed + 1});
    const double z = std::abs(est.first.mean - 1.0) / est.first.std_error;
    return PropertyResult{"mean of standard AND (Monte Carlo)", z <= 3.0, false, "z = " + detail::fmt(z)};
  });

  return out;
}

}  // namespace harsanyi
