#pragma once

// Polynomial value functions expanded at a baseline, the shifted-baseline
// rule, standard AND interactions and their moments, and the perturbation
// variance scan V^(s).

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "harsanyi/error.hpp"
#include "harsanyi/lattice.hpp"
#include "harsanyi/parallel.hpp"

namespace harsanyi {

// Non-negative integer exponent per variable.
class DegreeVector {
 public:
  explicit DegreeVector(std::vector<int> kappa) : kappa_(std::move(kappa)) {
    for (int k : kappa_) {
      if (k < 0) throw DimensionError("degree vector entries must be >= 0");
    }
  }

  int n() const { return static_cast<int>(kappa_.size()); }
  int operator[](int i) const { return kappa_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& values() const { return kappa_; }
  int total() const {
    int t = 0;
    for (int k : kappa_) t += k;
    return t;
  }
  // Mask of {i : kappa_i > 0}.
  Mask support() const {
    Mask m = 0;
    for (std::size_t i = 0; i < kappa_.size(); ++i) {
      if (kappa_[i] > 0) m |= Mask{1} << i;
    }
    return m;
  }

  friend bool operator==(const DegreeVector&, const DegreeVector&) = default;

 private:
  std::vector<int> kappa_;
};

struct PolynomialTerm {
  DegreeVector degree;
  double coefficient;
};

// v(x) = v(b) + sum_k coeff_k * prod_i (x_i - b_i)^{kappa_k,i}.
class PolynomialValueFunction {
 public:
  PolynomialValueFunction(std::vector<double> baseline, double constant,
                          std::vector<PolynomialTerm> terms)
      : baseline_(std::move(baseline)), constant_(constant), terms_(std::move(terms)) {
    check_variable_count(n());
    for (std::size_t a = 0; a < terms_.size(); ++a) {
      if (terms_[a].degree.n() != n()) {
        throw DimensionError("term degree vector length differs from baseline length");
      }
      for (std::size_t b = 0; b < a; ++b) {
        if (terms_[a].degree == terms_[b].degree) {
          throw DimensionError("duplicate degree vector in polynomial");
        }
      }
    }
  }

  int n() const { return static_cast<int>(baseline_.size()); }
  const std::vector<double>& baseline() const { return baseline_; }
  double constant() const { return constant_; }
  const std::vector<PolynomialTerm>& terms() const { return terms_; }

  double operator()(std::span<const double> x) const {
    if (x.size() != baseline_.size()) throw DimensionError("input length differs from n");
    double v = constant_;
    for (const auto& t : terms_) v += t.coefficient * monomial(t.degree, x);
    return v;
  }

  // prod_i (x_i - b_i)^{kappa_i}
  double monomial(const DegreeVector& kappa, std::span<const double> x) const {
    double p = 1.0;
    for (int i = 0; i < n(); ++i) {
      for (int k = 0; k < kappa[i]; ++k) p *= x[i] - baseline_[i];
    }
    return p;
  }

 private:
  std::vector<double> baseline_;
  double constant_;
  std::vector<PolynomialTerm> terms_;
};

// I(S|x') read off the expansion: the terms whose support is exactly S.
inline double harsanyi_closed_form(const PolynomialValueFunction& poly, const VariableSet& s,
                                   std::span<const double> x) {
  if (s.n() != poly.n()) throw DimensionError("variable set has wrong n");
  if (x.size() != static_cast<std::size_t>(poly.n())) {
    throw DimensionError("input length differs from n");
  }
  double sum = s.mask() == 0 ? poly.constant() : 0.0;
  for (const auto& t : poly.terms()) {
    if (t.degree.support() == s.mask()) sum += t.coefficient * poly.monomial(t.degree, x);
  }
  return sum;
}

// v(x'_T) for every T, masking to the polynomial's own baseline.
inline ValueTable polynomial_value_table(const PolynomialValueFunction& poly,
                                         std::span<const double> x) {
  return build_value_table(
      [&](const VariableSet& t) { return poly(apply_mask(x, poly.baseline(), t)); }, poly.n());
}

struct ShiftedBaseline {
  double tau_shift = 0.5;
  std::vector<double> mu;
};

// b_i = x_i + tau if x_i < mu_i, else x_i - tau.
inline std::vector<double> shifted_baseline(std::span<const double> x,
                                            const ShiftedBaseline& spec) {
  if (!(spec.tau_shift > 0.0)) throw DimensionError("tau_shift must be > 0");
  if (x.size() != spec.mu.size()) throw DimensionError("x and mu differ in length");
  std::vector<double> b(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    b[i] = x[i] < spec.mu[i] ? x[i] + spec.tau_shift : x[i] - spec.tau_shift;
  }
  return b;
}

// pi_hat(kappa|x') = prod_i (sign(x_i - b_i) / tau)^{kappa_i} (x'_i - b_i)^{kappa_i}.
inline double standard_and(const DegreeVector& kappa, std::span<const double> x_prime,
                           std::span<const double> x, std::span<const double> b,
                           double tau_shift) {
  const auto n = static_cast<std::size_t>(kappa.n());
  if (x_prime.size() != n || x.size() != n || b.size() != n) {
    throw DimensionError("standard_and operands differ in length");
  }
  if (!(tau_shift > 0.0)) throw DimensionError("tau_shift must be > 0");
  double p = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sign = x[i] > b[i] ? 1.0 : (x[i] < b[i] ? -1.0 : 0.0);
    const double factor = sign / tau_shift * (x_prime[i] - b[i]);
    for (int k = 0; k < kappa[static_cast<int>(i)]; ++k) p *= factor;
  }
  return p;
}

inline double double_factorial_odd(int m) {
  double r = 1.0;
  for (int k = 2 * m - 1; k > 1; k -= 2) r *= k;
  return r;
}

// E[pi_hat^2] under x' = x + N(0, delta^2 I):
// prod_{i in S} [1 + sum_{m=1}^{kappa_i} C(2 kappa_i, 2m) delta^{2m} (2m-1)!! / tau^{2m}].
inline double predicted_second_moment(const DegreeVector& kappa, double delta, double tau_shift) {
  if (kappa.support() == 0) throw DimensionError("degree vector has empty support");
  if (!(tau_shift > 0.0)) throw DimensionError("tau_shift must be > 0");
  if (!(delta >= 0.0)) throw DimensionError("delta must be >= 0");
  const double r2 = (delta * delta) / (tau_shift * tau_shift);
  double prod = 1.0;
  for (int i = 0; i < kappa.n(); ++i) {
    const int k = kappa[i];
    if (k == 0) continue;
    double factor = 1.0;
    double r_pow = 1.0;
    for (int m = 1; m <= k; ++m) {
      r_pow *= r2;
      factor += binomial(2 * k, 2 * m) * r_pow * double_factorial_odd(m);
    }
    prod *= factor;
  }
  return prod;
}

struct PerturbationSpec {
  double delta = 0.05;
  int trials = 20;
  std::uint64_t seed = 0;
};

// Independent generator for one (sample, trial) cell.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t sample, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(sample), static_cast<std::uint32_t>(trial)};
  return std::mt19937_64(seq);
}

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct StandardAndMoments {
  MomentEstimate first;
  MomentEstimate second;
};

// Monte-Carlo E[pi_hat] and E[pi_hat^2] with x' = x + eps.
inline StandardAndMoments monte_carlo_moments(const DegreeVector& kappa,
                                              std::span<const double> x,
                                              std::span<const double> b, double tau_shift,
                                              const PerturbationSpec& pert) {
  if (pert.trials < 2) throw DimensionError("need at least two trials");
  if (!(pert.delta >= 0.0)) throw DimensionError("delta must be >= 0");
  auto rng = substream(pert.seed, 0, 0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> xp(x.size());
  double s1 = 0.0, s1sq = 0.0, s2 = 0.0, s2sq = 0.0;
  for (int t = 0; t < pert.trials; ++t) {
    for (std::size_t i = 0; i < x.size(); ++i) xp[i] = x[i] + pert.delta * noise(rng);
    const double p = standard_and(kappa, xp, x, b, tau_shift);
    s1 += p;
    s1sq += p * p;
    s2 += p * p;
    s2sq += p * p * p * p;
  }
  const double count = pert.trials;
  auto estimate = [count](double sum, double sumsq) {
    const double mean = sum / count;
    const double var = std::max(0.0, (sumsq - count * mean * mean) / (count - 1.0));
    return MomentEstimate{mean, std::sqrt(var / count)};
  };
  return {estimate(s1, s1sq), estimate(s2, s2sq)};
}

enum class BaselineRule { kShifted, kMean };

struct VarianceScanConfig {
  PerturbationSpec perturbation;
  BaselineRule rule = BaselineRule::kShifted;
  double tau_shift = 0.5;
  std::vector<double> mu;  // per-variable data means
  std::vector<int> orders;
  int threads = 1;
};

struct VarianceScanResult {
  std::vector<int> orders;
  std::vector<double> variance;  // V^(s), aligned with orders
};

// V^(s) = E_x E_{|S|=s} Var_eps[I(S|x+eps)]. The baseline is fixed from the
// unperturbed sample; each trial re-tabulates and transforms x+eps.
template <typename ValueFn>
VarianceScanResult effect_variance_scan(ValueFn&& value_fn,
                                        const std::vector<std::vector<double>>& samples,
                                        const VarianceScanConfig& config) {
  const auto& pert = config.perturbation;
  if (samples.empty()) throw DimensionError("variance scan needs at least one sample");
  if (pert.trials < 2) throw DimensionError("variance scan needs at least two trials");
  if (!(pert.delta >= 0.0)) throw DimensionError("delta must be >= 0");
  const int n = static_cast<int>(samples.front().size());
  check_variable_count(n);
  if (config.mu.size() != static_cast<std::size_t>(n)) {
    throw DimensionError("mu length differs from sample length");
  }
  for (int s : config.orders) {
    if (s < 0 || s > n) throw DimensionError("order " + std::to_string(s) + " out of range");
  }
  for (const auto& x : samples) {
    if (x.size() != static_cast<std::size_t>(n)) throw DimensionError("ragged samples");
  }

  const std::size_t trials = static_cast<std::size_t>(pert.trials);
  const std::size_t cells = samples.size() * trials;
  std::vector<std::vector<double>> effects(cells);
  parallel_for(cells, config.threads, [&](std::size_t cell) {
    const std::size_t k = cell / trials;
    const std::size_t t = cell % trials;
    const auto& x = samples[k];
    const std::vector<double> b = config.rule == BaselineRule::kShifted
                                      ? shifted_baseline(x, {config.tau_shift, config.mu})
                                      : config.mu;
    auto rng = substream(pert.seed, k, t);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> xp(x);
    for (double& v : xp) v += pert.delta * noise(rng);
    std::vector<double> f(table_size(n));
    for (Mask m = 0; m < f.size(); ++m) {
      const double v = value_fn(std::span<const double>(apply_mask(xp, b, VariableSet(m, n))));
      if (!std::isfinite(v)) {
        throw EvaluationError(m, "non-finite value at sample " + std::to_string(k) +
                                     ", trial " + std::to_string(t) + ", mask " +
                                     to_bitstring(m, n));
      }
      f[m] = v;
    }
    mobius_in_place(f, n);
    effects[cell] = std::move(f);
  });

  VarianceScanResult out{config.orders, {}};
  for (int s : config.orders) {
    const auto masks = masks_of_order(n, s);
    double total = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      double per_sample = 0.0;
      for (Mask m : masks) {
        // Shifted by the first trial so identical trials give exactly zero.
        const double pivot = effects[k * trials][m];
        double sum = 0.0;
        double sumsq = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
          const double d = effects[k * trials + t][m] - pivot;
          sum += d;
          sumsq += d * d;
        }
        const double ss = sumsq - sum * sum / static_cast<double>(trials);
        per_sample += std::max(0.0, ss) / static_cast<double>(trials - 1);
      }
      total += per_sample / static_cast<double>(masks.size());
    }
    out.variance.push_back(total / static_cast<double>(samples.size()));
  }
  return out;
}

}  // namespace harsanyi
