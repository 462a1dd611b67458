#pragma once

// Salient concepts, order histograms, sparsity curves, and the residual of
// approximating every masked output with salient effects only.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "harsanyi/error.hpp"
#include "harsanyi/lattice.hpp"

namespace harsanyi {

inline constexpr double kDefaultSalienceRatio = 0.05;

struct SalientConcept {
  Mask mask;
  double effect;
};

// Concepts with |I(S|x)| > threshold, by descending |effect| then ascending
// mask.
struct SalientSet {
  int n = 0;
  double threshold = 0.0;
  std::vector<SalientConcept> entries;

  std::size_t size() const { return entries.size(); }
  bool contains(Mask m) const {
    return std::any_of(entries.begin(), entries.end(),
                       [m](const SalientConcept& c) { return c.mask == m; });
  }
};

inline double max_abs_effect(const InteractionTable& table) {
  double best = 0.0;
  for (double e : table.entries()) best = std::max(best, std::abs(e));
  return best;
}

// ratio * max_S |I(S|x)|.
inline double relative_threshold(const InteractionTable& table,
                                 double ratio = kDefaultSalienceRatio) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw DimensionError("salience ratio must lie in [0, 1]");
  }
  return ratio * max_abs_effect(table);
}

inline SalientSet extract_salient(const InteractionTable& table, double threshold) {
  if (!(threshold >= 0.0)) throw DimensionError("salience threshold must be >= 0");
  SalientSet out{table.n(), threshold, {}};
  for (Mask m = 0; m < table.size(); ++m) {
    if (std::abs(table[m]) > threshold) out.entries.push_back({m, table[m]});
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const SalientConcept& a, const SalientConcept& b) {
              const double ea = std::abs(a.effect);
              const double eb = std::abs(b.effect);
              if (ea != eb) return ea > eb;
              return a.mask < b.mask;
            });
  return out;
}

// epsilon_T = v(x_T) - sum_{S subset T, S salient} I(S|x).
inline double reconstruction_residual(const ValueTable& values, const SalientSet& salient,
                                      const VariableSet& t) {
  if (values.n() != salient.n || t.n() != values.n()) {
    throw DimensionError("salient set, value table and mask disagree on n");
  }
  double approx = 0.0;
  for (const auto& c : salient.entries) {
    if ((c.mask & ~t.mask()) == 0) approx += c.effect;
  }
  return values[t.mask()] - approx;
}

// epsilon_T for every T at once, via one zeta transform of the salient
// effects.
inline std::vector<double> residual_table(const ValueTable& values, const SalientSet& salient) {
  if (values.n() != salient.n) throw DimensionError("salient set has wrong n");
  std::vector<double> approx(values.size(), 0.0);
  for (const auto& c : salient.entries) approx[c.mask] = c.effect;
  zeta_in_place(approx, values.n());
  for (Mask m = 0; m < values.size(); ++m) approx[m] = values[m] - approx[m];
  return approx;
}

// sum_{S not salient} |I(S|x)|, an upper bound on every |epsilon_T|.
inline double residual_bound(const InteractionTable& table, const SalientSet& salient) {
  std::vector<char> in_set(table.size(), 0);
  for (const auto& c : salient.entries) in_set[c.mask] = 1;
  double sum = 0.0;
  for (Mask m = 0; m < table.size(); ++m) {
    if (!in_set[m]) sum += std::abs(table[m]);
  }
  return sum;
}

// counts[s] = number of salient concepts of order s.
struct OrderHistogram {
  std::vector<int> counts;
  int total() const {
    int t = 0;
    for (int c : counts) t += c;
    return t;
  }
};

inline OrderHistogram order_histogram(const SalientSet& salient, int n) {
  OrderHistogram h{std::vector<int>(static_cast<std::size_t>(n) + 1, 0)};
  for (const auto& c : salient.entries) {
    const int s = popcount(c.mask);
    if (s > n) throw DimensionError("salient concept exceeds n variables");
    ++h.counts[s];
  }
  return h;
}

// |I(S|x)| for all S, sorted non-increasing.
struct SparsityCurve {
  std::vector<double> strengths;
};

inline SparsityCurve sparsity_curve(const InteractionTable& table) {
  SparsityCurve c;
  c.strengths.reserve(table.size());
  for (double e : table.entries()) c.strengths.push_back(std::abs(e));
  std::sort(c.strengths.begin(), c.strengths.end(), std::greater<>());
  return c;
}

// Fraction of concepts whose strength is at most ratio * max strength.
inline double near_zero_fraction(const InteractionTable& table,
                                 double ratio = kDefaultSalienceRatio) {
  const double tau = relative_threshold(table, ratio);
  std::size_t count = 0;
  for (double e : table.entries()) {
    if (std::abs(e) <= tau) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(table.size());
}

}  // namespace harsanyi
