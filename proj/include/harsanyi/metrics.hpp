#pragma once

// Order-m effect vectors, their non-negative split, Jaccard similarity, and
// the strength/similarity statistics built on them.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "harsanyi/error.hpp"
#include "harsanyi/lattice.hpp"

namespace harsanyi {

// One entry per order-m subset, ascending mask order.
struct OrderEffectVector {
  int n = 0;
  int order = 0;
  std::vector<double> entries;
  std::string category;
  std::string sample_set;
};

// [max(v, 0), -min(v, 0)], length 2d.
struct NonNegSplit {
  std::vector<double> entries;
};

inline void check_order(int n, int order) {
  if (order < 0 || order > n) {
    throw DimensionError("order " + std::to_string(order) + " outside [0, " +
                         std::to_string(n) + "]");
  }
}

inline OrderEffectVector order_slice(const InteractionTable& table, int order) {
  check_order(table.n(), order);
  OrderEffectVector v{table.n(), order, {}, {}, {}};
  for (Mask m : masks_of_order(table.n(), order)) v.entries.push_back(table[m]);
  return v;
}

inline OrderEffectVector mean_effect_vector(std::span<const InteractionTable> tables,
                                            int order) {
  if (tables.empty()) throw DimensionError("mean_effect_vector needs at least one table");
  const int n = tables.front().n();
  check_order(n, order);
  const auto masks = masks_of_order(n, order);
  OrderEffectVector v{n, order, std::vector<double>(masks.size(), 0.0), {}, {}};
  for (const auto& t : tables) {
    if (t.n() != n) throw DimensionError("tables disagree on n");
    for (std::size_t k = 0; k < masks.size(); ++k) v.entries[k] += t[masks[k]];
  }
  const double count = static_cast<double>(tables.size());
  for (double& e : v.entries) e /= count;
  return v;
}

inline NonNegSplit nonneg_extend(std::span<const double> v) {
  NonNegSplit s{std::vector<double>(2 * v.size(), 0.0)};
  for (std::size_t i = 0; i < v.size(); ++i) {
    s.entries[i] = std::max(v[i], 0.0);
    s.entries[v.size() + i] = -std::min(v[i], 0.0);
  }
  return s;
}

inline NonNegSplit nonneg_extend(const OrderEffectVector& v) { return nonneg_extend(v.entries); }

// ||min(a,b)||_1 / ||max(a,b)||_1; two all-zero vectors count as identical.
inline double jaccard_similarity(const NonNegSplit& a, const NonNegSplit& b) {
  if (a.entries.size() != b.entries.size()) {
    throw DimensionError("jaccard operands differ in length");
  }
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    if (a.entries[i] < 0.0 || b.entries[i] < 0.0) {
      throw DimensionError("jaccard operands must be non-negative");
    }
    lo += std::min(a.entries[i], b.entries[i]);
    hi += std::max(a.entries[i], b.entries[i]);
  }
  if (hi == 0.0) return 1.0;
  return lo / hi;
}

// Tables grouped by category label.
using CategorizedTables = std::map<int, std::vector<InteractionTable>>;

// Mean over categories of the Jaccard similarity between the category's mean
// train and mean test order-m vectors.
inline double generalization_similarity(const CategorizedTables& train,
                                        const CategorizedTables& test, int order) {
  if (train.empty()) throw DimensionError("no categories given");
  for (const auto& [c, tables] : train) {
    if (!test.contains(c)) {
      throw DimensionError("category " + std::to_string(c) + " has no test tables");
    }
  }
  for (const auto& [c, tables] : test) {
    if (!train.contains(c)) {
      throw DimensionError("category " + std::to_string(c) + " has no train tables");
    }
  }
  double sum = 0.0;
  for (const auto& [c, tables] : train) {
    const auto a = nonneg_extend(mean_effect_vector(tables, order));
    const auto b = nonneg_extend(mean_effect_vector(test.at(c), order));
    sum += jaccard_similarity(a, b);
  }
  return sum / static_cast<double>(train.size());
}

// E_{S:|S|=m} |I(S|x)| for one table.
inline double mean_abs_order_effect(const InteractionTable& table, int order) {
  check_order(table.n(), order);
  const auto masks = masks_of_order(table.n(), order);
  double sum = 0.0;
  for (Mask m : masks) sum += std::abs(table[m]);
  return sum / static_cast<double>(masks.size());
}

// sum_{S:|S|=m} |I(S|x)| for one table.
inline double total_abs_order_effect(const InteractionTable& table, int order) {
  check_order(table.n(), order);
  double sum = 0.0;
  for (Mask m = 0; m < table.size(); ++m) {
    if (popcount(m) == order) sum += std::abs(table[m]);
  }
  return sum;
}

// E_x E_{|S|=m} |I(S|x)|  /  E_x |v(x_N) - v(x_empty)|.
inline double normalized_order_strength(std::span<const InteractionTable> tables,
                                        std::span<const ValueTable> values, int order) {
  if (tables.empty() || tables.size() != values.size()) {
    throw DimensionError("interaction and value tables must be aligned and nonempty");
  }
  double numer = 0.0;
  double denom = 0.0;
  for (std::size_t k = 0; k < tables.size(); ++k) {
    if (tables[k].n() != values[k].n()) throw DimensionError("tables disagree on n");
    numer += mean_abs_order_effect(tables[k], order);
    const Mask full = static_cast<Mask>(values[k].size() - 1);
    denom += std::abs(values[k][full] - values[k][0]);
  }
  if (denom == 0.0) {
    throw DegenerateError("E|v(x_N) - v(x_empty)| is zero; normalized strength undefined");
  }
  return numer / denom;
}

// Sim^(m,t): mean over samples of the Jaccard similarity between each
// sample's order-m split at epoch t and at the final epoch.
inline double learning_progress(std::span<const InteractionTable> snapshot,
                                std::span<const InteractionTable> final_tables, int order) {
  if (snapshot.empty() || snapshot.size() != final_tables.size()) {
    throw DimensionError("snapshot and final tables must be aligned and nonempty");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < snapshot.size(); ++k) {
    sum += jaccard_similarity(nonneg_extend(order_slice(snapshot[k], order)),
                              nonneg_extend(order_slice(final_tables[k], order)));
  }
  return sum / static_cast<double>(snapshot.size());
}

}  // namespace harsanyi
