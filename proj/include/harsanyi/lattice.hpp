#pragma once

// Subset-lattice core: masks, value/interaction tables, and the exact
// Harsanyi dividend (Moebius) transform with its zeta inverse.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "harsanyi/error.hpp"
#include "harsanyi/parallel.hpp"

namespace harsanyi {

using Mask = std::uint32_t;

inline constexpr int kMaxVariables = 20;

inline void check_variable_count(int n) {
  if (n < 1 || n > kMaxVariables) {
    throw DimensionError("variable count " + std::to_string(n) +
                         " outside [1, " + std::to_string(kMaxVariables) + "]");
  }
}

inline constexpr std::size_t table_size(int n) { return std::size_t{1} << n; }

inline int popcount(Mask m) { return std::popcount(m); }

// A subset S of N = {0, ..., n-1}; bit i set <=> variable i present.
class VariableSet {
 public:
  VariableSet(Mask mask, int n) : mask_(mask), n_(n) {
    check_variable_count(n);
    if (mask >= table_size(n)) {
      throw DimensionError("mask " + std::to_string(mask) +
                           " does not fit in " + std::to_string(n) +
                           " variables");
    }
  }

  static VariableSet full(int n) {
    check_variable_count(n);
    return {static_cast<Mask>(table_size(n) - 1), n};
  }
  static VariableSet empty(int n) { return {0, n}; }

  // Character j of the string is variable j ('1' present, '0' masked).
  static VariableSet from_bitstring(std::string_view bits) {
    const int n = static_cast<int>(bits.size());
    check_variable_count(n);
    Mask m = 0;
    for (int j = 0; j < n; ++j) {
      if (bits[j] == '1') {
        m |= Mask{1} << j;
      } else if (bits[j] != '0') {
        throw DimensionError("bitstring '" + std::string(bits) +
                             "' contains a character other than 0/1");
      }
    }
    return {m, n};
  }

  std::string to_bitstring() const {
    std::string s(static_cast<std::size_t>(n_), '0');
    for (int j = 0; j < n_; ++j) {
      if (contains(j)) s[j] = '1';
    }
    return s;
  }

  Mask mask() const { return mask_; }
  int n() const { return n_; }
  int order() const { return popcount(mask_); }
  bool contains(int i) const { return ((mask_ >> i) & 1u) != 0; }
  bool is_subset_of(const VariableSet& other) const {
    return (mask_ & ~other.mask_) == 0;
  }

  friend bool operator==(const VariableSet&, const VariableSet&) = default;

 private:
  Mask mask_;
  int n_;
};

inline std::string to_bitstring(Mask m, int n) {
  return VariableSet(m, n).to_bitstring();
}

// All masks of a given order, ascending by mask value.
inline std::vector<Mask> masks_of_order(int n, int order) {
  std::vector<Mask> out;
  if (order < 0 || order > n) return out;
  for (Mask m = 0; m < table_size(n); ++m) {
    if (popcount(m) == order) out.push_back(m);
  }
  return out;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

// Dense table of one real per subset, indexed by mask. The tag keeps value
// tables and interaction tables from being mixed up.
template <typename Tag>
class SubsetTable {
 public:
  SubsetTable(int n, std::vector<double> entries)
      : n_(n), entries_(std::move(entries)) {
    check_variable_count(n);
    if (entries_.size() != table_size(n)) {
      throw DimensionError("table for n=" + std::to_string(n) + " needs " +
                           std::to_string(table_size(n)) + " entries, got " +
                           std::to_string(entries_.size()));
    }
    for (std::size_t m = 0; m < entries_.size(); ++m) {
      if (!std::isfinite(entries_[m])) {
        throw EvaluationError(static_cast<Mask>(m),
                              "non-finite table entry at mask " +
                                  to_bitstring(static_cast<Mask>(m), n));
      }
    }
  }

  int n() const { return n_; }
  std::size_t size() const { return entries_.size(); }
  double operator[](Mask m) const { return entries_[m]; }
  double at(const VariableSet& s) const {
    if (s.n() != n_) throw DimensionError("variable set has wrong n");
    return entries_[s.mask()];
  }
  std::span<const double> entries() const { return entries_; }

  friend bool operator==(const SubsetTable&, const SubsetTable&) = default;

 private:
  int n_;
  std::vector<double> entries_;
};

struct ValueTag {};
struct InteractionTag {};

// v(x_T) for every T.
using ValueTable = SubsetTable<ValueTag>;
// I(S|x) for every S.
using InteractionTable = SubsetTable<InteractionTag>;

// x_T: components outside the mask take their baseline value.
inline std::vector<double> apply_mask(std::span<const double> sample,
                                      std::span<const double> baseline,
                                      const VariableSet& mask) {
  if (sample.size() != baseline.size()) {
    throw DimensionError("sample has " + std::to_string(sample.size()) +
                         " components but baseline has " +
                         std::to_string(baseline.size()));
  }
  if (static_cast<std::size_t>(mask.n()) != sample.size()) {
    throw DimensionError("mask covers " + std::to_string(mask.n()) +
                         " variables but sample has " +
                         std::to_string(sample.size()));
  }
  std::vector<double> out(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out[i] = mask.contains(static_cast<int>(i)) ? sample[i] : baseline[i];
  }
  return out;
}

struct MaskedSampleSpec {
  std::vector<double> sample;
  std::vector<double> baseline;
  VariableSet mask;
};

inline std::vector<double> apply_mask(const MaskedSampleSpec& spec) {
  return apply_mask(spec.sample, spec.baseline, spec.mask);
}

// Evaluates value_fn(VariableSet) on every mask. With threads > 1 the masks
// are split into contiguous chunks; each result lands at its own index.
template <typename ValueFn>
ValueTable build_value_table(ValueFn&& value_fn, int n, int threads = 1) {
  check_variable_count(n);
  const std::size_t size = table_size(n);
  std::vector<double> values(size);
  parallel_for(size, threads, [&](std::size_t m) {
    const double v = value_fn(VariableSet(static_cast<Mask>(m), n));
    if (!std::isfinite(v)) {
      throw EvaluationError(static_cast<Mask>(m),
                            "evaluator returned non-finite value for mask " +
                                to_bitstring(static_cast<Mask>(m), n));
    }
    values[m] = v;
  });
  return ValueTable(n, std::move(values));
}

// In-place subset-lattice differencing, O(n 2^n).
inline void mobius_in_place(std::span<double> f, int n) {
  const std::size_t size = table_size(n);
  for (int i = 0; i < n; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t m = 0; m < size; ++m) {
      if (m & bit) f[m] -= f[m ^ bit];
    }
  }
}

// In-place subset-lattice summation, inverse of mobius_in_place.
inline void zeta_in_place(std::span<double> f, int n) {
  const std::size_t size = table_size(n);
  for (int i = 0; i < n; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t m = 0; m < size; ++m) {
      if (m & bit) f[m] += f[m ^ bit];
    }
  }
}

// I(S|x) = sum_{T subset S} (-1)^{|S|-|T|} v(x_T) for every S.
inline InteractionTable mobius_transform(const ValueTable& table) {
  std::vector<double> f(table.entries().begin(), table.entries().end());
  mobius_in_place(f, table.n());
  return InteractionTable(table.n(), std::move(f));
}

// v(x_T) = sum_{S subset T} I(S|x) for every T.
inline ValueTable zeta_transform(const InteractionTable& table) {
  std::vector<double> f(table.entries().begin(), table.entries().end());
  zeta_in_place(f, table.n());
  return ValueTable(table.n(), std::move(f));
}

// Direct alternating sum over the 2^|S| sub-masks of S.
inline double harsanyi_single(const ValueTable& table, const VariableSet& s) {
  if (s.n() != table.n()) throw DimensionError("variable set has wrong n");
  const Mask full = s.mask();
  const int order = s.order();
  double sum = 0.0;
  Mask t = full;
  while (true) {
    const double sign = ((order - popcount(t)) & 1) ? -1.0 : 1.0;
    sum += sign * table[t];
    if (t == 0) break;
    t = (t - 1) & full;
  }
  return sum;
}

// sum_{S subset T} I(S|x).
inline double zeta_reconstruct(const InteractionTable& table,
                               const VariableSet& t) {
  if (t.n() != table.n()) throw DimensionError("variable set has wrong n");
  const Mask full = t.mask();
  double sum = 0.0;
  Mask s = full;
  while (true) {
    sum += table[s];
    if (s == 0) break;
    s = (s - 1) & full;
  }
  return sum;
}

}  // namespace harsanyi
