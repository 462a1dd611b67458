#pragma once

// Executable checks of the decomposition's defining properties. Each check
// takes the transform under test, so a broken transform can be shown to
// fail. All checks return the worst absolute deviation found.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "harsanyi/lattice.hpp"

namespace harsanyi {

// In-place value -> interaction transform.
using TransformFn = std::function<void(std::span<double>, int)>;

inline std::vector<double> random_values(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(table_size(n));
  for (double& x : v) x = u(rng);
  return v;
}

inline std::vector<double> transformed(const TransformFn& t, std::vector<double> v, int n) {
  t(v, n);
  return v;
}

// sum_S I(S) - v(N).
inline double efficiency_gap(const TransformFn& t, std::span<const double> values, int n) {
  const auto effects = transformed(t, {values.begin(), values.end()}, n);
  double sum = 0.0;
  for (double e : effects) sum += e;
  return std::abs(sum - values[table_size(n) - 1]);
}

// T(aU + bV) - (a T(U) + b T(V)).
inline double linearity_gap(const TransformFn& t, std::span<const double> u,
                            std::span<const double> v, double a, double b, int n) {
  std::vector<double> mix(u.size());
  for (std::size_t m = 0; m < u.size(); ++m) mix[m] = a * u[m] + b * v[m];
  const auto tm = transformed(t, mix, n);
  const auto tu = transformed(t, {u.begin(), u.end()}, n);
  const auto tv = transformed(t, {v.begin(), v.end()}, n);
  double worst = 0.0;
  for (std::size_t m = 0; m < u.size(); ++m) {
    worst = std::max(worst, std::abs(tm[m] - (a * tu[m] + b * tv[m])));
  }
  return worst;
}

// v(T) = g(T \ {i}) + c [i in T] makes i a dummy; then I(S u {i}) = 0 for
// every nonempty S without i.
inline double dummy_gap(const TransformFn& t, std::span<const double> g, int i, double c, int n) {
  const Mask bit = Mask{1} << i;
  std::vector<double> v(g.size());
  for (Mask m = 0; m < v.size(); ++m) v[m] = g[m & ~bit] + ((m & bit) ? c : 0.0);
  const auto e = transformed(t, v, n);
  double worst = 0.0;
  for (Mask m = 0; m < v.size(); ++m) {
    if ((m & bit) && (m & ~bit)) worst = std::max(worst, std::abs(e[m]));
  }
  return worst;
}

inline Mask swap_bits(Mask m, int i, int j) {
  const Mask bi = (m >> i) & 1u;
  const Mask bj = (m >> j) & 1u;
  if (bi == bj) return m;
  return m ^ ((Mask{1} << i) | (Mask{1} << j));
}

// With v symmetric in (i, j), I(S) must equal I(swap(S)).
inline double symmetry_gap(const TransformFn& t, std::span<const double> g, int i, int j, int n) {
  std::vector<double> v(g.size());
  for (Mask m = 0; m < v.size(); ++m) v[m] = g[m] + g[swap_bits(m, i, j)];
  const auto e = transformed(t, v, n);
  double worst = 0.0;
  for (Mask m = 0; m < v.size(); ++m) worst = std::max(worst, std::abs(e[m] - e[swap_bits(m, i, j)]));
  return worst;
}

// v_T(S) = c [T subset S] has a single effect c at T.
inline double distribution_gap(const TransformFn& t, Mask target, double c, int n) {
  std::vector<double> v(table_size(n));
  for (Mask m = 0; m < v.size(); ++m) v[m] = (m & target) == target ? c : 0.0;
  const auto e = transformed(t, v, n);
  double worst = 0.0;
  for (Mask m = 0; m < v.size(); ++m) {
    worst = std::max(worst, std::abs(e[m] - (m == target ? c : 0.0)));
  }
  return worst;
}

// I(S u {i}) = I_i(S) - I(S) for S without i, where I_i is the dividend of
// the game with i always present. I_i(S) is summed directly.
inline double recursive_gap(const TransformFn& t, std::span<const double> values, int i, int n) {
  const Mask bit = Mask{1} << i;
  const auto e = transformed(t, {values.begin(), values.end()}, n);
  double worst = 0.0;
  for (Mask s = 0; s < values.size(); ++s) {
    if (s & bit) continue;
    double with_i = 0.0;
    Mask sub = s;
    while (true) {
      const double sign = ((popcount(s) - popcount(sub)) & 1) ? -1.0 : 1.0;
      with_i += sign * values[sub | bit];
      if (sub == 0) break;
      sub = (sub - 1) & s;
    }
    worst = std::max(worst, std::abs(e[s | bit] - (with_i - e[s])));
  }
  return worst;
}

}  // namespace harsanyi
