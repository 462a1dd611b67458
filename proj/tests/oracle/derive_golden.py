"""Independent reference values for the unit tests.

Plain Python (sympy for exact Gaussian moments, scipy for ranks). Every
quantity is computed from its definition, not from the fast algorithms in
include/. Run once; the printed numbers are frozen in tests/golden.hpp.
"""
import math
from itertools import combinations

import numpy as np
import sympy as sp
from scipy.stats import spearmanr


def subsets(mask):
    t = mask
    while True:
        yield t
        if t == 0:
            return
        t = (t - 1) & mask


def pc(m):
    return bin(m).count("1")


def harsanyi(v, n):
    """Alternating sum over sub-masks, one subset at a time."""
    return [sum((-1) ** (pc(s) - pc(t)) * v[t] for t in subsets(s)) for s in range(1 << n)]


def emit(name, values):
    body = ",\n    ".join(repr(float(x)) for x in values)
    print(f"inline constexpr double {name}[] = {{\n    {body}}};")


# 1. formula table, n = 5
n = 5
v = [math.sin(1.0 + t) + 0.1 * pc(t) ** 2 for t in range(1 << n)]
emit("kFormulaEffects", harsanyi(v, n))

# 2. polynomial expanded at b, effects from tabulated values
b = [0.5, -1.0, 0.25, 2.0]
x = [1.5, 0.5, -0.75, 1.0]
const = 0.3
terms = [((1, 1, 0, 0), 2.0), ((2, 0, 1, 0), -1.5), ((0, 1, 1, 1), 0.7),
         ((3, 0, 0, 0), 0.4), ((1, 0, 0, 2), 1.1)]


def poly(z):
    return const + sum(c * math.prod((z[i] - b[i]) ** k[i] for i in range(4)) for k, c in terms)


vals = [poly([x[i] if (t >> i) & 1 else b[i] for i in range(4)]) for t in range(16)]
emit("kPolynomialEffects", harsanyi(vals, 4))

# 3. second moment of the standard AND, exact Gaussian integration
eps = sp.Symbol("e", real=True)


def second_moment(kappa, delta, tau):
    delta, tau = sp.Rational(delta), sp.Rational(tau)
    density = sp.exp(-eps ** 2 / (2 * delta ** 2)) / (delta * sp.sqrt(2 * sp.pi))
    out = sp.Integer(1)
    for k in kappa:
        if k:
            out *= sp.integrate((1 + eps / tau) ** (2 * k) * density, (eps, -sp.oo, sp.oo))
    return sp.nsimplify(out)


moments = [second_moment((2, 1, 0, 2), "0.05", "0.5"),
           second_moment((1, 2, 2), "0.02", "2"),
           second_moment((2,), "0.1", "0.5"),
           second_moment((1, 1, 1, 1, 1, 1), "0.05", "0.5")]
emit("kSecondMoments", [float(m) for m in moments])

# 4. Jaccard on the non-negative split
a = [1.0, -2.0, 0.5, 0.0]
c = [0.5, 1.0, -1.0, 0.25]


def split(u):
    return [max(t, 0.0) for t in u] + [max(-t, 0.0) for t in u]


sa, sc = split(a), split(c)
emit("kJaccard", [sum(map(min, sa, sc)) / sum(map(max, sa, sc))])

# 5. per-order strength over cube points, baseline 0
n = 4
out = [math.cos(p) + 0.3 * p for p in range(1 << n)]
strength = [0.0] * (n + 1)
for p in range(1 << n):
    eff = harsanyi([out[p & t] for t in range(1 << n)], n)
    for s in range(1 << n):
        strength[pc(s)] += abs(eff[s])
emit("kCubeStrength", [s / (1 << n) for s in strength])

# 6. rank correlation with ties
emit("kSpearman", [spearmanr([1, 2, 3, 4, 5, 6], [0.1, 0.3, 0.2, 0.5, 0.5, 0.9]).correlation])

# 7. small network, weights from a formula; logit effects on n = 3
widths = [3, 4, 2]
layers = []
for l in range(2):
    rows, cols = widths[l + 1], widths[l]
    w = np.array([[math.sin(0.7 * (r * cols + q) + l) for q in range(cols)] for r in range(rows)])
    bias = np.array([0.1 * (r + 1) * (-1) ** l for r in range(rows)])
    layers.append((w, bias))


def forward(z):
    h = np.array(z, dtype=float)
    for i, (w, bias) in enumerate(layers):
        h = w @ h + bias
        if i + 1 < len(layers):
            h = np.maximum(h, 0.0)
    return h


def logit(z, truth):
    rest = [z[j] for j in range(len(z)) if j != truth]
    top = max(rest)
    return z[truth] - (top + math.log(sum(math.exp(r - top) for r in rest)))


xs = [0.5, -1.0, 2.0]
bs = [0.0, 0.5, 0.0]
lv = [logit(forward([xs[i] if (t >> i) & 1 else bs[i] for i in range(3)]), 1) for t in range(8)]
emit("kMlpLogitEffects", harsanyi(lv, 3))
