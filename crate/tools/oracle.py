#!/usr/bin/env python3
"""Independent recomputation of the constants frozen in the Rust tests.

Everything here is exact (fractions, integers) except the dense
eigenvalue cross-check, which uses numpy. Run with `python3 tools/oracle.py`;
each line prints a name and its value, and the script exits nonzero if an
internal consistency check fails.
"""

from fractions import Fraction
from itertools import combinations
from math import comb, log2, sqrt

import numpy as np


def show(name, value):
    print(f"{name} = {value}")


# Weight-sequence scan ------------------------------------------------------

def decomposition_pairs(x, q):
    """All 1-based (l, b) with l <= b where keeping the top l entries and
    flattening positions l+1..b to x_b gives sum y^p >= 1 (x normalized)."""
    lq = log2(q)
    p = 1 - log2(lq) / lq
    total = sum(x)
    xs = sorted((v / total for v in x), reverse=True)
    pw = [v ** p for v in xs]
    feasible = []
    for l in range(1, len(xs) + 1):
        for b in range(l, len(xs) + 1):
            s = sum(pw[:l]) + (b - l) * pw[b - 1]
            if s >= 1:
                feasible.append((l, b, s))
    l_max = max(i + 1 for i, v in enumerate(pw) if v * q >= 2)
    return p, l_max, feasible


def balance_binary(x):
    """Level sets first (largest omega first), then the top pair, exactly."""
    xs = [Fraction(v) for v in x]
    total = sum(xs)
    levels = sorted(set(v for v in xs if v > 0), reverse=True)
    for omega in levels:
        c = sum(1 for v in xs if v >= omega)
        if c * c * omega >= total:
            return [omega if v >= omega else 0 for v in xs]
    order = sorted(range(len(xs)), key=lambda i: (-xs[i], i))
    a, b = xs[order[0]], xs[order[1]]
    gap = total - a - b
    assert gap <= 0 or 4 * a * b >= gap * gap
    return [v if i in order[:2] else 0 for i, v in enumerate(xs)]


# Metrics --------------------------------------------------------------------

def line(xs):
    return [[abs(a - b) for b in xs] for a in xs]


def subdominant(d):
    n = len(d)
    u = [row[:] for row in d]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                u[i][j] = min(u[i][j], max(u[i][k], u[k][j]))
    return u


def c_um(d, pts):
    sub = [[d[i][j] for j in pts] for i in pts]
    u = subdominant(sub)
    m = len(pts)
    return max((Fraction(sub[i][j]) / Fraction(u[i][j]) for i in range(m) for j in range(m) if i != j), default=Fraction(1))


def oracle(d, alpha):
    n = len(d)
    for size in range(n, 0, -1):
        for pts in combinations(range(n), size):
            if c_um(d, pts) <= alpha:
                return list(pts)
    return []


# Graphs ---------------------------------------------------------------------

def petersen():
    e = []
    for i in range(5):
        e += [(i, (i + 1) % 5), (5 + i, 5 + (i + 2) % 5), (i, 5 + i)]
    return 10, e


def complete(n):
    return n, [(i, j) for i in range(n) for j in range(i + 1, n)]


def adjacency(n, edges):
    a = np.zeros((n, n))
    for u, v in edges:
        a[u, v] = a[v, u] = 1
    return a


def self_mixing(n, edges):
    d = sum(1 for u, v in edges if u == 0 or v == 0)
    best = None
    for mask in range(1, 1 << n):
        s = bin(mask).count("1")
        e = sum(1 for u, v in edges if mask >> u & 1 and mask >> v & 1)
        val = Fraction(s, n) - Fraction(2 * e, d * s)
        best = val if best is None or val > best else best
    return best


def drift(n, edges, s):
    nb = [[] for _ in range(n)]
    for u, v in edges:
        nb[u].append(v)
        nb[v].append(u)
    dist = []
    for src in range(n):
        dd = [-1] * n
        dd[src] = 0
        frontier = [src]
        while frontier:
            nxt = []
            for u in frontier:
                for v in nb[u]:
                    if dd[v] < 0:
                        dd[v] = dd[u] + 1
                        nxt.append(v)
            frontier = nxt
        dist.append(dd)
    vol = sum(len(x) for x in nb)
    total = Fraction(0)
    for v in range(n):
        p = {v: Fraction(1)}
        for _ in range(s):
            q = {}
            for u, pu in p.items():
                for w in nb[u]:
                    q[w] = q.get(w, 0) + pu / len(nb[u])
            p = q
        total += Fraction(len(nb[v]), vol) * sum(pu * dist[v][u] for u, pu in p.items())
    return total


# Cube -----------------------------------------------------------------------

def krawtchouk(d, k, x):
    return sum((-1) ** j * comb(x, j) * comb(d - x, k - j) for j in range(k + 1))


def cube_distance_graph_spectrum_matches(d, t):
    n = 1 << d
    a = np.zeros((n, n))
    for u in range(n):
        for v in range(n):
            if bin(u ^ v).count("1") == t:
                a[u, v] = 1
    ev = np.sort(np.linalg.eigvalsh(a))
    want = np.sort(np.array([krawtchouk(d, t, i) for i in range(d + 1) for _ in range(comb(d, i))], dtype=float))
    return np.max(np.abs(ev - want)) <= 1e-8


def krawtchouk_min_holds(d, k):
    m = min(krawtchouk(d, k, x) for x in range(d + 1))
    # K >= -(64k/d)^{k/2} C(d,k), k even, multiplied through by d^{k/2}.
    return m * d ** (k // 2) >= -((64 * k) ** (k // 2)) * comb(d, k)


def lexicode(d, dist):
    code = []
    for w in range(1 << d):
        if all(bin(w ^ c).count("1") >= dist for c in code):
            code.append(w)
    return code


def main():
    p, l_max, feasible = decomposition_pairs([0.5, 0.3, 0.1, 0.05, 0.05], 16)
    show("decompose.p", p)
    show("decompose.l_max", l_max)
    show("decompose.feasible_pairs", [(l, b) for l, b, _ in feasible])
    smallest_prefix = min(l for l, b, _ in feasible if l == b)
    show("decompose.smallest_full_prefix", smallest_prefix)
    show("decompose.value_at_smallest_prefix", next(s for l, b, s in feasible if l == b == smallest_prefix))
    assert (smallest_prefix, smallest_prefix) in [(l, b) for l, b, _ in feasible]

    show("balance_binary(0.9,0.05,0.05)", [str(v) for v in balance_binary([0.9, 0.05, 0.05])])
    show("balance_binary(1,1,1,1)", [str(v) for v in balance_binary([1, 1, 1, 1])])

    show("pinfty.rhs(x=(1),p=1/2)", Fraction(1, 3) ** 2)

    l4 = line([0, 1, 2, 4])
    show("c_um(line 0,1,2,4)", c_um(l4, range(4)))
    show("oracle(line 0,1,2,4; alpha=2)", oracle(l4, 2))
    show("oracle(line 0,1,2,4; alpha=1.99)", oracle(l4, Fraction(199, 100)))

    show("distortion(line 0,1,3 -> 0,1,2)", max(
        Fraction(b, a) for a, b in [(1, 1), (3, 2), (2, 1)]) * max(Fraction(a, b) for a, b in [(1, 1), (3, 2), (2, 1)]))

    show("mu(K4)", self_mixing(*complete(4)))
    pn, pe = petersen()
    mu = self_mixing(pn, pe)
    lam = np.linalg.eigvalsh(adjacency(pn, pe))
    show("mu(Petersen)", mu)
    show("-lambda_min/d (Petersen)", -round(lam.min()) / 3)
    assert mu <= Fraction(2, 3)
    show("drift(Petersen, s=1)", drift(pn, pe, 1))
    show("drift(Petersen, s=2)", drift(pn, pe, 2))

    show("K_2^(4)(2)", krawtchouk(4, 2, 2))
    show("K_1^(3)(0..3)", [krawtchouk(3, 1, x) for x in range(4)])
    ok = all(cube_distance_graph_spectrum_matches(d, t) for d in range(1, 7) for t in range(0, d + 1))
    show("cube distance-graph spectra match Krawtchouk (d<=6, t<=d)", ok)
    assert ok
    pairs = [(d, k) for d in range(1, 25) for k in range(2, d // 2 + 1, 2)]
    ok = all(krawtchouk_min_holds(d, k) for d, k in pairs)
    show(f"Krawtchouk minimum bound over {len(pairs)} (d,k) pairs", ok)
    assert ok

    denom = sum(comb(12, m) for m in range(4))
    show("GV denominator sum_{m<=3} C(12,m)", denom)
    show("GV bound 2^12/denominator", Fraction(4096, denom))
    code = lexicode(12, 3)
    show("lexicode(12,3) size", len(code))
    dists = [bin(a ^ b).count("1") for a, b in combinations(code, 2)]
    show("lexicode(12,3) distance range", (min(dists), max(dists)))
    show("lexicode(12,3) sqrt-Hamming distortion", sqrt(max(dists) / min(dists)))
    assert max(dists) <= 4 * min(dists) and len(code) * denom >= 4096
    show("lexicode(6,6)", lexicode(6, 6))

    show("beta_phi(8,256,1)", 80 ** -0.25)
    show("phi_exponent(32,4)", (1 - 3 / 8) * (8 * log2(4 * 256 * 4)) ** -0.25)
    show("expander net bound n=64,d=3,diam=6,alpha=3", Fraction(64, 3 * 2 ** 3))


if __name__ == "__main__":
    main()
