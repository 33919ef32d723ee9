"""Independent reference implementations used to check the package.

Nothing here imports the hull, Burgers or sticky-particle code; each oracle is
the slowest obvious method so that agreement is meaningful.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def brute_force_extreme_points(t, y):
    """Indices of upper-hull vertices by the O(n^3) chord test.

    Point k is dropped when some chord between points i < k < j passes on or
    above it (the middle point of a collinear triple is not a vertex). Points
    at the two ends are always kept.
    """
    n = len(t)
    keep = []
    for k in range(n):
        dominated = False
        for i in range(k):
            for j in range(k + 1, n):
                cross = (t[k] - t[i]) * (y[j] - y[i]) - (t[j] - t[i]) * (y[k] - y[i])
                if cross >= 0:
                    dominated = True
                    break
            if dominated:
                break
        if not dominated:
            keep.append(k)
    return keep


def count_cycles(perm):
    seen = [False] * len(perm)
    cycles = 0
    for s in range(len(perm)):
        if not seen[s]:
            cycles += 1
            j = s
            while not seen[j]:
                seen[j] = True
                j = perm[j]
    return cycles


def mean_cycle_count(n):
    """Mean number of cycles of a uniform permutation of ``n``, by full enumeration.

    For exchangeable continuous increments this equals the mean number of
    faces of the concave majorant of an ``n``-step walk.
    """
    total = sum(count_cycles(p) for p in itertools.permutations(range(n)))
    return Fraction(total, math.factorial(n))


def brute_force_hopf_cole(a, psi0, x, t):
    """``max_k psi0[k] - (x - a[k])^2 / (2t)`` by a double loop."""
    out = np.empty(len(x))
    for i, xi in enumerate(x):
        best = -math.inf
        for ak, pk in zip(a, psi0):
            v = pk - (xi - ak) ** 2 / (2.0 * t)
            if v > best:
                best = v
        out[i] = best
    return out


def brute_force_largest_argmax(a, psi0, x, t):
    """Largest ``a[k]`` attaining the Hopf–Cole maximum at each ``x``."""
    out = np.empty(len(x))
    for i, xi in enumerate(x):
        vals = [pk - (xi - ak) ** 2 / (2.0 * t) for ak, pk in zip(a, psi0)]
        top = max(vals)
        out[i] = max(ak for ak, v in zip(a, vals) if v == top)
    return out


def naive_sticky(positions, velocities):
    """Final partition of a sticky-particle system by repeated full scans.

    Exact rational arithmetic; returns blocks as ``(lo, hi)`` index pairs.
    """
    clumps = [[Fraction(x), Fraction(v), 1, k, k, Fraction(0)]
              for k, (x, v) in enumerate(zip(positions, velocities))]
    clock = Fraction(0)
    while True:
        best = None
        for i in range(len(clumps) - 1):
            xl, vl, _, _, _, tl = clumps[i]
            xr, vr, _, _, _, tr = clumps[i + 1]
            if vl > vr:
                pl = xl + vl * (clock - tl)
                pr = xr + vr * (clock - tr)
                dt = (pr - pl) / (vl - vr)
                if best is None or dt < best[0]:
                    best = (dt, i)
        if best is None:
            return [(c[3], c[4]) for c in clumps]
        dt, i = best
        clock += dt
        left, right = clumps[i], clumps[i + 1]
        x = left[0] + left[1] * (clock - left[5])
        m = left[2] + right[2]
        v = (left[2] * left[1] + right[2] * right[1]) / m
        clumps[i: i + 2] = [[x, v, m, left[3], right[4], clock]]


def hausdorff_brute(a, b):
    d1 = max(min(abs(x - y) for y in b) for x in a)
    d2 = max(min(abs(x - y) for x in a) for y in b)
    return max(d1, d2)
