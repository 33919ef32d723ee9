"""Compiled inner loops. Callers validate inputs; these assume sorted float64 arrays."""

import numpy as np
from numba import njit


@njit(cache=True)
def upper_chain(t, y, eps):
    # Monotone chain, upper half only. A middle point on or below the chord
    # (cross >= -eps) is dropped, so collinear points are never vertices.
    n = t.shape[0]
    stack = np.empty(n, dtype=np.int64)
    top = 0
    for k in range(n):
        while top >= 2:
            o = stack[top - 2]
            a = stack[top - 1]
            cross = (t[a] - t[o]) * (y[k] - y[o]) - (t[k] - t[o]) * (y[a] - y[o])
            if cross >= -eps:
                top -= 1
            else:
                break
        stack[top] = k
        top += 1
    return stack[:top].copy()


@njit(cache=True)
def directed_hausdorff(a, b):
    # sup over a of the distance to the nearest element of b; both sorted.
    j = 0
    m = b.shape[0]
    worst = 0.0
    for i in range(a.shape[0]):
        x = a[i]
        while j + 1 < m and b[j + 1] <= x:
            j += 1
        d = abs(x - b[j])
        if j + 1 < m:
            d2 = abs(b[j + 1] - x)
            if d2 < d:
                d = d2
        if d > worst:
            worst = d
    return worst


@njit(cache=True)
def argmax_sweep(neg_slopes, q):
    # For sorted q, the largest vertex index j with neg_slopes[j-1] <= q[i];
    # the index only moves right, so the whole sweep is linear.
    out = np.empty(q.shape[0], dtype=np.int64)
    j = 0
    m = neg_slopes.shape[0]
    for i in range(q.shape[0]):
        while j < m and neg_slopes[j] <= q[i]:
            j += 1
        out[i] = j
    return out
