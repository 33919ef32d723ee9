"""Deterministic drifts, exceeding times and isolation of extremal times."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, InvalidSpecError
from .hull import (
    concave_majorant_of_path,
    extremal_superior_times,
    majorant_slope,
)
from .paths import GridPath, JumpPath, SampledPath
from .synthesis import simulate_bv_levy

DRIFT_KINDS = ("zero", "linear", "quadratic", "parabolic-burgers", "sampled")


@dataclass(frozen=True, eq=False)
class DriftSpec:
    """A C^1 drift ``f`` with its derivative.

    ``linear``: ``beta * a``; ``quadratic``: ``gamma * a**2`` (concave for
    gamma < 0); ``parabolic-burgers``: ``-a**2 / (2 t)``; ``sampled``: values
    and derivatives tabulated on a grid, linearly interpolated.
    """

    kind: str
    param: float = 0.0
    grid: tuple = ()
    f_values: tuple = ()
    df_values: tuple = ()

    def __post_init__(self):
        if self.kind not in DRIFT_KINDS:
            raise InvalidSpecError(f"unknown drift kind {self.kind!r}")
        object.__setattr__(self, "param", float(self.param))
        if self.kind == "parabolic-burgers" and not self.param > 0:
            raise InvalidSpecError("parabolic-burgers drift needs t > 0")
        if self.kind == "sampled":
            g = np.asarray(self.grid, float)
            if g.size < 2 or len(self.f_values) != g.size or len(self.df_values) != g.size:
                raise InvalidSpecError("sampled drift needs matching grid, f and f' tables")
            if np.any(np.diff(g) <= 0):
                raise InvalidSpecError("sampled drift grid must increase")
            for name in ("grid", "f_values", "df_values"):
                object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def linear(cls, beta):
        return cls("linear", beta)

    @classmethod
    def quadratic(cls, gamma):
        return cls("quadratic", gamma)

    @classmethod
    def parabolic_burgers(cls, t):
        return cls("parabolic-burgers", t)

    @classmethod
    def sampled(cls, grid, f_values, df_values):
        return cls("sampled", 0.0, tuple(grid), tuple(f_values), tuple(df_values))

    differentiable = True

    def covers(self, t0, t1):
        if self.kind != "sampled":
            return True
        return self.grid[0] <= t0 and t1 <= self.grid[-1]

    def value(self, a):
        a = np.asarray(a, dtype=float)
        k, p = self.kind, self.param
        if k == "zero":
            out = np.zeros_like(a)
        elif k == "linear":
            out = p * a
        elif k == "quadratic":
            out = p * a * a
        elif k == "parabolic-burgers":
            out = -(a * a) / (2.0 * p)
        else:
            out = np.interp(a, self.grid, self.f_values)
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self, a):
        a = np.asarray(a, dtype=float)
        k, p = self.kind, self.param
        if k == "zero":
            out = np.zeros_like(a)
        elif k == "linear":
            out = np.full_like(a, p)
        elif k == "quadratic":
            out = 2.0 * p * a
        elif k == "parabolic-burgers":
            out = -a / p
        else:
            out = np.interp(a, self.grid, self.df_values)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def is_convex(self):
        if self.kind in ("zero", "linear"):
            return True
        if self.kind == "quadratic":
            return self.param >= 0
        if self.kind == "parabolic-burgers":
            return False
        return bool(np.all(np.diff(self.df_values) >= 0))

    @property
    def is_concave(self):
        if self.kind in ("zero", "linear", "parabolic-burgers"):
            return True
        if self.kind == "quadratic":
            return self.param <= 0
        return bool(np.all(np.diff(self.df_values) <= 0))

    def to_dict(self):
        d = {"kind": self.kind, "param": self.param}
        if self.kind == "sampled":
            d.update(grid=list(self.grid), f_values=list(self.f_values), df_values=list(self.df_values))
        return d

    @classmethod
    def from_dict(cls, d):
        if d["kind"] == "sampled":
            return cls.sampled(d["grid"], d["f_values"], d["df_values"])
        return cls(d["kind"], d.get("param", 0.0))


def skeleton_times(path, samples_per_gap=16):
    """Jump times of ``path`` plus ``samples_per_gap`` interior points per gap."""
    knots = np.concatenate(([path.t0], path.times))
    if not (path.times.size and path.times[-1] == path.t1):
        knots = np.append(knots, path.t1)
    if samples_per_gap <= 0:
        return knots, np.ones(knots.size, bool)
    frac = np.arange(1, samples_per_gap + 1) / (samples_per_gap + 1)
    gaps = np.diff(knots)
    inner = knots[:-1, None] + gaps[:, None] * frac[None, :]
    rows = np.concatenate((knots[:-1, None], inner), axis=1).reshape(-1)
    times = np.append(rows, knots[-1])
    is_knot = np.zeros(times.size, bool)
    is_knot[:: samples_per_gap + 1] = True
    # Rounding may collapse an interior sample onto a knot for tiny gaps.
    keep = np.concatenate(([True], np.diff(times) > 0))
    return times[keep], is_knot[keep]


def add_drift(path, f, samples_per_gap=16):
    """``Y = X + f``.

    A grid path gets ``f`` added pointwise. A jump path becomes a
    ``SampledPath`` holding both one-sided values at every jump and
    ``samples_per_gap`` samples of ``f`` inside each inter-jump gap.
    """
    if not f.covers(*path.horizon):
        raise InvalidSpecError("drift table does not cover the horizon")
    if isinstance(path, GridPath):
        return GridPath(path.t0, path.h, path.values + f.value(path.times))
    if isinstance(path, SampledPath):
        fv = f.value(path.times)
        return SampledPath(path.times, path.values + fv, path.left + fv)
    if isinstance(path, JumpPath):
        times, _ = skeleton_times(path, samples_per_gap)
        fv = f.value(times)
        return SampledPath(times, path.value(times) + fv, path.left_limit(times) + fv)
    raise ContractViolation(f"not a path: {type(path).__name__}")


def _skeleton(path):
    if isinstance(path, JumpPath):
        t = np.concatenate(([path.t0], path.times))
        if not (path.times.size and path.times[-1] == path.t1):
            t = np.append(t, path.t1)
        return t, path.value(t)
    if isinstance(path, GridPath):
        return path.times, path.values
    return path.times, path.values


def exceeding_time(path, f, mu, u):
    """First skeleton time ``a > u`` with ``Y(a) - Y(u) > (f'(u) + mu)(a - u)``.

    ``path`` is the drifted path ``Y``; ``f`` supplies ``f'(u)``. Returns
    ``math.inf`` when the line is never exceeded inside the horizon.
    """
    if not mu > 0:
        raise ContractViolation("mu must be positive")
    t0, t1 = path.horizon
    if not (t0 <= u <= t1):
        raise ContractViolation(f"time {u} outside horizon [{t0}, {t1}]")
    t, y = _skeleton(path)
    yu = path.value(u)
    slope = f.derivative(u) + mu
    k = np.searchsorted(t, u, side="right")
    hit = np.flatnonzero(y[k:] - yu > slope * (t[k:] - u))
    return float(t[k + hit[0]]) if hit.size else math.inf


def exceeding_times(path, f, mu, u, max_count=None):
    """Iterated exceeding times ``S_1 < S_2 < ...`` started from ``u``."""
    out = []
    s = exceeding_time(path, f, mu, u)
    while math.isfinite(s):
        out.append(s)
        if max_count is not None and len(out) >= max_count:
            break
        s = exceeding_time(path, f, mu, s)
    return out


def exceeding_times_are_jumps_experiment(spec, f, mu_grid, u_grid, replicas, rng, eps=1e-3,
                                         horizon=(0.0, 1.0), samples_per_gap=16):
    """Fraction of finite exceeding times that land on upward jumps.

    Returns a dict ``{params, per_replica, aggregates}``; ``per_replica``
    holds one record per ``(replica, mu, u)``.
    """
    if not f.is_concave:
        raise InvalidSpecError("exceeding-time experiment needs a concave drift")
    records = []
    for r in range(replicas):
        x = simulate_bv_levy(spec, eps, horizon, rng.replica(r)).path
        y = add_drift(x, f, samples_per_gap) if f.kind != "zero" else x
        up = set(x.times[x.sizes > 0].tolist())
        for mu in mu_grid:
            for u in u_grid:
                s = exceeding_times(y, f, mu, u)
                hits = sum(1 for a in s if a in up)
                records.append({"replica": r, "mu": mu, "u": u, "finite": len(s), "on_jump": hits})
    finite = sum(rec["finite"] for rec in records)
    on_jump = sum(rec["on_jump"] for rec in records)
    return {
        "params": {"mu_grid": list(mu_grid), "u_grid": list(u_grid), "replicas": replicas, "eps": eps},
        "per_replica": records,
        "aggregates": {
            "finite": finite,
            "fraction_on_jumps": on_jump / finite if finite else None,
            "vacuous": finite == 0,
            "applicable": True,
        },
    }


def exceeding_times_on_grid_path(path, f, mu_grid, u_grid):
    """Same report for a path without jump structure; marked inapplicable."""
    finite = sum(len(exceeding_times(path, f, mu, u)) for mu in mu_grid for u in u_grid)
    return {
        "params": {"mu_grid": list(mu_grid), "u_grid": list(u_grid)},
        "per_replica": [],
        "aggregates": {"finite": finite, "fraction_on_jumps": 0.0 if finite else None,
                       "vacuous": finite == 0, "applicable": False},
    }


@dataclass
class IsolationVerdicts:
    times: np.ndarray
    left_slope: np.ndarray
    right_slope: np.ndarray
    drift_slope: np.ndarray
    left_isolated: np.ndarray
    right_isolated: np.ndarray
    accumulation_candidate: np.ndarray
    left_gap: np.ndarray
    right_gap: np.ndarray
    tol: float


def default_slope_tol(path):
    t0, t1 = path.horizon
    _, y = _skeleton(path)
    return 1e-6 * (float(np.ptp(y)) or 1.0) / (t1 - t0)


def classify_isolation(path, f, extremal, tol=None):
    """Predict, for each extremal time, on which sides it is isolated.

    A side is predicted isolated when the one-sided majorant slope differs
    from ``f'(a)`` by more than ``tol``. When ``f'(a)`` falls strictly
    between the two one-sided slopes the time is an accumulation candidate
    and no isolation is predicted. Observed gaps to the neighbouring times
    of ``extremal`` are reported for scoring (``inf`` at the ends).
    """
    m, _ = concave_majorant_of_path(path)
    times = np.asarray(getattr(extremal, "times", extremal), dtype=float)
    if not np.all(np.isin(times, m.t)):
        bad = times[~np.isin(times, m.t)][0]
        raise ContractViolation(f"time {bad} is not a majorant vertex")
    if tol is None:
        tol = default_slope_tol(path)
    n = times.size
    sl = np.full(n, np.nan)
    sr = np.full(n, np.nan)
    for i, a in enumerate(times):
        if a > m.t[0]:
            sl[i] = majorant_slope(m, a, "left")
        if a < m.t[-1]:
            sr[i] = majorant_slope(m, a, "right")
    df = np.asarray(f.derivative(times), dtype=float).reshape(n)
    inside = (sr + tol < df) & (df < sl - tol)
    left_iso = (np.abs(sl - df) > tol) & ~inside
    right_iso = (np.abs(sr - df) > tol) & ~inside
    gaps = np.diff(times)
    left_gap = np.concatenate(([math.inf], gaps))
    right_gap = np.concatenate((gaps, [math.inf]))
    return IsolationVerdicts(times, sl, sr, df, left_iso, right_iso, inside, left_gap, right_gap, tol)


def convex_drift_inclusion_check(path, f, samples_per_gap=16):
    """Check ``E+(X + f) ⊆ E+(X)`` on a common skeleton for convex ``f``.

    Returns ``(True, None)`` or ``(False, t)`` with a violating time.
    """
    if not f.is_convex:
        raise InvalidSpecError("inclusion check needs a convex drift")
    if isinstance(path, JumpPath):
        base = add_drift(path, DriftSpec.zero(), samples_per_gap)
        drifted = add_drift(path, f, samples_per_gap)
    else:
        base, drifted = path, add_drift(path, f)
    e_base = extremal_superior_times(base).times
    e_drift = extremal_superior_times(drifted).times
    extra = np.setdiff1d(e_drift, e_base)
    if extra.size:
        return False, float(extra[0])
    return True, None
