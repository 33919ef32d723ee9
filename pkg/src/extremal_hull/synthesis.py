"""Reproducible realizations of the process classes: BV Lévy, Brownian, Itô.

Infinite Lévy measures are handled by discarding jumps smaller than a
truncation level ``eps``. Stable-like components are generated in order of
decreasing jump size (tail inversion of a unit-rate Poisson sequence), so
lowering ``eps`` on the same stream only appends smaller jumps: the path at a
coarse level is exactly the large-jump subset of the path at a finer level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import integrate, stats

from .errors import InvalidParameterError, InvalidSpecError, SimulationError
from .paths import GridPath, JumpPath

_CHUNK = 256


@dataclass(frozen=True)
class RngStream:
    """A seed plus a stream index; ``(seed, index, key)`` fixes every draw."""

    seed: int
    index: int = 0
    key: tuple = ()

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidParameterError("seed must fit in an unsigned 64-bit integer")

    def substream(self, *key):
        return RngStream(self.seed, self.index, self.key + tuple(int(k) for k in key))

    def replica(self, r):
        """Stream for replica ``r``; disjoint from every other replica."""
        return self.substream(1_000_003, r)

    def generator(self):
        seq = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.index),) + self.key)
        return np.random.Generator(np.random.PCG64(seq))


# -- jump laws and Lévy measures ---------------------------------------------


@dataclass(frozen=True)
class JumpLaw:
    """Jump-size distribution of a compound Poisson component.

    kind is one of ``point`` (value), ``normal`` (mean, std), ``uniform``
    (low, high), ``exponential`` (scale, sign) and ``laplace`` (scale).
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        expected = {"point": 1, "normal": 2, "uniform": 2, "exponential": 2, "laplace": 1}
        if self.kind not in expected:
            raise InvalidSpecError(f"unknown jump law {self.kind!r}")
        if len(self.params) != expected[self.kind]:
            raise InvalidSpecError(f"{self.kind} law takes {expected[self.kind]} parameters")
        if self.kind == "laplace" and not self.params[0] > 0:
            raise InvalidSpecError("laplace scale must be positive")
        if self.kind == "normal" and not self.params[1] > 0:
            raise InvalidSpecError("normal std must be positive")
        if self.kind == "uniform" and not self.params[1] > self.params[0]:
            raise InvalidSpecError("uniform law needs low < high")
        if self.kind == "exponential" and (not self.params[0] > 0 or self.params[1] not in (1.0, -1.0)):
            raise InvalidSpecError("exponential law needs scale > 0 and sign +-1")

    @classmethod
    def point(cls, value):
        return cls("point", (value,))

    @classmethod
    def normal(cls, mean=0.0, std=1.0):
        return cls("normal", (mean, std))

    @classmethod
    def uniform(cls, low, high):
        return cls("uniform", (low, high))

    @classmethod
    def exponential(cls, scale=1.0, sign=1):
        return cls("exponential", (scale, sign))

    @classmethod
    def laplace(cls, scale=1.0):
        return cls("laplace", (scale,))

    @property
    def continuous(self):
        return self.kind != "point"

    @property
    def symmetric(self):
        if self.kind == "point":
            return self.params[0] == 0.0
        if self.kind == "normal":
            return self.params[0] == 0.0
        if self.kind == "uniform":
            return self.params[0] == -self.params[1]
        return self.kind == "laplace"

    def sample(self, gen, size):
        k, p = self.kind, self.params
        if k == "point":
            return np.full(size, p[0])
        if k == "normal":
            return gen.normal(p[0], p[1], size)
        if k == "uniform":
            return gen.uniform(p[0], p[1], size)
        if k == "exponential":
            return p[1] * gen.exponential(p[0], size)
        return gen.laplace(0.0, p[0], size)

    def _support(self):
        k, p = self.kind, self.params
        if k == "uniform":
            return p[0], p[1]
        if k == "exponential":
            return (0.0, math.inf) if p[1] > 0 else (-math.inf, 0.0)
        return -math.inf, math.inf

    def pdf(self, x):
        """Density at a scalar ``x`` (continuous laws only)."""
        k, p = self.kind, self.params
        if k == "normal":
            z = (x - p[0]) / p[1]
            return math.exp(-0.5 * z * z) / (p[1] * math.sqrt(2.0 * math.pi))
        if k == "uniform":
            return 1.0 / (p[1] - p[0]) if p[0] <= x <= p[1] else 0.0
        if k == "exponential":
            y = p[1] * x
            return math.exp(-y / p[0]) / p[0] if y >= 0 else 0.0
        if k == "laplace":
            return math.exp(-abs(x) / p[0]) / (2.0 * p[0])
        raise InvalidSpecError("a point mass has no density")

    def expect(self, g, low=-math.inf, high=math.inf):
        """``E[g(J); low < J < high]`` by quadrature (exact for point masses)."""
        if self.kind == "point":
            v = self.params[0]
            return g(v) if low < v < high else 0.0
        lo, hi = self._support()
        lo, hi = max(lo, low), min(hi, high)
        if not hi > lo:
            return 0.0
        f = lambda x: g(x) * self.pdf(x)  # noqa: E731
        pieces = [(lo, 0.0), (0.0, hi)] if lo < 0.0 < hi else [(lo, hi)]
        return math.fsum(integrate.quad(f, a, b, limit=200)[0] for a, b in pieces)



FAMILIES = ("compound-poisson", "stable-like", "user-table", "sum")


@dataclass(frozen=True)
class LevyMeasureSpec:
    """Lévy measure of a bounded-variation pure-jump process, plus a drift.

    ``compound-poisson``: finite measure ``rate * law``.
    ``stable-like``: density ``c_pos x^{-1-alpha}`` on ``(0, cap]`` and
    ``c_neg |x|^{-1-alpha}`` on ``[-cap, 0)``; infinite when either c > 0.
    ``user-table``: piecewise-constant density over ``edges`` (finite mass).
    ``sum``: superposition of independent ``parts``.

    The drift ``b`` is carried for bookkeeping only; simulators return the
    pure-jump part (extremal sets do not depend on ``b``).
    """

    family: str
    rate: float = 0.0
    law: Optional[JumpLaw] = None
    c_pos: float = 0.0
    c_neg: float = 0.0
    alpha: float = 0.5
    cap: float = 1.0
    edges: tuple = ()
    densities: tuple = ()
    parts: tuple = ()
    drift: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidSpecError(f"unknown family {self.family!r}")
        if self.family == "compound-poisson":
            if not (self.rate >= 0 and math.isfinite(self.rate)):
                raise InvalidSpecError(f"rate must be finite and >= 0, got {self.rate}")
            if self.law is None:
                raise InvalidSpecError("compound-poisson spec needs a jump law")
        elif self.family == "stable-like":
            if self.c_pos < 0 or self.c_neg < 0 or not self.c_pos + self.c_neg > 0:
                raise InvalidSpecError("need c_pos, c_neg >= 0 and c_pos + c_neg > 0")
            if not 0 < self.alpha < 1:
                raise InvalidSpecError(f"alpha must lie in (0, 1), got {self.alpha}")
            if not self.cap > 0:
                raise InvalidSpecError("support cap must be positive")
        elif self.family == "user-table":
            edges = tuple(float(e) for e in self.edges)
            dens = tuple(float(d) for d in self.densities)
            object.__setattr__(self, "edges", edges)
            object.__setattr__(self, "densities", dens)
            if len(edges) != len(dens) + 1 or not dens:
                raise InvalidSpecError("table needs len(edges) == len(densities) + 1")
            if any(b <= a for a, b in zip(edges, edges[1:])):
                raise InvalidSpecError("table edges must increase")
            if any(d < 0 or not math.isfinite(d) for d in dens):
                raise InvalidSpecError("table densities must be finite and >= 0")
            if any(a < 0 < b for a, b in zip(edges, edges[1:])):
                raise InvalidSpecError("a table bin may not straddle 0")
        else:
            if not self.parts:
                raise InvalidSpecError("sum spec needs at least one part")
            object.__setattr__(self, "parts", tuple(self.parts))
        if not math.isfinite(self.bv_integral()):
            raise InvalidSpecError("measure violates int (1 ^ |x|) nu(dx) < inf")

    @classmethod
    def compound_poisson(cls, rate, law, drift=0.0):
        return cls("compound-poisson", rate=float(rate), law=law, drift=drift)

    @classmethod
    def stable_like(cls, c_pos, c_neg, alpha, cap=1.0, drift=0.0):
        return cls("stable-like", c_pos=float(c_pos), c_neg=float(c_neg), alpha=float(alpha),
                   cap=float(cap), drift=drift)

    @classmethod
    def table(cls, edges, densities, drift=0.0):
        return cls("user-table", edges=tuple(edges), densities=tuple(densities), drift=drift)

    @classmethod
    def superpose(cls, *parts, drift=0.0):
        return cls("sum", parts=tuple(parts), drift=drift)

    # -- measure functionals -------------------------------------------------

    def mass_above(self, eps):
        """``nu({|x| >= eps})``, finite for every eps > 0."""
        f = self.family
        if f == "compound-poisson":
            if self.law.kind == "point":
                return self.rate * float(abs(self.law.params[0]) >= eps)
            return self.rate * (1.0 - self.law.expect(lambda x: 1.0, -eps, eps))
        if f == "stable-like":
            return (self.c_pos + self.c_neg) * _stable_tail(eps, self.alpha, self.cap)
        if f == "user-table":
            return sum(d * _overlap(a, b, eps) for a, b, d in self._bins())
        return sum(p.mass_above(eps) for p in self.parts)

    def small_jump_variation(self, eps):
        """``int_{|x| < eps} |x| nu(dx)``, computed by quadrature."""
        f = self.family
        if f == "compound-poisson":
            return self.rate * self.law.expect(abs, -eps, eps)
        if f == "stable-like":
            top = min(eps, self.cap)
            a = self.alpha
            val, _ = integrate.quad(lambda x: x ** (-a), 0.0, top, limit=200)
            return (self.c_pos + self.c_neg) * val
        if f == "user-table":
            total = 0.0
            for lo, hi, d in self._bins():
                lo_c, hi_c = max(lo, -eps), min(hi, eps)
                if hi_c > lo_c:
                    total += d * integrate.quad(abs, lo_c, hi_c)[0]
            return total
        return sum(p.small_jump_variation(eps) for p in self.parts)

    def bv_integral(self):
        """``int (1 ^ |x|) nu(dx)``."""
        f = self.family
        if f == "compound-poisson":
            return self.rate * self.law.expect(lambda x: min(1.0, abs(x)))
        if f == "stable-like":
            a, r = self.alpha, self.cap
            small, _ = integrate.quad(lambda x: x ** (-a), 0.0, min(1.0, r), limit=200)
            large = _stable_tail(1.0, a, r) if r > 1.0 else 0.0
            return (self.c_pos + self.c_neg) * (small + large)
        if f == "user-table":
            return sum(d * integrate.quad(lambda x: min(1.0, abs(x)), lo, hi)[0]
                       for lo, hi, d in self._bins())
        return sum(p.bv_integral() for p in self.parts)

    @property
    def infinite(self):
        if self.family == "stable-like":
            return True
        if self.family == "sum":
            return any(p.infinite for p in self.parts)
        return False

    @property
    def has_positive_jumps(self):
        f = self.family
        if f == "compound-poisson":
            return self.rate > 0 and self.law.expect(lambda x: 1.0, 0.0, math.inf) > 0
        if f == "stable-like":
            return self.c_pos > 0
        if f == "user-table":
            return any(d > 0 and hi > 0 for lo, hi, d in self._bins())
        return any(p.has_positive_jumps for p in self.parts)

    def _bins(self):
        return list(zip(self.edges[:-1], self.edges[1:], self.densities))

    # -- serialization -------------------------------------------------------

    def to_dict(self):
        f = self.family
        out = {"family": f, "drift": self.drift}
        if f == "compound-poisson":
            out.update(rate=self.rate, law={"kind": self.law.kind, "params": list(self.law.params)})
        elif f == "stable-like":
            out.update(c_pos=self.c_pos, c_neg=self.c_neg, alpha=self.alpha, cap=self.cap)
        elif f == "user-table":
            out.update(edges=list(self.edges), densities=list(self.densities))
        else:
            out["parts"] = [p.to_dict() for p in self.parts]
        return out

    @classmethod
    def from_dict(cls, d):
        f = d.get("family")
        drift = d.get("drift", 0.0)
        if f == "compound-poisson":
            law = JumpLaw(d["law"]["kind"], tuple(d["law"]["params"]))
            return cls.compound_poisson(d["rate"], law, drift=drift)
        if f == "stable-like":
            return cls.stable_like(d["c_pos"], d["c_neg"], d["alpha"], d.get("cap", 1.0), drift=drift)
        if f == "user-table":
            return cls.table(d["edges"], d["densities"], drift=drift)
        if f == "sum":
            return cls.superpose(*(cls.from_dict(p) for p in d["parts"]), drift=drift)
        raise InvalidSpecError(f"unknown family {f!r}")


def _stable_tail(x, alpha, cap):
    """``int_x^cap y^{-1-alpha} dy`` (zero above the cap)."""
    if x >= cap:
        return 0.0
    return (x ** (-alpha) - cap ** (-alpha)) / alpha


def _stable_inverse_tail(u, c, alpha, cap):
    return (alpha * u / c + cap ** (-alpha)) ** (-1.0 / alpha)


def _overlap(lo, hi, eps):
    """Length of ``[lo, hi] ∩ {|x| >= eps}``."""
    if hi <= 0:
        lo, hi = -hi, -lo
    return max(0.0, hi - max(lo, eps))


# -- jump-path simulation ----------------------------------------------------


class TruncatedLevyPath(NamedTuple):
    path: JumpPath
    truncation_bias: float


def _check_horizon(horizon):
    t0, t1 = (float(h) for h in horizon)
    if not t1 > t0:
        raise InvalidParameterError(f"empty horizon [{t0}, {t1}]")
    return t0, t1


def _finite_component(spec, t0, t1, gen):
    """Times and sizes of a finite-measure component on ``[t0, t1]``."""
    length = t1 - t0
    if spec.family == "compound-poisson":
        count = gen.poisson(spec.rate * length)
        times = t0 + length * gen.random(count)
        sizes = spec.law.sample(gen, count)
        return times, sizes
    bins = spec._bins()
    weights = np.array([d * (hi - lo) for lo, hi, d in bins])
    total = weights.sum()
    count = gen.poisson(total * length) if total > 0 else 0
    times = t0 + length * gen.random(count)
    which = gen.choice(len(bins), size=count, p=weights / total) if count else np.zeros(0, int)
    lows = np.array([b[0] for b in bins])[which]
    highs = np.array([b[1] for b in bins])[which]
    sizes = lows + (highs - lows) * gen.random(count)
    return times, sizes


def _stable_side(c, alpha, cap, eps, t0, t1, gen):
    """Jumps of size in ``[eps, cap]`` for one side, largest first."""
    length = t1 - t0
    budget = length * c * _stable_tail(eps, alpha, cap)
    gammas, times = [], []
    level = 0.0
    while level <= budget:
        arrivals = level + np.cumsum(gen.standard_exponential(_CHUNK))
        stamps = t0 + length * gen.random(_CHUNK)
        gammas.append(arrivals)
        times.append(stamps)
        level = arrivals[-1]
    gammas = np.concatenate(gammas) if gammas else np.zeros(0)
    times = np.concatenate(times) if times else np.zeros(0)
    keep = gammas <= budget
    gammas, times = gammas[keep], times[keep]
    sizes = _stable_inverse_tail(gammas / length, c, alpha, cap)
    return times, sizes


def _components(spec, eps, t0, t1, stream, tag=0):
    f = spec.family
    if f == "sum":
        out = []
        for j, part in enumerate(spec.parts):
            out.extend(_components(part, eps, t0, t1, stream, tag * 64 + j + 1))
        return out
    if f == "stable-like":
        out = []
        for side, c in ((1, spec.c_pos), (-1, spec.c_neg)):
            if c > 0:
                gen = stream.substream(tag, 1 if side > 0 else 2).generator()
                times, sizes = _stable_side(c, spec.alpha, spec.cap, eps, t0, t1, gen)
                out.append((times, side * sizes))
        return out
    gen = stream.substream(tag, 0).generator()
    times, sizes = _finite_component(spec, t0, t1, gen)
    keep = np.abs(sizes) >= eps
    return [(times[keep], sizes[keep])]


def _assemble(pieces, t0, t1):
    if pieces:
        times = np.concatenate([p[0] for p in pieces])
        sizes = np.concatenate([p[1] for p in pieces])
    else:
        times = sizes = np.zeros(0)
    keep = (times > t0) & (sizes != 0)
    times, sizes = times[keep], sizes[keep]
    order = np.argsort(times, kind="stable")
    times, sizes = times[order], sizes[order]
    if times.size > 1:
        dup = np.concatenate(([False], np.diff(times) == 0))
        if dup.any():
            # Coincident jump times have probability zero; merge them if seen.
            groups = np.cumsum(~dup) - 1
            sizes = np.bincount(groups, weights=sizes)
            times = times[~dup]
    return JumpPath(t0, t1, times, sizes, 0.0)


def simulate_compound_poisson(spec, horizon, rng):
    """Compound Poisson path: Poisson(rate * length) jumps, iid uniform times."""
    if spec.family != "compound-poisson":
        raise InvalidSpecError("simulate_compound_poisson needs a compound-poisson spec")
    t0, t1 = _check_horizon(horizon)
    return _assemble(_components(spec, 0.0, t0, t1, rng), t0, t1)


def simulate_bv_levy(spec, eps, horizon, rng):
    """Pure-jump BV Lévy path keeping only jumps with ``|x| >= eps``.

    The discarded small jumps have expected total variation
    ``length * int_{|x| < eps} |x| nu(dx)``; that number is returned alongside
    the path as ``truncation_bias``.

    Raises:
        InvalidParameterError: if ``eps <= 0``.
        InvalidSpecError: if ``nu({|x| >= eps})`` is not finite.
    """
    if not (eps > 0 and math.isfinite(eps)):
        raise InvalidParameterError(f"truncation level must be positive, got {eps}")
    t0, t1 = _check_horizon(horizon)
    if not math.isfinite(spec.mass_above(eps)):
        raise InvalidSpecError("measure has infinite mass above the truncation level")
    path = _assemble(_components(spec, eps, t0, t1, rng), t0, t1)
    bias = (t1 - t0) * spec.small_jump_variation(eps)
    return TruncatedLevyPath(path, bias)


# -- Gaussian and Itô paths ----------------------------------------------------


def _increments(grid, gen):
    return gen.standard_normal(grid.n) * math.sqrt(grid.h)


def simulate_brownian(grid, rng):
    """Standard Brownian motion started at 0 on ``grid``."""
    db = _increments(grid, rng.generator())
    return GridPath(grid.t0, grid.h, np.concatenate(([0.0], np.cumsum(db))))


def simulate_ito(phi, psi, grid, rng, adapted=True, x0=0.0):
    """Euler–Maruyama path of ``dX = phi dB + psi da``.

    ``X[k+1] = X[k] + (phi_k dB_k + psi_k h)`` with coefficients evaluated at
    ``(t_k, X[k])``. With ``adapted=False`` the coefficients are functions of
    time only and are called once on the whole time array (``x`` is None).
    """
    gen = rng.generator()
    db = _increments(grid, gen)
    t = grid.times[:-1]
    h = grid.h
    if not adapted:
        ph = np.broadcast_to(np.asarray(phi(t, None), dtype=float), t.shape)
        ps = np.broadcast_to(np.asarray(psi(t, None), dtype=float), t.shape)
        bad = ~(np.isfinite(ph) & np.isfinite(ps))
        if bad.any():
            k = int(np.argmax(bad))
            raise SimulationError(f"non-finite coefficient at node {k}", node=k)
        steps = ph * db + ps * h
        return GridPath(grid.t0, h, np.concatenate(([x0], x0 + np.cumsum(steps))))
    x = np.empty(grid.n + 1)
    x[0] = x0
    for k in range(grid.n):
        a = float(phi(t[k], x[k]))
        b = float(psi(t[k], x[k]))
        if not (math.isfinite(a) and math.isfinite(b)):
            raise SimulationError(f"non-finite coefficient at node {k}", node=k)
        x[k + 1] = x[k] + (a * db[k] + b * h)
    return GridPath(grid.t0, h, x)


# -- empirical half-line regularity --------------------------------------------


@dataclass
class RegularityEstimate:
    eps: list
    p_up: list
    ci_up: list
    p_down: list
    ci_down: list
    informative: list
    replicas: int
    probe_window: float
    trend: str
    verdict: str

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _stays(path, window, sign):
    """True when the path, after its first jump, keeps ``sign * X > 0`` up to ``window``."""
    sizes = path.sizes[path.times <= window]
    if sizes.size == 0:
        return None
    levels = np.cumsum(sizes)
    return bool(np.all(sign * levels > 0))


def _wilson(k, n):
    if n == 0:
        return (0.0, 1.0)
    ci = stats.binomtest(k, n).proportion_ci(confidence_level=0.95, method="wilson")
    return (float(ci.low), float(ci.high))


def estimate_half_line_regularity(spec, eps_ladder, replicas, rng, probe_window=0.01, horizon_length=1.0):
    """Estimate ``P(R+)`` and ``P(R-)`` along a truncation ladder.

    For each ``eps`` a replica is informative when its truncated path jumps in
    ``(0, delta]`` (``delta = probe_window * horizon_length``); the estimate of
    ``P(R+)`` is the fraction of informative replicas that stay strictly
    positive from their first jump up to ``delta`` (``P(R-)`` likewise for
    staying negative). The same replica streams are reused across the ladder.

    Verdicts: ``likely-downwards`` when the finest ``P(R+)`` has a Wilson lower
    bound >= 0.9, ``likely-upwards`` when ``P(R-)`` does, and
    ``likely-non-dissymmetric`` when both upper bounds are < 0.9. Anything else
    is ``inconclusive``.
    """
    eps_ladder = [float(e) for e in eps_ladder]
    if any(b >= a for a, b in zip(eps_ladder, eps_ladder[1:])) or not eps_ladder:
        raise InvalidParameterError("eps ladder must be non-empty and strictly decreasing")
    if replicas < 100:
        raise InvalidParameterError("need at least 100 replicas")
    delta = probe_window * horizon_length
    up, down, n_inf = [], [], []
    for eps in eps_ladder:
        ku = kd = n = 0
        for r in range(replicas):
            path = simulate_bv_levy(spec, eps, (0.0, delta), rng.replica(r)).path
            s = _stays(path, delta, 1.0)
            if s is None:
                continue
            n += 1
            ku += s
            kd += _stays(path, delta, -1.0)
        up.append(ku)
        down.append(kd)
        n_inf.append(n)
    p_up = [k / n if n else float("nan") for k, n in zip(up, n_inf)]
    p_down = [k / n if n else float("nan") for k, n in zip(down, n_inf)]
    ci_up = [_wilson(k, n) for k, n in zip(up, n_inf)]
    ci_down = [_wilson(k, n) for k, n in zip(down, n_inf)]
    finite = [p for p in p_up if p == p]
    if len(finite) < 2:
        trend = "flat"
    elif all(b >= a for a, b in zip(finite, finite[1:])) and finite[-1] > finite[0]:
        trend = "increasing"
    elif all(b <= a for a, b in zip(finite, finite[1:])) and finite[-1] < finite[0]:
        trend = "decreasing"
    else:
        trend = "mixed" if finite[-1] != finite[0] else "flat"
    if n_inf[-1] == 0:
        verdict = "inconclusive"
    elif ci_up[-1][0] >= 0.9:
        verdict = "likely-downwards"
    elif ci_down[-1][0] >= 0.9:
        verdict = "likely-upwards"
    elif ci_up[-1][1] < 0.9 and ci_down[-1][1] < 0.9:
        verdict = "likely-non-dissymmetric"
    else:
        verdict = "inconclusive"
    return RegularityEstimate(eps_ladder, p_up, ci_up, p_down, ci_down, n_inf, replicas, delta, trend, verdict)
