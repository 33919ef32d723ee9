"""Path containers and the transforms the extremal-set results are phrased in.

Three càdlàg carriers are used throughout the package:

``JumpPath``
    piecewise constant, given by its jump times and sizes (pure-jump BV Lévy
    realizations);
``GridPath``
    samples on a uniform grid (Brownian, Itô, integrated paths);
``SampledPath``
    a non-uniform skeleton that keeps both one-sided values at each node. It is
    what a jump path becomes once a smooth drift is added.

All three are immutable; arrays are flagged read-only on construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ContractViolation, InvalidParameterError


def _frozen(values, dtype=np.float64):
    arr = np.array(values, dtype=dtype, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid:
    t0: float
    h: float
    n: int

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise InvalidParameterError(f"grid step must be positive, got {self.h}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameterError(f"grid needs n >= 1 steps, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def over(cls, t0, t1, n):
        """Uniform grid with ``n`` steps covering ``[t0, t1]``."""
        return cls(float(t0), (float(t1) - float(t0)) / n, n)

    @property
    def t1(self):
        return self.t0 + self.n * self.h

    @property
    def times(self):
        return self.t0 + self.h * np.arange(self.n + 1)


@dataclass(frozen=True, eq=False)
class JumpPath:
    """Piecewise-constant càdlàg path on ``[t0, t1]``.

    ``X(a) = initial + sum(sizes[times <= a])``; the left limit at ``a`` leaves
    out a jump located exactly at ``a``. Jump times lie in ``(t0, t1]``.
    """

    t0: float
    t1: float
    times: np.ndarray
    sizes: np.ndarray
    initial: float = 0.0

    def __post_init__(self):
        times = _frozen(self.times)
        sizes = _frozen(self.sizes)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "t1", float(self.t1))
        object.__setattr__(self, "initial", float(self.initial))
        if not self.t1 > self.t0:
            raise ContractViolation(f"empty horizon [{self.t0}, {self.t1}]")
        if times.shape != sizes.shape:
            raise ContractViolation("times and sizes differ in length")
        if times.size:
            if np.any(np.diff(times) <= 0):
                raise ContractViolation("jump times must be strictly increasing")
            if times[0] <= self.t0 or times[-1] > self.t1:
                raise ContractViolation("jump times must lie in (t0, t1]")

    @property
    def horizon(self):
        return (self.t0, self.t1)

    @property
    def post_values(self):
        """Path value right after each jump."""
        return self.initial + np.cumsum(self.sizes)

    @property
    def pre_values(self):
        post = self.post_values
        if post.size == 0:
            return post
        return np.concatenate(([self.initial], post[:-1]))

    def value(self, a):
        a = np.asarray(a, dtype=float)
        k = np.searchsorted(self.times, a, side="right")
        return _cumulative_at(self.initial, self.sizes, k)

    def left_limit(self, a):
        a = np.asarray(a, dtype=float)
        k = np.searchsorted(self.times, a, side="left")
        return _cumulative_at(self.initial, self.sizes, k)

    @property
    def terminal(self):
        return float(self.value(self.t1))

    @property
    def total_variation(self):
        return float(np.sum(np.abs(self.sizes)))

    def __len__(self):
        return int(self.times.size)


def _cumulative_at(initial, sizes, k):
    levels = np.concatenate(([initial], initial + np.cumsum(sizes)))
    out = levels[k]
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class GridPath:
    """Path sampled on the uniform grid ``t0 + k h``, ``k = 0..n``."""

    t0: float
    h: float
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "h", float(self.h))
        if not self.h > 0:
            raise ContractViolation(f"grid step must be positive, got {self.h}")
        if values.size < 2:
            raise ContractViolation("a grid path needs at least two samples")

    @property
    def n(self):
        return self.values.size - 1

    @property
    def grid(self):
        return Grid(self.t0, self.h, self.n)

    @property
    def t1(self):
        return self.t0 + self.n * self.h

    @property
    def horizon(self):
        return (self.t0, self.t1)

    @property
    def times(self):
        return self.t0 + self.h * np.arange(self.values.size)

    def value(self, a):
        # Linear interpolation between samples; exact at grid nodes.
        out = np.interp(np.asarray(a, dtype=float), self.times, self.values)
        return float(out) if np.ndim(out) == 0 else out

    left_limit = value

    @property
    def terminal(self):
        return float(self.values[-1])

    @property
    def total_variation(self):
        return float(np.sum(np.abs(np.diff(self.values))))


@dataclass(frozen=True, eq=False)
class SampledPath:
    """Non-uniform skeleton of a càdlàg path.

    ``values[i]`` is the path at ``times[i]`` and ``left[i]`` its left limit
    there; they differ only at jump nodes. The first and last nodes are the
    horizon endpoints.
    """

    times: np.ndarray
    values: np.ndarray
    left: np.ndarray

    def __post_init__(self):
        times = _frozen(self.times)
        values = _frozen(self.values)
        left = _frozen(self.left)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "left", left)
        if not (times.shape == values.shape == left.shape):
            raise ContractViolation("times, values and left limits differ in length")
        if times.size < 2 or np.any(np.diff(times) <= 0):
            raise ContractViolation("skeleton times must be strictly increasing")

    @property
    def t0(self):
        return float(self.times[0])

    @property
    def t1(self):
        return float(self.times[-1])

    @property
    def horizon(self):
        return (self.t0, self.t1)

    @property
    def jump_mask(self):
        return self.values != self.left

    def value(self, a):
        k = np.searchsorted(self.times, np.asarray(a, dtype=float), side="right") - 1
        out = self.values[np.clip(k, 0, self.times.size - 1)]
        return float(out) if np.ndim(out) == 0 else out

    @property
    def terminal(self):
        return float(self.values[-1])


Path = Union[JumpPath, GridPath, SampledPath]


def _check_in_horizon(path, a):
    t0, t1 = path.horizon
    if not (t0 <= a <= t1):
        raise ContractViolation(f"time {a} outside horizon [{t0}, {t1}]")


def star_value(path, a):
    """``max(X(a-), X(a))``: the graph point the upper hull sees at ``a``."""
    _check_in_horizon(path, a)
    if isinstance(path, SampledPath):
        i = np.searchsorted(path.times, a)
        if i < path.times.size and path.times[i] == a:
            return float(max(path.left[i], path.values[i]))
        return path.value(a)
    return float(max(path.left_limit(a), path.value(a)))


def negate(path):
    if isinstance(path, JumpPath):
        return JumpPath(path.t0, path.t1, path.times, -path.sizes, -path.initial)
    if isinstance(path, GridPath):
        return GridPath(path.t0, path.h, -path.values)
    return SampledPath(path.times, -path.values, -path.left)


def integrate_path(path, n=1024):
    """Primitive ``Z(a) = int_{t0}^a X``, with ``Z(t0) = 0``, as a GridPath.

    A grid path is integrated with the trapezoidal rule on its own grid. A jump
    path is integrated exactly and the (piecewise linear) primitive is sampled
    on a uniform grid of ``n`` steps.
    """
    if isinstance(path, GridPath):
        v = path.values
        steps = 0.5 * path.h * (v[:-1] + v[1:])
        return GridPath(path.t0, path.h, np.concatenate(([0.0], np.cumsum(steps))))
    if isinstance(path, JumpPath):
        grid = Grid.over(path.t0, path.t1, n)
        s = grid.times
        s[-1] = path.t1
        k = np.searchsorted(path.times, s, side="right")
        mass = np.concatenate(([0.0], np.cumsum(path.sizes)))
        moment = np.concatenate(([0.0], np.cumsum(path.sizes * path.times)))
        z = path.initial * (s - path.t0) + mass[k] * s - moment[k]
        return GridPath(grid.t0, grid.h, z)
    raise ContractViolation("integrate_path accepts JumpPath or GridPath")


def reverse_path(path, a):
    """Path seen backwards from ``a``: ``s -> X(a) - X((a - s)-)`` on ``[0, a - t0]``.

    Jump sizes keep their sign and move to mirrored times ``a - tau``; a jump
    sitting exactly at ``a`` becomes the initial value.
    """
    _check_in_horizon(path, a)
    if isinstance(path, JumpPath):
        if a == path.t0:
            raise ContractViolation("reversal point must lie strictly after t0")
        keep = path.times < a
        times = (a - path.times[keep])[::-1]
        sizes = path.sizes[keep][::-1]
        return JumpPath(0.0, a - path.t0, times, sizes, path.value(a) - path.left_limit(a))
    if isinstance(path, GridPath):
        m = (a - path.t0) / path.h
        k = int(round(m))
        if abs(m - k) > 1e-9 or k < 1:
            raise ContractViolation("reversal point must be a grid node after t0")
        head = path.values[: k + 1]
        return GridPath(0.0, path.h, head[k] - head[::-1])
    raise ContractViolation("reverse_path accepts JumpPath or GridPath")


def translate_path(path, shift):
    """``theta_T``: ``a -> X(T + a)``, restricted to times kept inside the horizon.

    The result lives on ``[t0, t1] ∩ [t0 - T, t1 - T]``.
    """
    t0, t1 = path.horizon
    lo, hi = max(t0, t0 - shift), min(t1, t1 - shift)
    if not hi > lo:
        raise ContractViolation(f"shift {shift} leaves no common domain")
    if isinstance(path, JumpPath):
        start = path.value(lo + shift)
        keep = (path.times > lo + shift) & (path.times <= hi + shift)
        return JumpPath(lo, hi, path.times[keep] - shift, path.sizes[keep], start)
    if isinstance(path, GridPath):
        m = shift / path.h
        k = int(round(m))
        if abs(m - k) > 1e-9:
            raise ContractViolation("grid paths translate by whole grid steps only")
        if k >= 0:
            vals = path.values[k:]
            return GridPath(path.t0, path.h, vals)
        vals = path.values[: path.values.size + k]
        return GridPath(path.t0 - k * path.h, path.h, vals)
    raise ContractViolation("translate_path accepts JumpPath or GridPath")


def path_to_dict(path):
    if isinstance(path, JumpPath):
        return {
            "kind": "jump",
            "horizon": [path.t0, path.t1],
            "times": path.times.tolist(),
            "sizes": path.sizes.tolist(),
            "initial": path.initial,
        }
    if isinstance(path, GridPath):
        return {"kind": "grid", "t0": path.t0, "h": path.h, "values": path.values.tolist()}
    if isinstance(path, SampledPath):
        return {
            "kind": "sampled",
            "times": path.times.tolist(),
            "values": path.values.tolist(),
            "left": path.left.tolist(),
        }
    raise TypeError(f"not a path: {type(path).__name__}")


def path_from_dict(data):
    kind = data.get("kind")
    if kind == "jump":
        t0, t1 = data["horizon"]
        return JumpPath(t0, t1, data["times"], data["sizes"], data.get("initial", 0.0))
    if kind == "grid":
        return GridPath(data["t0"], data["h"], data["values"])
    if kind == "sampled":
        return SampledPath(data["times"], data["values"], data["left"])
    raise ContractViolation(f"unknown path kind {kind!r}")


def dumps_path(path):
    return json.dumps(path_to_dict(path))


def loads_path(text):
    return path_from_dict(json.loads(text))


def paths_equal(p, q):
    """Exact structural equality (used for determinism checks)."""
    if type(p) is not type(q):
        return False
    return path_to_dict(p) == path_to_dict(q)
