"""Concave majorants and extremal times of càdlàg paths.

The upper hull of a path is taken over a finite point skeleton: grid samples
for a ``GridPath``; ``(a, X*(a))`` at every jump plus the horizon endpoints for
a ``JumpPath`` (the path is flat in between, so nothing else can be a vertex).
Middle points of collinear triples are never vertices.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ContractViolation, UndefinedDistanceError
from .paths import GridPath, JumpPath, SampledPath, negate

GRID_SAMPLE, PRE_JUMP, POST_JUMP = 0, 1, 2
TAG_NAMES = ("grid-sample", "pre-jump", "post-jump")


@dataclass(frozen=True, eq=False)
class PointSequence:
    t: np.ndarray
    y: np.ndarray
    tags: np.ndarray = None

    def __post_init__(self):
        t = np.array(self.t, dtype=np.float64).reshape(-1)
        y = np.array(self.y, dtype=np.float64).reshape(-1)
        tags = np.zeros(t.size, np.int8) if self.tags is None else np.array(self.tags, np.int8)
        for arr in (t, y, tags):
            arr.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "tags", tags)
        if not (t.shape == y.shape == tags.shape):
            raise ContractViolation("abscissae, ordinates and tags differ in length")

    def __len__(self):
        return int(self.t.size)

    def negated(self):
        return PointSequence(self.t, -self.y, self.tags)


@dataclass(frozen=True, eq=False)
class MajorantPL:
    """Concave piecewise-linear function through ``(t[i], y[i])``.

    ``index`` maps each vertex to its position in the point sequence the hull
    was built from.
    """

    t: np.ndarray
    y: np.ndarray
    index: np.ndarray = None

    def __post_init__(self):
        for name in ("t", "y"):
            arr = np.array(getattr(self, name), dtype=np.float64).reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.index is not None:
            idx = np.array(self.index, dtype=np.int64)
            idx.setflags(write=False)
            object.__setattr__(self, "index", idx)

    def __len__(self):
        return int(self.t.size)

    @property
    def slopes(self):
        return np.diff(self.y) / np.diff(self.t)

    def __call__(self, a):
        out = np.interp(np.asarray(a, dtype=float), self.t, self.y)
        return float(out) if np.ndim(out) == 0 else out

    def to_json(self):
        return json.dumps([[float(a), float(b)] for a, b in zip(self.t, self.y)])

    @classmethod
    def from_json(cls, text):
        rows = json.loads(text)
        return cls([r[0] for r in rows], [r[1] for r in rows])

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "value"])
        w.writerows((repr(float(a)), repr(float(b))) for a, b in zip(self.t, self.y))
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class ExtremalSet:
    times: np.ndarray
    is_jump: np.ndarray
    is_T: np.ndarray
    side: str = "superior"

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64).reshape(-1)
        is_jump = np.array(self.is_jump, dtype=bool).reshape(-1)
        is_T = np.array(self.is_T, dtype=bool).reshape(-1)
        for arr in (times, is_jump, is_T):
            arr.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "is_jump", is_jump)
        object.__setattr__(self, "is_T", is_T)
        if np.any(np.diff(times) <= 0):
            raise ContractViolation("extremal times must be sorted and distinct")
        if self.side not in ("superior", "inferior"):
            raise ContractViolation(f"unknown side {self.side!r}")

    def __len__(self):
        return int(self.times.size)

    @property
    def T(self):
        hit = np.flatnonzero(self.is_T)
        return float(self.times[hit[0]]) if hit.size else None

    def to_json(self):
        return json.dumps([
            [float(t), {"is_jump": bool(j), "is_T": bool(m)}]
            for t, j, m in zip(self.times, self.is_jump, self.is_T)
        ])

    @classmethod
    def from_json(cls, text, side="superior"):
        rows = json.loads(text)
        return cls([r[0] for r in rows], [r[1]["is_jump"] for r in rows],
                   [r[1]["is_T"] for r in rows], side)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "is_jump", "is_T"])
        w.writerows((repr(float(t)), int(j), int(m)) for t, j, m in zip(self.times, self.is_jump, self.is_T))
        return buf.getvalue()


def upper_hull(points, eps=0.0):
    """Vertices of the least concave function above ``points`` (monotone chain).

    Abscissae must be strictly increasing. ``eps`` > 0 also drops middle
    points that rise above a chord by less than ``eps`` (cross-product units);
    the default keeps exact orientation tests.
    """
    if len(points) == 0:
        raise ContractViolation("upper hull of an empty point set")
    t, y = points.t, points.y
    if np.any(np.diff(t) <= 0):
        raise ContractViolation("points must have strictly increasing abscissae")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(y))):
        raise ContractViolation("points must be finite")
    idx = _kernels.upper_chain(t, y, float(eps))
    return MajorantPL(t[idx], y[idx], idx)


def lower_hull(points, eps=0.0):
    """Convex minorant: the negated upper hull of the negated ordinates."""
    m = upper_hull(points.negated(), eps)
    return MajorantPL(m.t, -m.y, m.index)


def path_points(path, side="upper"):
    """Point skeleton the hull of ``path`` is computed on."""
    pick = np.maximum if side == "upper" else np.minimum
    if isinstance(path, GridPath):
        return PointSequence(path.times, path.values)
    if isinstance(path, SampledPath):
        y = pick(path.left, path.values)
        tags = np.where(path.jump_mask, np.where(y == path.values, POST_JUMP, PRE_JUMP), GRID_SAMPLE)
        return PointSequence(path.times, y, tags)
    if isinstance(path, JumpPath):
        post = path.post_values
        pre = path.pre_values
        star = pick(pre, post)
        tags = np.where(star == post, POST_JUMP, PRE_JUMP)
        t = np.concatenate(([path.t0], path.times))
        y = np.concatenate(([path.initial], star))
        tg = np.concatenate(([GRID_SAMPLE], tags))
        if not (path.times.size and path.times[-1] == path.t1):
            t = np.append(t, path.t1)
            y = np.append(y, path.value(path.t1))
            tg = np.append(tg, GRID_SAMPLE)
        return PointSequence(t, y, tg)
    raise ContractViolation(f"not a path: {type(path).__name__}")


def concave_majorant_of_path(path, eps=0.0):
    points = path_points(path, "upper")
    return upper_hull(points, eps), points


def convex_minorant_of_path(path, eps=0.0):
    points = path_points(path, "lower")
    return lower_hull(points, eps), points


def _positive_jump_times(path):
    if isinstance(path, JumpPath):
        return path.times[path.sizes > 0]
    if isinstance(path, SampledPath):
        return path.times[path.values > path.left]
    return np.zeros(0)


def argmax_times(path):
    """First and last times at which ``X*`` attains ``sup X*``."""
    pts = path_points(path, "upper")
    top = pts.y.max()
    hit = np.flatnonzero(pts.y == top)
    return float(pts.t[hit[0]]), float(pts.t[hit[-1]])


def extremal_superior_times(path, eps=0.0):
    """Abscissae of the majorant vertices, with jump and argmax flags.

    ``is_jump`` marks times where the path jumps upwards; ``is_T`` marks the
    last time at which ``X*`` attains its supremum.
    """
    m, points = concave_majorant_of_path(path, eps)
    jumps = _positive_jump_times(path)
    is_jump = np.isin(m.t, jumps)
    _, last = argmax_times(path)
    return ExtremalSet(m.t, is_jump, m.t == last, "superior")


def extremal_inferior_times(path, eps=0.0):
    """``E-(X)``, computed as ``E+(-X)`` (flags refer to ``-X``)."""
    e = extremal_superior_times(negate(path), eps)
    return ExtremalSet(e.times, e.is_jump, e.is_T, "inferior")


def extremal_times(path):
    """Sorted union of the superior and inferior extremal times."""
    return np.union1d(extremal_superior_times(path).times, extremal_inferior_times(path).times)


def majorant_slope(m, a, side):
    """Slope of the majorant segment on the given side of ``a``."""
    t = m.t
    if side not in ("left", "right"):
        raise ContractViolation(f"side must be 'left' or 'right', got {side!r}")
    if len(m) < 2:
        raise ContractViolation("a single-vertex majorant has no slopes")
    if not (t[0] <= a <= t[-1]):
        raise ContractViolation(f"time {a} outside [{t[0]}, {t[-1]}]")
    if side == "left":
        if a == t[0]:
            raise ContractViolation("no left slope at the first vertex")
        k = int(np.searchsorted(t, a, side="left")) - 1
    else:
        if a == t[-1]:
            raise ContractViolation("no right slope at the last vertex")
        k = int(np.searchsorted(t, a, side="right")) - 1
    return float((m.y[k + 1] - m.y[k]) / (t[k + 1] - t[k]))


def hausdorff_distance(a, b):
    """Hausdorff distance between two finite sorted sets of reals."""
    a = np.asarray(getattr(a, "times", a), dtype=np.float64).reshape(-1)
    b = np.asarray(getattr(b, "times", b), dtype=np.float64).reshape(-1)
    if a.size == 0 or b.size == 0:
        raise UndefinedDistanceError("Hausdorff distance needs two non-empty sets")
    if np.any(np.diff(a) < 0) or np.any(np.diff(b) < 0):
        raise ContractViolation("sets must be sorted")
    return max(_kernels.directed_hausdorff(a, b), _kernels.directed_hausdorff(b, a))


def lebesgue_estimate(times, width, origin=0.0):
    """Total length of the width-``w`` cells (anchored at ``origin``) hit by ``times``."""
    if not width > 0:
        raise ContractViolation("cell width must be positive")
    t = np.asarray(getattr(times, "times", times), dtype=np.float64)
    if t.size == 0:
        return 0.0
    cells = np.unique(np.floor((t - origin) / width))
    return float(cells.size * width)


def check_clear_condition(path, tol):
    """True iff every non-vertex skeleton point sits more than ``tol`` below the majorant."""
    m, points = concave_majorant_of_path(path)
    off = np.ones(len(points), bool)
    off[m.index] = False
    if not off.any():
        return True
    gap = m(points.t[off]) - points.y[off]
    return bool(np.all(gap > tol))


def face_count(m, rel_tol=0.0):
    """Number of maximal linear faces; slopes closer than ``rel_tol`` merge."""
    s = m.slopes
    if s.size == 0:
        return 0
    if rel_tol == 0.0:
        return int(s.size)
    scale = np.maximum(np.abs(s[:-1]), np.abs(s[1:]))
    same = np.abs(s[:-1] - s[1:]) <= rel_tol * np.where(scale > 0, scale, 1.0)
    return int(s.size - np.count_nonzero(same))

