"""Inviscid Burgers equation through the Hopf–Cole variational formula.

Every supremum ``sup_a [psi0(a) - (x - a)^2 / (2t)]`` is taken over the
skeleton of the initial potential. Writing it as
``-x^2/(2t) + sup_a [psi_t(a) + x a / t]`` with ``psi_t(a) = psi0(a) - a^2/(2t)``
shows that only the vertices of the concave majorant of ``psi_t`` matter, and
the maximizing vertex moves right as ``x`` grows, so a single sweep suffices.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .drift import DriftSpec, add_drift
from .errors import ContractViolation, InvalidParameterError, UndefinedDistanceError
from .hull import extremal_superior_times, hausdorff_distance, path_points, upper_hull
from .paths import GridPath, JumpPath, SampledPath

FACE_REL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PotentialField:
    """Drifted potential ``psi_t`` materialized on the skeleton of ``psi0``."""

    psi0: object
    t: float
    samples_per_gap: int = 16

    def __post_init__(self):
        t = float(self.t)
        if not (t > 0 and math.isfinite(t)):
            raise InvalidParameterError(f"time must be positive and finite, got {self.t}")
        object.__setattr__(self, "t", t)

    @cached_property
    def drifted(self):
        if isinstance(self.psi0, GridPath):
            return GridPath(self.psi0.t0, self.psi0.h,
                            self.psi0.values - self.psi0.times ** 2 / (2.0 * self.t))
        return add_drift(self.psi0, DriftSpec.parabolic_burgers(self.t), self.samples_per_gap)

    @cached_property
    def points(self):
        """Skeleton ``(a, psi_t*(a))`` the hull is computed on."""
        return path_points(self.drifted, "upper")

    @property
    def a(self):
        return self.points.t

    @property
    def values(self):
        return self.points.y

    @cached_property
    def initial_values(self):
        """``psi0*`` on the same skeleton."""
        if isinstance(self.psi0, GridPath):
            return self.psi0.values
        base = self.psi0
        if isinstance(base, JumpPath):
            base = add_drift(base, DriftSpec.zero(), self.samples_per_gap)
        return np.maximum(base.left, base.values)

    @cached_property
    def majorant(self):
        return upper_hull(self.points)

    @property
    def horizon(self):
        return (float(self.a[0]), float(self.a[-1]))


def drifted_potential(psi0, t, samples_per_gap=16):
    """``psi_t(a) = psi0(a) - a^2 / (2t)`` on the skeleton of ``psi0``."""
    if not isinstance(psi0, (JumpPath, GridPath, SampledPath)):
        raise ContractViolation(f"not a path: {type(psi0).__name__}")
    return PotentialField(psi0, t, samples_per_gap)


def _sorted_grid(x):
    x = np.asarray(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise ContractViolation("x-grid must be finite")
    if np.any(np.diff(x) < 0):
        raise ContractViolation("x-grid must be sorted")
    return x


def _argmax_vertices(field, x):
    m = field.majorant
    return _kernels.argmax_sweep(-m.slopes, x / field.t)


def hopf_cole_potential(field, x):
    """``psi(x, t)`` on a sorted ``x``-grid in ``O(n + len(x))``."""
    x = _sorted_grid(x)
    m = field.majorant
    j = _argmax_vertices(field, x)
    a = m.t[j]
    return m.y[j] + x * a / field.t - x * x / (2.0 * field.t)


def hopf_cole_envelope(field, x):
    """``psi(x, t) + x^2 / (2t)``, the convex envelope ``sup_a [psi_t(a) + x a / t]``."""
    x = _sorted_grid(x)
    m = field.majorant
    j = _argmax_vertices(field, x)
    return m.y[j] + x * m.t[j] / field.t


def inverse_lagrangian(field, x):
    """Largest skeleton abscissa maximizing ``psi0(a) - (x - a)^2 / (2t)``."""
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(xs)):
        raise ContractViolation("x must be finite")
    order = np.argsort(xs, kind="stable")
    out = np.empty(xs.size)
    out[order] = field.majorant.t[_argmax_vertices(field, xs[order])]
    return float(out[0]) if scalar else out


def lagrangian(field, a):
    """``x(a, t) = -t * (right slope of the majorant of psi_t at a)``.

    At the right end of the horizon the left slope is used.
    """
    scalar = np.ndim(a) == 0
    av = np.atleast_1d(np.asarray(a, dtype=float))
    lo, hi = field.horizon
    if np.any((av < lo) | (av > hi)) or not np.all(np.isfinite(av)):
        raise ContractViolation(f"a outside horizon [{lo}, {hi}]")
    m = field.majorant
    if len(m) < 2:
        raise ContractViolation("a one-point skeleton has no Lagrangian map")
    k = np.clip(np.searchsorted(m.t, av, side="right") - 1, 0, len(m) - 2)
    out = -field.t * m.slopes[k]
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class ShockInterval:
    a_left: float
    a_right: float
    x: float
    mass: float


@dataclass(frozen=True, eq=False)
class ShockStructure:
    t: float
    shocks: tuple
    regular: np.ndarray = field(default_factory=lambda: np.zeros(0))
    regular_measure: float = 0.0

    @property
    def shock_mass(self):
        return math.fsum(s.mass for s in self.shocks)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["a_left", "a_right", "x", "mass"])
        w.writerows((repr(s.a_left), repr(s.a_right), repr(s.x), repr(s.mass)) for s in self.shocks)
        return buf.getvalue()

    def to_json(self):
        return json.dumps({
            "t": self.t,
            "shocks": [[s.a_left, s.a_right, s.x, s.mass] for s in self.shocks],
            "regular": [float(v) for v in self.regular],
            "regular_measure": self.regular_measure,
        })


def majorant_faces(m, rel_tol=FACE_REL_TOL):
    """Maximal linear faces of a majorant as ``(i, j)`` vertex-index pairs."""
    s = m.slopes
    if s.size == 0:
        return []
    faces = []
    start = 0
    for k in range(1, s.size):
        scale = max(abs(s[k - 1]), abs(s[k])) or 1.0
        if abs(s[k - 1] - s[k]) >= rel_tol * scale:
            faces.append((start, k))
            start = k
    faces.append((start, s.size))
    return faces


def face_location(field, i, j):
    """Smallest float ``x`` at which the maximizer has reached the end of face ``(i, j)``.

    In exact arithmetic this is ``-t * slope``; the result is nudged so that
    the sweep's comparison ``-slope <= x / t`` holds at ``x`` and fails just
    below it.
    """
    m = field.majorant
    neg = -m.slopes[j - 1]
    x = neg * field.t
    while x / field.t < neg:
        x = np.nextafter(x, np.inf)
    while np.nextafter(x, -np.inf) / field.t >= neg:
        x = np.nextafter(x, -np.inf)
    return float(x)


def shock_intervals(field):
    """Faces of the majorant of ``psi_t`` spanning more than one skeleton cell.

    Each such face ``[a_left, a_right)`` is a clump of mass ``a_right - a_left``
    sitting at ``x = -t * slope``. Single-cell faces are regular; their
    vertices form the regular set and their lengths the regular measure.
    """
    m = field.majorant
    shocks = []
    regular = set()
    regular_cells = []
    for i, j in majorant_faces(m):
        gi, gj = int(m.index[i]), int(m.index[j])
        slope = (m.y[j] - m.y[i]) / (m.t[j] - m.t[i])
        if gj - gi > 1:
            shocks.append(ShockInterval(float(m.t[i]), float(m.t[j]), float(-field.t * slope),
                                        float(m.t[j] - m.t[i])))
        else:
            regular.update((float(m.t[i]), float(m.t[j])))
            regular_cells.append(float(m.t[j] - m.t[i]))
    for s in shocks:
        regular.discard(s.a_left)
        regular.discard(s.a_right)
    return ShockStructure(field.t, tuple(shocks), np.array(sorted(regular)), math.fsum(regular_cells))


def velocity_field(field, x):
    """``v(x, t) = -d psi / dx`` as forward differences on the x-grid."""
    x = _sorted_grid(x)
    psi = hopf_cole_potential(field, x)
    return -np.diff(psi) / np.diff(x)


def potential_to_csv(x, psi):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "psi"])
    w.writerows((repr(float(a)), repr(float(b))) for a, b in zip(x, psi))
    return buf.getvalue()


def lagrangian_to_csv(a, x):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "x"])
    w.writerows((repr(float(u)), repr(float(v))) for u, v in zip(a, x))
    return buf.getvalue()


def superior_times_of_initial(psi0, samples_per_gap=16):
    """``E+(psi0)`` on the same skeleton the drifted potentials use."""
    if isinstance(psi0, JumpPath):
        psi0 = add_drift(psi0, DriftSpec.zero(), samples_per_gap)
    return extremal_superior_times(psi0).times


def shock_convergence_experiment(psi0, t_ladder, samples_per_gap=16):
    """``d_H(E+(psi_t), E+(psi0))`` along an increasing ``t``-ladder.

    Returns ``{"t", "distance", "inversions"}`` where ``inversions`` counts
    consecutive increases of the distance.
    """
    ts = [float(t) for t in t_ladder]
    if not ts or any(b <= a for a, b in zip(ts, ts[1:])):
        raise ContractViolation("t-ladder must be non-empty and increasing")
    base = superior_times_of_initial(psi0, samples_per_gap)
    if base.size == 0:
        raise UndefinedDistanceError("E+ of the initial potential is empty")
    dist = []
    for t in ts:
        f = drifted_potential(psi0, t, samples_per_gap)
        dist.append(hausdorff_distance(f.majorant.t, base))
    inversions = sum(1 for a, b in zip(dist, dist[1:]) if b > a)
    return {"t": ts, "distance": dist, "inversions": inversions}

