"""Sticky particles on the line and the hull description of their final clumps.

Particles move freely and merge on contact, keeping mass and momentum. With
unit masses, the final clumps are read off the concave majorant of the
potential ``psi(0) = 0``, ``psi(k + 1) = psi(k) - v_k``: each block starts at an
extremal superior time of ``psi``.
"""

from __future__ import annotations

import csv
import heapq
import io
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ContractViolation, DegenerateInputError
from .hull import PointSequence, upper_hull


@dataclass(frozen=True)
class Clump:
    """A clump moving at ``velocity``; it sat at ``position`` at time ``t_ref``."""

    mass: float
    velocity: float
    position: float
    t_ref: float
    lo: int
    hi: int

    def at(self, t):
        return self.position + self.velocity * (t - self.t_ref)

    @property
    def momentum(self):
        return self.mass * self.velocity


@dataclass(frozen=True)
class ClumpSystem:
    clumps: tuple
    clock: float = 0.0

    def __len__(self):
        return len(self.clumps)

    def positions(self, t=None):
        t = self.clock if t is None else t
        return np.array([c.at(t) for c in self.clumps])

    @property
    def velocities(self):
        return np.array([c.velocity for c in self.clumps])

    @property
    def total_mass(self):
        return math.fsum(c.mass for c in self.clumps)

    @property
    def total_momentum(self):
        return math.fsum(c.momentum for c in self.clumps)

    @property
    def partition(self):
        return [(c.lo, c.hi) for c in self.clumps]


@dataclass(frozen=True)
class CollisionEvent:
    """Impact of the clump starting at particle ``left_index`` with its right neighbour."""

    left_index: int
    t: float
    x: float


def init_system(positions, velocities):
    """Unit-mass singleton clumps at clock 0."""
    x = np.asarray(positions, dtype=float).reshape(-1)
    v = np.asarray(velocities, dtype=float).reshape(-1)
    if x.size != v.size or x.size == 0:
        raise ContractViolation("need as many positions as velocities, at least one")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
        raise ContractViolation("positions and velocities must be finite")
    if np.any(np.diff(x) <= 0):
        raise ContractViolation("positions must be strictly increasing")
    return ClumpSystem(tuple(Clump(1.0, float(vk), float(xk), 0.0, k, k)
                             for k, (xk, vk) in enumerate(zip(x, v))))


def _impact(left, right):
    # Time at which the two trajectories meet (left must be faster).
    num = (right.position - right.velocity * right.t_ref) - (left.position - left.velocity * left.t_ref)
    return num / (left.velocity - right.velocity)


def next_collision(system):
    """Earliest adjacent impact; ties go to the smaller left index."""
    best = None
    cs = system.clumps
    for left, right in zip(cs, cs[1:]):
        if left.velocity > right.velocity:
            t = max(_impact(left, right), system.clock)
            if best is None or t < best.t:
                best = CollisionEvent(left.lo, t, left.at(t))
    return best


def _merged(left, right, t, x):
    m = left.mass + right.mass
    v = (left.momentum + right.momentum) / m
    return Clump(m, v, x, t, left.lo, right.hi)


def merge(system, event):
    """Replace the colliding pair by one clump at the impact point."""
    cs = system.clumps
    i = next((k for k, c in enumerate(cs) if c.lo == event.left_index), None)
    if i is None or i + 1 >= len(cs):
        raise ContractViolation(f"stale event: no adjacent pair starts at particle {event.left_index}")
    left, right = cs[i], cs[i + 1]
    if left.velocity == right.velocity:
        raise ContractViolation("clumps with equal velocities never collide")
    if left.velocity < right.velocity:
        raise ContractViolation("stale event: the pair is separating")
    t = max(_impact(left, right), system.clock)
    if event.t < system.clock or not math.isclose(t, event.t, rel_tol=1e-12, abs_tol=1e-12):
        raise ContractViolation(f"stale event: impact at {t}, event says {event.t}")
    new = _merged(left, right, event.t, event.x)
    return replace(system, clumps=cs[:i] + (new,) + cs[i + 2:], clock=event.t)


def run_to_completion(system):
    """Process collisions until velocities are nondecreasing left to right.

    Uses a priority queue keyed by ``(time, left index)`` with lazy
    invalidation. Returns the final system and the list of events.
    """
    cs = list(system.clumps)
    n = len(cs)
    clumps = {c.lo: c for c in cs}
    nxt = {c.lo: (cs[k + 1].lo if k + 1 < n else None) for k, c in enumerate(cs)}
    prv = {c.lo: (cs[k - 1].lo if k > 0 else None) for k, c in enumerate(cs)}
    version = {c.lo: 0 for c in cs}
    clock = system.clock
    heap = []

    def push(lo):
        ro = nxt[lo]
        if lo is None or ro is None:
            return
        left, right = clumps[lo], clumps[ro]
        if left.velocity > right.velocity:
            t = max(_impact(left, right), clock)
            heapq.heappush(heap, (t, lo, version[lo], version[ro]))

    for c in cs:
        push(c.lo)
    events = []
    while heap:
        t, lo, vl, vr = heapq.heappop(heap)
        ro = nxt.get(lo)
        if lo not in clumps or ro is None or version[lo] != vl or version[ro] != vr:
            continue
        left, right = clumps[lo], clumps[ro]
        clock = t
        new = _merged(left, right, t, left.at(t))
        del clumps[ro]
        clumps[lo] = new
        version[lo] += 1
        nxt[lo] = nxt[ro]
        if nxt[ro] is not None:
            prv[nxt[ro]] = lo
        events.append(CollisionEvent(lo, t, new.position))
        push(lo)
        if prv[lo] is not None:
            push(prv[lo])
    ordered = []
    lo = cs[0].lo if cs else None
    while lo is not None:
        ordered.append(clumps[lo])
        lo = nxt[lo]
    return ClumpSystem(tuple(ordered), clock), events


def events_to_csv(events, system=None):
    """Event log with columns ``t,left_index,x,mass_new,v_new``.

    Mass and velocity of the merged clump are recomputed by replaying the
    events on ``system`` when it is given; otherwise those columns are empty.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "left_index", "x", "mass_new", "v_new"])
    state = system
    for e in events:
        if state is not None:
            state = merge(state, e)
            c = next(c for c in state.clumps if c.lo == e.left_index)
            w.writerow([repr(e.t), e.left_index, repr(e.x), repr(c.mass), repr(c.velocity)])
        else:
            w.writerow([repr(e.t), e.left_index, repr(e.x), "", ""])
    return buf.getvalue()


def potential_of_velocities(velocities):
    """``psi`` on ``0..N`` with ``psi(k + 1) - psi(k) = -v_k``."""
    v = np.asarray(velocities, dtype=float).reshape(-1)
    return np.concatenate(([0.0], -np.cumsum(v)))


def partition_oracle(velocities):
    """Final clumps predicted by the concave majorant of the potential.

    Raises ``DegenerateInputError`` when a skeleton point lies exactly on a
    majorant face, since clump boundaries are then ambiguous.
    """
    v = np.asarray(velocities, dtype=float).reshape(-1)
    if v.size == 0:
        raise ContractViolation("need at least one velocity")
    psi = potential_of_velocities(v)
    k = np.arange(psi.size, dtype=float)
    m = upper_hull(PointSequence(k, psi))
    off = np.ones(psi.size, bool)
    off[m.index] = False
    if off.any():
        # exact test on the chord through the neighbouring vertices
        j = np.searchsorted(m.index, np.flatnonzero(off))
        i0, i1 = m.index[j - 1], m.index[j]
        p = np.flatnonzero(off)
        cross = (i1 - i0) * (psi[p] - psi[i0]) - (p - i0) * (psi[i1] - psi[i0])
        if np.any(cross == 0):
            raise DegenerateInputError("collinear potential points: clump boundaries are ambiguous")
    starts = [int(s) for s in m.index[:-1]]
    ends = [int(s) - 1 for s in m.index[1:]]
    return list(zip(starts, ends))


def verify_discrete_theorem(velocities, positions=None):
    """Compare the simulated final partition with ``partition_oracle``.

    Returns ``(agree, detail)``; ``detail`` holds both partitions, the event
    count and the conservation errors.
    """
    v = np.asarray(velocities, dtype=float).reshape(-1)
    x = np.arange(v.size, dtype=float) if positions is None else positions
    start = init_system(x, v)
    final, events = run_to_completion(start)
    simulated = final.partition
    oracle = partition_oracle(v)
    mom0 = start.total_momentum
    scale = max(math.fsum(abs(c.momentum) for c in start.clumps), 1e-300)
    detail = {
        "simulated": [list(b) for b in simulated],
        "oracle": [list(b) for b in oracle],
        "events": len(events),
        "mass_error": abs(final.total_mass - start.total_mass),
        "momentum_rel_error": abs(final.total_momentum - mom0) / scale,
    }
    return simulated == oracle, detail


def partition_to_json(partition):
    return json.dumps([[int(lo), int(hi)] for lo, hi in partition])


def partition_from_json(text):
    return [tuple(b) for b in json.loads(text)]
