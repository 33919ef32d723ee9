"""Configuration-driven Monte Carlo experiments and their reports.

Each experiment id maps to a per-replica function and a summarizer. A replica
only ever draws from ``RngStream(seed).replica(r)``, so reports do not depend
on worker count or completion order. Verdicts compare summary metrics with the
thresholds declared in the config; defaults live in ``DEFAULTS``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import operator
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .burgers import (
    drifted_potential,
    face_location,
    hopf_cole_envelope,
    hopf_cole_potential,
    inverse_lagrangian,
    majorant_faces,
    shock_convergence_experiment,
)
from .drift import DriftSpec, add_drift, convex_drift_inclusion_check, exceeding_times
from .errors import InvalidSpecError
from .hull import argmax_times, extremal_superior_times, extremal_times, lebesgue_estimate, path_points
from .paths import Grid, GridPath, integrate_path
from .sticky import verify_discrete_theorem
from .synthesis import (
    LevyMeasureSpec,
    RngStream,
    estimate_half_line_regularity,
    simulate_brownian,
    simulate_bv_levy,
    simulate_ito,
)

SCHEMA_VERSION = "1"

# Named Itô coefficients (JSON cannot carry code). Called as f(t, x).
COEFFICIENTS = {
    "0": lambda t, x: np.zeros_like(t),
    "1": lambda t, x: np.ones_like(t),
    "1+a^2": lambda t, x: 1.0 + t * t,
    "sin(a)": lambda t, x: np.sin(t),
    "cos(a)": lambda t, x: np.cos(t),
    "a": lambda t, x: np.asarray(t, dtype=float),
}

BV_MEASURE = {
    "family": "sum", "drift": 0.0, "parts": [
        {"family": "compound-poisson", "drift": 0.0, "rate": 5.0, "law": {"kind": "normal", "params": [0.0, 1.0]}},
        {"family": "stable-like", "drift": 0.0, "c_pos": 1.0, "c_neg": 1.0, "alpha": 0.5, "cap": 1.0},
    ],
}
ONE_SIDED_MEASURE = {
    "family": "sum", "drift": 0.0, "parts": [
        {"family": "stable-like", "drift": 0.0, "c_pos": 1.0, "c_neg": 0.0, "alpha": 0.5, "cap": 1.0},
        {"family": "compound-poisson", "drift": 0.0, "rate": 5.0, "law": {"kind": "exponential", "params": [1.0, -1.0]}},
    ],
}
SYMMETRIC_MEASURE = {"family": "stable-like", "drift": 0.0, "c_pos": 1.0, "c_neg": 1.0, "alpha": 0.5, "cap": 1.0}

EPS_LADDER = [1e-2, 1e-3, 1e-4]
GRID_LADDER = [2 ** 10, 2 ** 14, 2 ** 18]


def _th(op, value):
    return {"op": op, "value": value}


DEFAULTS = {
    "negligibility_bm": dict(
        replicas=50, process={"kind": "brownian"}, ladder=GRID_LADDER,
        thresholds={"decreasing_fraction": _th(">=", 0.95)}),
    "negligibility_integrated": dict(
        replicas=50, process={"kind": "integrated-brownian"}, ladder=GRID_LADDER,
        thresholds={"decreasing_fraction": _th(">=", 0.95)}),
    "negligibility_ito": dict(
        replicas=50, process={"kind": "ito", "phi": "1+a^2", "psi": "sin(a)"}, ladder=GRID_LADDER,
        thresholds={"decreasing_fraction": _th(">=", 0.95)}),
    "bv_extremal_structure": dict(
        replicas=200, process={"kind": "levy", "measure": BV_MEASURE}, ladder=[1e-3],
        thresholds={"all_positive_jump_fraction": _th(">=", 1.0),
                    "all_jump_fraction": _th(">=", 1.0),
                    "signed_structure_fraction": _th(">=", 1.0)}),
    "accumulation_at_T": dict(
        replicas=100, process={"kind": "levy", "measure": BV_MEASURE}, ladder=EPS_LADDER,
        params={"delta": 0.05},
        thresholds={"inside_median_increasing": _th(">=", 1.0),
                    "outside_median_max_change": _th("<=", 1.0),
                    "sign_test_p": _th("<", 0.05)}),
    "isolation_vs_dissymmetry": dict(
        replicas=100, process={"kind": "levy", "measure": ONE_SIDED_MEASURE,
                               "symmetric_measure": SYMMETRIC_MEASURE},
        ladder=EPS_LADDER, params={"regularity_replicas": 200, "probe_window": 0.01},
        thresholds={"one_sided_right_gap_median_ratio": _th(">=", 0.5),
                    "one_sided_T_positive_jump_fraction": _th(">=", 0.95),
                    "symmetric_left_shrink_p": _th("<", 0.05),
                    "symmetric_right_shrink_p": _th("<", 0.05)}),
    "unique_argmax": dict(
        replicas=500, process={"kind": "levy", "measure": BV_MEASURE}, ladder=EPS_LADDER,
        thresholds={"unique_fraction": _th(">=", 1.0),
                    "single_plateau_fraction": _th(">=", 1.0),
                    "plateau_shrink_p": _th("<", 0.05)}),
    "exceeding_times": dict(
        replicas=100, process={"kind": "levy", "measure": BV_MEASURE}, ladder=[1e-3],
        drift={"kind": "quadratic", "param": -1.0},
        params={"mu_grid": [0.25, 0.5, 1.0], "u_grid": [0.0, 0.25, 0.5, 0.75], "samples_per_gap": 16},
        thresholds={"fraction_on_jumps": _th(">=", 1.0)}),
    "convex_inclusion": dict(
        replicas=500, process={"kind": "mixed", "measure": BV_MEASURE, "grid_n": 1024}, ladder=[1e-3],
        params={"gamma_max": 5.0, "samples_per_gap": 16},
        thresholds={"inclusion_fraction": _th(">=", 1.0)}),
    "burgers_shocks": dict(
        replicas=100, process={"kind": "random-walk", "steps": 64}, t_ladder=[0.1, 1.0, 10.0],
        params={"x_points": 257, "x_margin": 2.0, "monotone_pairs": 1000},
        thresholds={"max_abs_error": _th("<=", 1e-9),
                    "min_dominance_gap": _th(">=", -1e-12),
                    "min_second_difference": _th(">=", -1e-12),
                    "face_jump_match_fraction": _th(">=", 1.0),
                    "monotone_fraction": _th(">=", 1.0)}),
    "shock_convergence": dict(
        replicas=100, process={"kind": "levy", "measure": BV_MEASURE}, ladder=[1e-3],
        t_ladder=[1.0, 10.0, 100.0, 1000.0, 10000.0], params={"max_inversions": 1, "samples_per_gap": 16},
        thresholds={"few_inversions_fraction": _th(">=", 0.9)}),
    "sticky_theorem": dict(
        replicas=500, process={"kind": "sticky", "n_max": 10},
        thresholds={"agreement_fraction": _th(">=", 1.0),
                    "max_momentum_rel_error": _th("<=", 1e-12),
                    "max_mass_error": _th("<=", 1e-12),
                    "event_bound_fraction": _th(">=", 1.0)}),
}

EXPERIMENT_IDS = tuple(DEFAULTS)

CSV_COLUMNS = {
    "negligibility_bm": ["replica", "n", "extremal_count", "fraction", "lebesgue", "decreasing"],
    "bv_extremal_structure": ["replica", "jumps", "interior", "positive_jump", "any_jump",
                              "signed_ok", "T"],
    "accumulation_at_T": ["replica", "eps", "inside", "outside", "T"],
    "isolation_vs_dissymmetry": ["replica", "eps", "one_sided_left_gap", "one_sided_right_gap",
                                 "one_sided_T_positive_jump", "symmetric_left_gap", "symmetric_right_gap"],
    "unique_argmax": ["replica", "eps", "first", "last", "plateau_width", "single_plateau"],
    "exceeding_times": ["replica", "finite", "on_jump"],
    "convex_inclusion": ["replica", "path_kind", "gamma", "included", "witness"],
    "burgers_shocks": ["replica", "t", "max_abs_error", "min_dominance_gap", "min_second_difference",
                       "faces", "face_jump_match", "monotone"],
    "shock_convergence": ["replica", "t", "distance", "inversions"],
    "sticky_theorem": ["replica", "n", "agree", "events", "momentum_rel_error", "mass_error"],
}
CSV_COLUMNS["negligibility_integrated"] = CSV_COLUMNS["negligibility_bm"]
CSV_COLUMNS["negligibility_ito"] = CSV_COLUMNS["negligibility_bm"]


# -- configuration -------------------------------------------------------------


def _monotone(seq):
    d = np.diff(np.asarray(seq, dtype=float))
    return bool(np.all(d > 0) or np.all(d < 0))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int = 0
    replicas: int = 1
    process: dict = field(default_factory=dict)
    drift: dict = None
    ladder: list = field(default_factory=list)
    t_ladder: list = field(default_factory=list)
    horizon: list = field(default_factory=lambda: [0.0, 1.0])
    params: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in DEFAULTS:
            raise InvalidSpecError(f"unknown experiment id {self.experiment!r}")
        if int(self.replicas) != self.replicas or self.replicas < 1:
            raise InvalidSpecError("replicas must be an integer >= 1")
        if int(self.seed) != self.seed or self.seed < 0:
            raise InvalidSpecError("seed must be a non-negative integer")
        for name in ("ladder", "t_ladder"):
            seq = getattr(self, name)
            if name in DEFAULTS[self.experiment] and not seq:
                raise InvalidSpecError(f"{name} must be non-empty")
            if len(seq) > 1 and not _monotone(seq):
                raise InvalidSpecError(f"{name} must be monotone")
        if len(self.horizon) != 2 or not self.horizon[1] > self.horizon[0]:
            raise InvalidSpecError("horizon must be [t0, t1] with t1 > t0")
        if int(self.workers) != self.workers or self.workers < 1:
            raise InvalidSpecError("workers must be an integer >= 1")
        for name, th in self.thresholds.items():
            if not isinstance(th, dict) or th.get("op") not in _OPS or "value" not in th:
                raise InvalidSpecError(f"malformed threshold for {name!r}")

    @classmethod
    def from_dict(cls, d):
        """Fill unspecified fields from the experiment's defaults.

        ``params`` and ``thresholds`` merge key by key.
        """
        if not isinstance(d, dict) or "experiment" not in d:
            raise InvalidSpecError("config must be a JSON object with an 'experiment' field")
        exp = d["experiment"]
        if exp not in DEFAULTS:
            raise InvalidSpecError(f"unknown experiment id {exp!r}")
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise InvalidSpecError(f"unknown config fields: {sorted(extra)}")
        base = json.loads(json.dumps(DEFAULTS[exp]))
        merged = {**base, **{k: v for k, v in d.items() if k not in ("params", "thresholds")}}
        merged["params"] = {**base.get("params", {}), **d.get("params", {})}
        merged["thresholds"] = {**base.get("thresholds", {}), **d.get("thresholds", {})}
        return cls(**merged)

    @classmethod
    def default(cls, experiment, **overrides):
        return cls.from_dict({"experiment": experiment, **overrides})

    def to_dict(self):
        return json.loads(json.dumps(asdict(self)))


def load_configs(text):
    """One config object or a batch array."""
    data = json.loads(text)
    items = data if isinstance(data, list) else [data]
    return [ExperimentConfig.from_dict(item) for item in items]


# -- helpers -------------------------------------------------------------------


def _stream(cfg, r):
    return RngStream(int(cfg.seed)).replica(r)


def _measure(cfg, key="measure"):
    return LevyMeasureSpec.from_dict(cfg.process[key])


def _horizon(cfg):
    return (float(cfg.horizon[0]), float(cfg.horizon[1]))


def _gaussian_path(process, grid, stream):
    kind = process["kind"]
    if kind == "brownian":
        return simulate_brownian(grid, stream)
    if kind == "integrated-brownian":
        return integrate_path(simulate_brownian(grid, stream))
    if kind == "ito":
        try:
            phi, psi = COEFFICIENTS[process["phi"]], COEFFICIENTS[process["psi"]]
        except KeyError as exc:
            raise InvalidSpecError(f"unknown coefficient {exc.args[0]!r}; known: {sorted(COEFFICIENTS)}")
        return simulate_ito(phi, psi, grid, stream, adapted=False)
    raise InvalidSpecError(f"process kind {kind!r} is not a grid process")


def _gap(times, i, step):
    j = i + step
    if 0 <= j < times.size:
        return float(abs(times[j] - times[i]))
    return None


def _sign_test(pairs):
    """One-sided sign test that ``after < before``; ties and missing pairs dropped."""
    down = up = 0
    for before, after in pairs:
        if before is None or after is None or before == after:
            continue
        if after < before:
            down += 1
        else:
            up += 1
    if down + up == 0:
        return 1.0
    return float(stats.binomtest(down, down + up, 0.5, alternative="greater").pvalue)


def describe(values):
    """Mean, median and a normal-approximation 95% interval for the mean."""
    v = np.asarray([x for x in values if x is not None], dtype=float)
    if v.size == 0:
        return {"absent": True}
    out = {"n": int(v.size), "mean": float(v.mean()), "median": float(np.median(v))}
    if v.size > 1:
        half = 1.96 * float(v.std(ddof=1)) / math.sqrt(v.size)
        out["ci95"] = [out["mean"] - half, out["mean"] + half]
    else:
        out["ci95"] = None
    return out


def _median(values):
    v = [x for x in values if x is not None]
    return float(np.median(v)) if v else None


# -- per-replica work and summaries -----------------------------------------------


def _rep_negligibility(cfg, r):
    t0, t1 = _horizon(cfg)
    counts, fracs, leb = [], [], []
    for n in cfg.ladder:
        n = int(n)
        grid = Grid.over(t0, t1, n)
        path = _gaussian_path(cfg.process, grid, _stream(cfg, r).substream(n))
        e = extremal_times(path)
        counts.append(int(e.size))
        fracs.append(e.size / (n + 1))
        leb.append(lebesgue_estimate(e, grid.h, grid.t0))
    dec = all(b < a for a, b in zip(fracs, fracs[1:]))
    return {"replica": r, "n": [int(n) for n in cfg.ladder], "extremal_count": counts,
            "fraction": fracs, "lebesgue": leb, "decreasing": dec}


def _sum_negligibility(cfg, recs):
    k = len(cfg.ladder)
    aggregates = {
        "fraction": [describe(rec["fraction"][i] for rec in recs) for i in range(k)],
        "lebesgue": [describe(rec["lebesgue"][i] for rec in recs) for i in range(k)],
    }
    metrics = {"decreasing_fraction": float(np.mean([rec["decreasing"] for rec in recs]))}
    plots = {"fraction_vs_n": (list(cfg.ladder), [a["mean"] for a in aggregates["fraction"]])}
    return aggregates, metrics, plots


def _rep_bv_structure(cfg, r):
    eps = float(cfg.ladder[-1])
    t0, t1 = _horizon(cfg)
    p = simulate_bv_levy(_measure(cfg), eps, (t0, t1), _stream(cfg, r)).path
    e = extremal_superior_times(p)
    T = e.T
    inner = (e.times != t0) & (e.times != t1) & ~e.is_T
    times = e.times[inner]
    pos = np.isin(times, p.times[p.sizes > 0])
    neg = np.isin(times, p.times[p.sizes < 0])
    signed = bool(np.all(np.where(times < T, pos, neg)))
    return {"replica": r, "jumps": len(p), "interior": int(times.size), "positive_jump": int(pos.sum()),
            "any_jump": int((pos | neg).sum()), "signed_ok": signed, "T": T}


def _sum_bv_structure(cfg, recs):
    aggregates = {
        "interior": describe(rec["interior"] for rec in recs),
        "positive_share": describe(rec["positive_jump"] / rec["interior"] for rec in recs if rec["interior"]),
    }
    metrics = {
        "all_positive_jump_fraction": float(np.mean([rec["positive_jump"] == rec["interior"] for rec in recs])),
        "all_jump_fraction": float(np.mean([rec["any_jump"] == rec["interior"] for rec in recs])),
        "signed_structure_fraction": float(np.mean([rec["signed_ok"] for rec in recs])),
    }
    plots = {"interior_count": ([rec["replica"] for rec in recs], [rec["interior"] for rec in recs])}
    return aggregates, metrics, plots


def _rep_accumulation(cfg, r):
    delta = float(cfg.params["delta"])
    out = {"replica": r, "eps": [], "inside": [], "outside": [], "T": []}
    for eps in cfg.ladder:
        p = simulate_bv_levy(_measure(cfg), float(eps), _horizon(cfg), _stream(cfg, r)).path
        e = extremal_superior_times(p)
        d = np.abs(e.times - e.T)
        out["eps"].append(float(eps))
        out["inside"].append(int(np.sum((d > 0) & (d <= delta))))
        out["outside"].append(int(np.sum(d > delta)))
        out["T"].append(e.T)
    return out


def _sum_accumulation(cfg, recs):
    k = len(cfg.ladder)
    med_in = [_median(rec["inside"][i] for rec in recs) for i in range(k)]
    med_out = [_median(rec["outside"][i] for rec in recs) for i in range(k)]
    # sign test: did the count inside the neighbourhood grow from coarsest to finest?
    p = _sign_test((-rec["inside"][0], -rec["inside"][-1]) for rec in recs)
    aggregates = {"inside_median": med_in, "outside_median": med_out,
                  "inside": [describe(rec["inside"][i] for rec in recs) for i in range(k)],
                  "outside": [describe(rec["outside"][i] for rec in recs) for i in range(k)]}
    metrics = {
        "inside_median_increasing": float(all(b > a for a, b in zip(med_in, med_in[1:]))),
        "outside_median_max_change": float(max((abs(b - a) for a, b in zip(med_out, med_out[1:])), default=0.0)),
        "sign_test_p": p,
    }
    plots = {"inside_median_vs_eps": (list(cfg.ladder), med_in),
             "outside_median_vs_eps": (list(cfg.ladder), med_out)}
    return aggregates, metrics, plots


def _T_neighbourhood(path):
    e = extremal_superior_times(path)
    i = int(np.flatnonzero(e.is_T)[0])
    return _gap(e.times, i, -1), _gap(e.times, i, 1), bool(e.is_jump[i])


def _rep_isolation(cfg, r):
    one, sym = _measure(cfg), _measure(cfg, "symmetric_measure")
    out = {"replica": r, **{k: [] for k in CSV_COLUMNS["isolation_vs_dissymmetry"][1:]}}
    for eps in cfg.ladder:
        eps = float(eps)
        lo, ro, jump = _T_neighbourhood(simulate_bv_levy(one, eps, _horizon(cfg), _stream(cfg, r)).path)
        ls, rs, _ = _T_neighbourhood(simulate_bv_levy(sym, eps, _horizon(cfg), _stream(cfg, r).substream(1)).path)
        out["eps"].append(eps)
        out["one_sided_left_gap"].append(lo)
        out["one_sided_right_gap"].append(ro)
        out["one_sided_T_positive_jump"].append(jump)
        out["symmetric_left_gap"].append(ls)
        out["symmetric_right_gap"].append(rs)
    return out


def _sum_isolation(cfg, recs):
    k = len(cfg.ladder)
    both = [rec for rec in recs
            if rec["one_sided_right_gap"][0] is not None and rec["one_sided_right_gap"][-1] is not None]
    coarse = _median(rec["one_sided_right_gap"][0] for rec in both)
    fine = _median(rec["one_sided_right_gap"][-1] for rec in both)
    ratio = fine / coarse if coarse else None
    ladder = [float(e) for e in cfg.ladder]
    regularity = {}
    for name, key in (("one_sided", "measure"), ("symmetric", "symmetric_measure")):
        est = estimate_half_line_regularity(
            _measure(cfg, key), ladder, int(cfg.params["regularity_replicas"]),
            RngStream(int(cfg.seed)).substream(7, len(name)), float(cfg.params["probe_window"]))
        regularity[name] = est.to_dict()
    aggregates = {
        "regularity": regularity,
        "one_sided_right_gap_median": [_median(rec["one_sided_right_gap"][i] for rec in recs) for i in range(k)],
        "one_sided_left_gap_median": [_median(rec["one_sided_left_gap"][i] for rec in recs) for i in range(k)],
        "symmetric_left_gap_median": [_median(rec["symmetric_left_gap"][i] for rec in recs) for i in range(k)],
        "symmetric_right_gap_median": [_median(rec["symmetric_right_gap"][i] for rec in recs) for i in range(k)],
    }
    metrics = {
        "one_sided_right_gap_median_ratio": ratio,
        "one_sided_T_positive_jump_fraction": float(np.mean([rec["one_sided_T_positive_jump"][-1] for rec in recs])),
        "symmetric_left_shrink_p": _sign_test((rec["symmetric_left_gap"][0], rec["symmetric_left_gap"][-1]) for rec in recs),
        "symmetric_right_shrink_p": _sign_test((rec["symmetric_right_gap"][0], rec["symmetric_right_gap"][-1]) for rec in recs),
    }
    plots = {f"{name}_median_vs_eps": (ladder, aggregates[f"{name}_median"])
             for name in ("one_sided_right_gap", "one_sided_left_gap", "symmetric_left_gap", "symmetric_right_gap")}
    return aggregates, metrics, plots


def _single_plateau(path):
    """True when the points attaining ``sup X*`` are consecutive skeleton points."""
    pts = path_points(path, "upper")
    hit = np.flatnonzero(pts.y == pts.y.max())
    return bool(hit[-1] - hit[0] == hit.size - 1)


def _rep_unique_argmax(cfg, r):
    out = {"replica": r, "eps": [], "first": [], "last": [], "plateau_width": [], "single_plateau": []}
    for eps in cfg.ladder:
        p = simulate_bv_levy(_measure(cfg), float(eps), _horizon(cfg), _stream(cfg, r)).path
        first, last = argmax_times(p)
        out["eps"].append(float(eps))
        out["first"].append(first)
        out["last"].append(last)
        out["plateau_width"].append(last - first)
        out["single_plateau"].append(_single_plateau(p))
    return out


def _sum_unique_argmax(cfg, recs):
    k = len(cfg.ladder)
    aggregates = {"plateau_width": [describe(rec["plateau_width"][i] for rec in recs) for i in range(k)]}
    metrics = {
        "unique_fraction": float(np.mean([rec["first"][-1] == rec["last"][-1] for rec in recs])),
        "single_plateau_fraction": float(np.mean([all(rec["single_plateau"]) for rec in recs])),
        "plateau_shrink_p": _sign_test((rec["plateau_width"][0], rec["plateau_width"][-1]) for rec in recs),
    }
    plots = {"plateau_width_vs_eps": (list(cfg.ladder), [a["median"] for a in aggregates["plateau_width"]])}
    return aggregates, metrics, plots


def _rep_exceeding(cfg, r):
    f = DriftSpec.from_dict(cfg.drift)
    if not f.is_concave:
        raise InvalidSpecError("exceeding-time experiment needs a concave drift")
    x = simulate_bv_levy(_measure(cfg), float(cfg.ladder[-1]), _horizon(cfg), _stream(cfg, r)).path
    y = add_drift(x, f, int(cfg.params["samples_per_gap"]))
    up = set(x.times[x.sizes > 0].tolist())
    finite = on_jump = 0
    for mu in cfg.params["mu_grid"]:
        for u in cfg.params["u_grid"]:
            s = exceeding_times(y, f, float(mu), float(u))
            finite += len(s)
            on_jump += sum(1 for a in s if a in up)
    return {"replica": r, "finite": finite, "on_jump": on_jump}


def _sum_exceeding(cfg, recs):
    finite = sum(rec["finite"] for rec in recs)
    on_jump = sum(rec["on_jump"] for rec in recs)
    aggregates = {"finite": describe(rec["finite"] for rec in recs), "total_finite": finite,
                  "vacuous": finite == 0}
    metrics = {"fraction_on_jumps": on_jump / finite if finite else None}
    plots = {"finite_per_replica": ([rec["replica"] for rec in recs], [rec["finite"] for rec in recs])}
    return aggregates, metrics, plots


def _rep_inclusion(cfg, r):
    stream = _stream(cfg, r)
    gen = stream.substream(0).generator()
    gamma = float(gen.uniform(0.0, float(cfg.params["gamma_max"])))
    f = DriftSpec.quadratic(gamma)
    if r % 2 == 0:
        x = simulate_bv_levy(_measure(cfg), float(cfg.ladder[-1]), _horizon(cfg), stream.substream(1)).path
        kind = "jump"
    else:
        t0, t1 = _horizon(cfg)
        x = simulate_brownian(Grid.over(t0, t1, int(cfg.process["grid_n"])), stream.substream(1))
        kind = "grid"
    ok, witness = convex_drift_inclusion_check(x, f, int(cfg.params["samples_per_gap"]))
    return {"replica": r, "path_kind": kind, "gamma": gamma, "included": ok, "witness": witness}


def _sum_inclusion(cfg, recs):
    metrics = {"inclusion_fraction": float(np.mean([rec["included"] for rec in recs]))}
    aggregates = {"gamma": describe(rec["gamma"] for rec in recs)}
    plots = {"included_vs_gamma": ([rec["gamma"] for rec in recs], [int(rec["included"]) for rec in recs])}
    return aggregates, metrics, plots


def _face_jump_match(field):
    """Check that the inverse Lagrangian jumps exactly across each majorant face.

    Probes between consecutive face locations are evaluated both with the
    sweep and with a direct argmax over all skeleton points.
    """
    m = field.majorant
    faces = majorant_faces(m)
    if not faces:
        return True, 0
    loc = np.array([face_location(field, i, j) for i, j in faces])
    probes = np.concatenate(([loc[0] - 1.0], 0.5 * (loc[:-1] + loc[1:]), [loc[-1] + 1.0]))
    expect = np.array([m.t[faces[0][0]]] + [m.t[j] for _, j in faces])
    a, y = field.a, field.initial_values
    val = y[None, :] - (probes[:, None] - a[None, :]) ** 2 / (2.0 * field.t)
    top = val.max(axis=1, keepdims=True)
    brute = np.array([a[np.flatnonzero(row == t)[-1]] for row, t in zip(val, top[:, 0])])
    sweep = inverse_lagrangian(field, probes)
    right = inverse_lagrangian(field, loc)
    left = inverse_lagrangian(field, np.nextafter(loc, -np.inf))
    ok = (np.array_equal(brute, expect) and np.array_equal(sweep, expect)
          and np.array_equal(right, expect[1:]) and np.array_equal(left, expect[:-1]))
    return bool(ok), len(faces)


def _rep_burgers(cfg, r):
    steps = int(cfg.process["steps"])
    t0, t1 = _horizon(cfg)
    gen = _stream(cfg, r).generator()
    h = (t1 - t0) / steps
    psi0 = GridPath(t0, h, np.concatenate(([0.0], np.cumsum(gen.standard_normal(steps) * math.sqrt(h)))))
    margin = float(cfg.params["x_margin"])
    xs = np.linspace(t0 - margin, t1 + margin, int(cfg.params["x_points"]))
    pairs = np.sort(gen.uniform(t0 - margin, t1 + margin, (int(cfg.params["monotone_pairs"]), 2)), axis=1)
    out = {"replica": r, "t": [], "max_abs_error": [], "min_dominance_gap": [], "min_second_difference": [],
           "faces": [], "face_jump_match": [], "monotone": []}
    for t in cfg.t_ladder:
        t = float(t)
        field = drifted_potential(psi0, t)
        grid = np.union1d(xs, field.a)
        sweep = hopf_cole_potential(field, grid)
        brute = np.max(psi0.values[None, :] - (grid[:, None] - psi0.times[None, :]) ** 2 / (2.0 * t), axis=1)
        dom = hopf_cole_potential(field, field.a) - field.initial_values
        env = hopf_cole_envelope(field, xs)
        match, nfaces = _face_jump_match(field)
        il = inverse_lagrangian(field, pairs.reshape(-1)).reshape(pairs.shape)
        out["t"].append(t)
        out["max_abs_error"].append(float(np.max(np.abs(sweep - brute))))
        out["min_dominance_gap"].append(float(dom.min()))
        out["min_second_difference"].append(float(np.min(env[:-2] - 2.0 * env[1:-1] + env[2:])))
        out["faces"].append(nfaces)
        out["face_jump_match"].append(match)
        out["monotone"].append(bool(np.all(il[:, 0] <= il[:, 1])))
    return out


def _sum_burgers(cfg, recs):
    metrics = {
        "max_abs_error": max(max(rec["max_abs_error"]) for rec in recs),
        "min_dominance_gap": min(min(rec["min_dominance_gap"]) for rec in recs),
        "min_second_difference": min(min(rec["min_second_difference"]) for rec in recs),
        "face_jump_match_fraction": float(np.mean([all(rec["face_jump_match"]) for rec in recs])),
        "monotone_fraction": float(np.mean([all(rec["monotone"]) for rec in recs])),
    }
    k = len(cfg.t_ladder)
    aggregates = {"faces": [describe(rec["faces"][i] for rec in recs) for i in range(k)]}
    plots = {"faces_vs_t": (list(cfg.t_ladder), [a["mean"] for a in aggregates["faces"]])}
    return aggregates, metrics, plots


def _rep_convergence(cfg, r):
    p = simulate_bv_levy(_measure(cfg), float(cfg.ladder[-1]), _horizon(cfg), _stream(cfg, r)).path
    res = shock_convergence_experiment(p, cfg.t_ladder, int(cfg.params["samples_per_gap"]))
    return {"replica": r, "t": res["t"], "distance": res["distance"], "inversions": res["inversions"]}


def _sum_convergence(cfg, recs):
    k = len(cfg.t_ladder)
    aggregates = {"distance": [describe(rec["distance"][i] for rec in recs) for i in range(k)],
                  "inversions": describe(rec["inversions"] for rec in recs)}
    cap = int(cfg.params["max_inversions"])
    metrics = {"few_inversions_fraction": float(np.mean([rec["inversions"] <= cap for rec in recs]))}
    plots = {"distance_vs_t": (list(cfg.t_ladder), [a["mean"] for a in aggregates["distance"]])}
    return aggregates, metrics, plots


def _rep_sticky(cfg, r):
    gen = _stream(cfg, r).generator()
    n = int(gen.integers(1, int(cfg.process["n_max"]) + 1))
    v = gen.standard_normal(n)
    agree, detail = verify_discrete_theorem(v)
    return {"replica": r, "n": n, "agree": agree, "events": detail["events"],
            "momentum_rel_error": detail["momentum_rel_error"], "mass_error": detail["mass_error"] / n}


def _sum_sticky(cfg, recs):
    metrics = {
        "agreement_fraction": float(np.mean([rec["agree"] for rec in recs])),
        "max_momentum_rel_error": max(rec["momentum_rel_error"] for rec in recs),
        "max_mass_error": max(rec["mass_error"] for rec in recs),
        "event_bound_fraction": float(np.mean([rec["events"] <= rec["n"] - 1 for rec in recs])),
    }
    aggregates = {"events": describe(rec["events"] for rec in recs), "n": describe(rec["n"] for rec in recs)}
    plots = {"events_vs_n": ([rec["n"] for rec in recs], [rec["events"] for rec in recs])}
    return aggregates, metrics, plots


DISPATCH = {
    "negligibility_bm": (_rep_negligibility, _sum_negligibility),
    "negligibility_integrated": (_rep_negligibility, _sum_negligibility),
    "negligibility_ito": (_rep_negligibility, _sum_negligibility),
    "bv_extremal_structure": (_rep_bv_structure, _sum_bv_structure),
    "accumulation_at_T": (_rep_accumulation, _sum_accumulation),
    "isolation_vs_dissymmetry": (_rep_isolation, _sum_isolation),
    "unique_argmax": (_rep_unique_argmax, _sum_unique_argmax),
    "exceeding_times": (_rep_exceeding, _sum_exceeding),
    "convex_inclusion": (_rep_inclusion, _sum_inclusion),
    "burgers_shocks": (_rep_burgers, _sum_burgers),
    "shock_convergence": (_rep_convergence, _sum_convergence),
    "sticky_theorem": (_rep_sticky, _sum_sticky),
}


# -- reports -------------------------------------------------------------------


_OPS = {">=": operator.ge, "<=": operator.le, ">": operator.gt, "<": operator.lt, "==": operator.eq}


def evaluate_verdicts(metrics, thresholds):
    """One verdict per declared threshold; a missing metric fails."""
    out = []
    for name in sorted(thresholds):
        th = thresholds[name]
        value = metrics.get(name)
        ok = value is not None and bool(_OPS[th["op"]](value, th["value"]))
        out.append({"metric": name, "op": th["op"], "threshold": th["value"], "value": value, "passed": ok})
    return out


@dataclass
class Report:
    experiment: str
    config: dict
    per_replica: list
    aggregates: dict
    metrics: dict
    verdicts: list
    passed: bool
    plots: dict
    wall_clock: float = 0.0
    schema_version: str = SCHEMA_VERSION

    def to_dict(self, wall_clock=True):
        d = asdict(self)
        if not wall_clock:
            d.pop("wall_clock")
        return d

    def to_json(self, wall_clock=True):
        return json.dumps(self.to_dict(wall_clock), sort_keys=True, indent=2, allow_nan=False)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        if d.get("schema_version") != SCHEMA_VERSION:
            raise InvalidSpecError(f"unsupported report schema {d.get('schema_version')!r}")
        return cls(**d)


def _clean(obj):
    """JSON-safe copy: tuples become lists, numpy scalars become Python numbers."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def build_report(cfg, records, wall_clock=0.0):
    """Summarize per-replica records; an empty list gives absent aggregates."""
    if records:
        aggregates, metrics, plots = DISPATCH[cfg.experiment][1](cfg, records)
    else:
        aggregates, metrics, plots = {"absent": True}, {}, {}
    verdicts = evaluate_verdicts(_clean(metrics), cfg.thresholds)
    return Report(
        experiment=cfg.experiment,
        config=cfg.to_dict(),
        per_replica=_clean(records),
        aggregates=_clean(aggregates),
        metrics=_clean(metrics),
        verdicts=verdicts,
        passed=bool(verdicts) and all(v["passed"] for v in verdicts),
        plots=_clean({k: {"x": list(x), "y": list(y)} for k, (x, y) in plots.items()}),
        wall_clock=wall_clock,
    )


def _run_replica(args):
    cfg, r = args
    return DISPATCH[cfg.experiment][0](cfg, r)


def run_experiment(cfg):
    start = time.perf_counter()
    jobs = [(cfg, r) for r in range(int(cfg.replicas))]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=int(cfg.workers)) as pool:
            records = list(pool.map(_run_replica, jobs, chunksize=max(1, len(jobs) // (4 * cfg.workers))))
    else:
        records = [_run_replica(job) for job in jobs]
    records.sort(key=lambda rec: rec["replica"])
    return build_report(cfg, records, wall_clock=time.perf_counter() - start)


def per_replica_csv(report):
    """Per-replica table; columns fixed per experiment, cells JSON-encoded."""
    cols = CSV_COLUMNS[report.experiment]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["schema_version", *cols])
    for rec in report.per_replica:
        w.writerow([report.schema_version, *(json.dumps(rec.get(c), sort_keys=True) for c in cols)])
    return buf.getvalue()


def parse_per_replica_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    header = rows[0][1:]
    return [{c: json.loads(v) for c, v in zip(header, row[1:])} for row in rows[1:]]


def verdicts_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric", "op", "threshold", "value", "passed"])
    for v in report.verdicts:
        w.writerow([v["metric"], v["op"], json.dumps(v["threshold"]), json.dumps(v["value"]), int(v["passed"])])
    return buf.getvalue()


def emit_report(report, fmt="json", out_dir=None):
    """Serialize a report; returns ``{filename: text}`` and writes when ``out_dir`` is set."""
    if fmt == "json":
        files = {f"{report.experiment}.json": report.to_json()}
    elif fmt == "csv":
        files = {f"{report.experiment}.per_replica.csv": per_replica_csv(report),
                 f"{report.experiment}.verdicts.csv": verdicts_csv(report)}
    else:
        raise InvalidSpecError(f"unknown format {fmt!r}")
    _write(files, out_dir)
    return files


def emit_plot_data(report, out_dir=None):
    """One ``x,y`` CSV per declared plot series."""
    files = {}
    for name in sorted(report.plots):
        series = report.plots[name]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y"])
        w.writerows((json.dumps(x), json.dumps(y)) for x, y in zip(series["x"], series["y"]))
        files[f"{report.experiment}.plot.{name}.csv"] = buf.getvalue()
    _write(files, out_dir)
    return files


def _write(files, out_dir):
    if out_dir is None:
        return
    os.makedirs(out_dir, exist_ok=True)
    for name, text in files.items():
        with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
