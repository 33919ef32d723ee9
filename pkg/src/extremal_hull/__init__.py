"""Extremal times of random paths, concave majorants, inviscid Burgers and sticky particles."""

from .burgers import (
    drifted_potential,
    hopf_cole_potential,
    inverse_lagrangian,
    lagrangian,
    shock_convergence_experiment,
    shock_intervals,
)
from .drift import DriftSpec, add_drift, classify_isolation, convex_drift_inclusion_check, exceeding_time
from .experiments import ExperimentConfig, Report, emit_plot_data, emit_report, run_experiment
from .hull import (
    ExtremalSet,
    MajorantPL,
    PointSequence,
    concave_majorant_of_path,
    convex_minorant_of_path,
    extremal_inferior_times,
    extremal_superior_times,
    hausdorff_distance,
    lower_hull,
    upper_hull,
)
from .paths import Grid, GridPath, JumpPath, SampledPath, integrate_path, reverse_path, translate_path
from .sticky import init_system, merge, next_collision, partition_oracle, run_to_completion, verify_discrete_theorem
from .synthesis import (
    JumpLaw,
    LevyMeasureSpec,
    RngStream,
    estimate_half_line_regularity,
    simulate_brownian,
    simulate_bv_levy,
    simulate_compound_poisson,
    simulate_ito,
)

__version__ = "0.1.0"

__all__ = [
    "DriftSpec",
    "ExperimentConfig",
    "ExtremalSet",
    "Grid",
    "GridPath",
    "JumpLaw",
    "JumpPath",
    "LevyMeasureSpec",
    "MajorantPL",
    "PointSequence",
    "Report",
    "RngStream",
    "SampledPath",
    "add_drift",
    "classify_isolation",
    "concave_majorant_of_path",
    "convex_drift_inclusion_check",
    "convex_minorant_of_path",
    "drifted_potential",
    "emit_plot_data",
    "emit_report",
    "estimate_half_line_regularity",
    "exceeding_time",
    "extremal_inferior_times",
    "extremal_superior_times",
    "hausdorff_distance",
    "hopf_cole_potential",
    "init_system",
    "integrate_path",
    "inverse_lagrangian",
    "lagrangian",
    "lower_hull",
    "merge",
    "next_collision",
    "partition_oracle",
    "reverse_path",
    "run_experiment",
    "run_to_completion",
    "shock_convergence_experiment",
    "shock_intervals",
    "simulate_brownian",
    "simulate_bv_levy",
    "simulate_compound_poisson",
    "simulate_ito",
    "translate_path",
    "upper_hull",
    "verify_discrete_theorem",
]
