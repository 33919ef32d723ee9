import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extremal_hull.drift import (
    DriftSpec,
    add_drift,
    classify_isolation,
    convex_drift_inclusion_check,
    exceeding_time,
    exceeding_times,
    exceeding_times_are_jumps_experiment,
    exceeding_times_on_grid_path,
    skeleton_times,
)
from extremal_hull.errors import ContractViolation, InvalidSpecError
from extremal_hull.hull import extremal_superior_times
from extremal_hull.paths import GridPath, JumpPath, SampledPath
from extremal_hull.synthesis import JumpLaw, LevyMeasureSpec, RngStream, simulate_bv_levy

SPEC = LevyMeasureSpec.superpose(
    LevyMeasureSpec.stable_like(1.0, 1.0, 0.5),
    LevyMeasureSpec.compound_poisson(5.0, JumpLaw.normal()),
)


def test_drift_values_and_derivatives():
    a = np.array([-1.0, 0.0, 2.0])
    np.testing.assert_array_equal(DriftSpec.quadratic(-1.0).value(a), -a * a)
    np.testing.assert_array_equal(DriftSpec.quadratic(-1.0).derivative(a), -2 * a)
    np.testing.assert_array_equal(DriftSpec.parabolic_burgers(2.0).value(a), -a * a / 4)
    assert DriftSpec.linear(3.0).derivative(5.0) == 3.0
    s = DriftSpec.sampled([0.0, 1.0], [0.0, 1.0], [1.0, 1.0])
    assert s.value(0.5) == 0.5 and s.is_convex and s.is_concave
    assert not s.covers(-0.1, 1.0)


def test_drift_convexity_flags():
    assert DriftSpec.quadratic(1.0).is_convex and not DriftSpec.quadratic(1.0).is_concave
    assert DriftSpec.parabolic_burgers(1.0).is_concave
    assert DriftSpec.zero().is_convex and DriftSpec.zero().is_concave


@pytest.mark.parametrize("d", [DriftSpec.quadratic(-2.0), DriftSpec.parabolic_burgers(0.5),
                               DriftSpec.sampled([0.0, 1.0, 2.0], [0.0, 1.0, 1.0], [1.0, 0.5, 0.0])])
def test_drift_dict_round_trip(d):
    back = DriftSpec.from_dict(d.to_dict())
    assert back.to_dict() == d.to_dict()


def test_drift_validation():
    with pytest.raises(InvalidSpecError):
        DriftSpec("cubic")
    with pytest.raises(InvalidSpecError):
        DriftSpec.parabolic_burgers(0.0)
    with pytest.raises(InvalidSpecError):
        DriftSpec.sampled([0.0, 0.0], [0, 0], [0, 0])


def test_skeleton_times_include_knots():
    p = JumpPath(0.0, 1.0, [0.5], [1.0])
    t, knot = skeleton_times(p, 3)
    np.testing.assert_allclose(t, [0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0])
    np.testing.assert_array_equal(np.flatnonzero(knot), [0, 4, 8])


def test_add_drift_keeps_both_sides_of_jumps():
    p = JumpPath(0.0, 1.0, [0.5], [1.0])
    y = add_drift(p, DriftSpec.linear(2.0), 1)
    assert isinstance(y, SampledPath)
    k = int(np.flatnonzero(y.times == 0.5)[0])
    assert y.values[k] == 2.0 and y.left[k] == 1.0
    g = add_drift(GridPath(0.0, 0.5, [0, 0, 0]), DriftSpec.quadratic(1.0))
    np.testing.assert_array_equal(g.values, [0.0, 0.25, 1.0])
    with pytest.raises(InvalidSpecError):
        add_drift(p, DriftSpec.sampled([0.2, 1.0], [0, 0], [0, 0]))


def test_exceeding_time_hand_example():
    # Jumps of +1 at 0.3 and +2 at 0.6 on a flat path; threshold slope 1 from u = 0.
    p = JumpPath(0.0, 1.0, [0.3, 0.6], [1.0, 2.0])
    f = DriftSpec.zero()
    assert exceeding_time(p, f, 1.0, 0.0) == 0.3
    assert exceeding_times(p, f, 1.0, 0.0) == [0.3, 0.6]
    assert exceeding_time(p, f, 10.0, 0.0) == math.inf
    assert exceeding_times(p, f, 1.0, 0.0, max_count=1) == [0.3]
    with pytest.raises(ContractViolation):
        exceeding_time(p, f, 0.0, 0.0)
    with pytest.raises(ContractViolation):
        exceeding_time(p, f, 1.0, 2.0)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_exceeding_times_land_on_upward_jumps(seed):
    x = simulate_bv_levy(SPEC, 1e-3, (0.0, 1.0), RngStream(seed)).path
    f = DriftSpec.quadratic(-1.0)
    y = add_drift(x, f, 8)
    up = set(x.times[x.sizes > 0].tolist())
    for mu in (0.5, 2.0):
        for s in exceeding_times(y, f, mu, 0.25):
            assert s in up


def test_exceeding_experiment_report_shape():
    out = exceeding_times_are_jumps_experiment(SPEC, DriftSpec.quadratic(-1.0), [1.0], [0.0, 0.5], 5,
                                               RngStream(1), eps=1e-2, samples_per_gap=4)
    assert len(out["per_replica"]) == 10
    assert out["aggregates"]["applicable"]
    if out["aggregates"]["finite"]:
        assert out["aggregates"]["fraction_on_jumps"] == 1.0
    with pytest.raises(InvalidSpecError):
        exceeding_times_are_jumps_experiment(SPEC, DriftSpec.quadratic(1.0), [1.0], [0.0], 1, RngStream(1))
    g = exceeding_times_on_grid_path(GridPath(0.0, 0.5, [0.0, 1.0, 3.0]), DriftSpec.zero(), [0.5], [0.0])
    assert g["aggregates"]["applicable"] is False


def test_classify_isolation_on_a_tent():
    # Majorant slopes 2 then -2 around the vertex at 0.5; f' = 0 there.
    p = GridPath(0.0, 0.5, [0.0, 1.0, 0.0])
    e = extremal_superior_times(p)
    v = classify_isolation(p, DriftSpec.zero(), e)
    mid = 1
    assert v.accumulation_candidate[mid]
    assert not v.left_isolated[mid] and not v.right_isolated[mid]
    assert v.left_gap[0] == math.inf and v.right_gap[-1] == math.inf
    # with f' = 2 at the vertex the left slope matches and the right side is isolated
    w = classify_isolation(p, DriftSpec.linear(2.0), e)
    assert not w.left_isolated[mid] and w.right_isolated[mid]
    with pytest.raises(ContractViolation):
        classify_isolation(p, DriftSpec.zero(), [0.25])


def test_convex_inclusion_on_simulated_paths():
    for r in range(5):
        x = simulate_bv_levy(SPEC, 1e-3, (0.0, 1.0), RngStream(8).replica(r)).path
        ok, witness = convex_drift_inclusion_check(x, DriftSpec.quadratic(1.0), 8)
        assert ok, witness
    with pytest.raises(InvalidSpecError):
        convex_drift_inclusion_check(x, DriftSpec.quadratic(-1.0))


def test_concave_drift_can_add_extremal_times():
    # A linear ramp has only its endpoints as vertices; a concave bump adds more.
    p = GridPath(0.0, 0.25, [0.0, 0.25, 0.5, 0.75, 1.0])
    ok, witness = convex_drift_inclusion_check(p, DriftSpec.quadratic(0.5))
    assert ok
    y = add_drift(p, DriftSpec.quadratic(-1.0))
    assert len(extremal_superior_times(y)) > len(extremal_superior_times(p))
    assert witness is None
