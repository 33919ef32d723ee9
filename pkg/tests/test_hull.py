import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extremal_hull.errors import ContractViolation, UndefinedDistanceError
from extremal_hull.hull import (
    ExtremalSet,
    MajorantPL,
    PointSequence,
    argmax_times,
    check_clear_condition,
    concave_majorant_of_path,
    extremal_inferior_times,
    extremal_superior_times,
    extremal_times,
    face_count,
    hausdorff_distance,
    lebesgue_estimate,
    lower_hull,
    majorant_slope,
    upper_hull,
)
from extremal_hull.paths import GridPath, JumpPath, negate

from oracles import brute_force_extreme_points, hausdorff_brute

ordinates = st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=40)


def points_from(y):
    return PointSequence(np.arange(len(y), dtype=float), y)


def test_parabola_keeps_every_point():
    t = np.linspace(-1, 1, 21)
    m = upper_hull(PointSequence(t, -t ** 2))
    assert len(m) == 21


def test_collinear_middle_points_are_dropped():
    m = upper_hull(PointSequence([0, 1, 2, 3], [0, 1, 2, 3]))
    np.testing.assert_array_equal(m.index, [0, 3])


def test_single_point_and_errors():
    m = upper_hull(PointSequence([0.5], [2.0]))
    assert len(m) == 1 and face_count(m) == 0
    with pytest.raises(ContractViolation):
        upper_hull(PointSequence([], []))
    with pytest.raises(ContractViolation):
        upper_hull(PointSequence([0.0, 0.0], [1.0, 2.0]))
    with pytest.raises(ContractViolation):
        upper_hull(PointSequence([0.0, 1.0], [np.nan, 2.0]))


@given(ordinates)
def test_upper_hull_matches_brute_force(y):
    y = np.round(np.asarray(y), 3)  # coarse values create many exact collinear triples
    m = upper_hull(points_from(y))
    assert list(m.index) == brute_force_extreme_points(np.arange(len(y), dtype=float), y)


@given(ordinates)
def test_upper_hull_is_concave_and_dominates(y):
    pts = points_from(y)
    m = upper_hull(pts)
    assert m.t[0] == pts.t[0] and m.t[-1] == pts.t[-1]
    assert np.all(np.diff(m.slopes) <= 1e-12 * (1 + np.abs(m.slopes[1:])))
    assert np.all(m(pts.t) >= pts.y - 1e-9 * (1 + np.abs(pts.y)))


@given(ordinates)
def test_lower_hull_is_negated_upper_hull(y):
    pts = points_from(y)
    lo = lower_hull(pts)
    up = upper_hull(pts.negated())
    np.testing.assert_array_equal(lo.index, up.index)
    np.testing.assert_array_equal(lo.y, -up.y)


@settings(max_examples=50)
@given(ordinates, st.floats(-3, 3))
def test_hull_is_invariant_under_affine_maps(y, shear):
    # exact arithmetic would give the same vertices; compare on coarse values
    y = np.round(np.asarray(y))
    t = np.arange(len(y), dtype=float)
    shear = float(np.round(shear))
    base = upper_hull(PointSequence(t, y))
    moved = upper_hull(PointSequence(t, 2.0 * y + shear * t + 7.0))
    np.testing.assert_array_equal(base.index, moved.index)


def test_jump_path_majorant_uses_star_values():
    p = JumpPath(0.0, 1.0, [0.25, 0.5], [2.0, -1.0])
    m, pts = concave_majorant_of_path(p)
    # skeleton: start, X*(0.25)=2, X*(0.5)=2 (left limit), end value 1
    np.testing.assert_array_equal(pts.y, [0.0, 2.0, 2.0, 1.0])
    np.testing.assert_array_equal(m.t, [0.0, 0.25, 0.5, 1.0])


def test_extremal_superior_times_flags():
    p = JumpPath(0.0, 1.0, [0.25, 0.5], [2.0, -1.0])
    e = extremal_superior_times(p)
    np.testing.assert_array_equal(e.times, [0.0, 0.25, 0.5, 1.0])
    np.testing.assert_array_equal(e.is_jump, [False, True, False, False])
    assert e.T == 0.5
    assert argmax_times(p) == (0.25, 0.5)


def test_inferior_times_are_superior_times_of_negation():
    p = JumpPath(0.0, 1.0, [0.1, 0.4, 0.8], [1.0, -3.0, 1.5])
    np.testing.assert_array_equal(extremal_inferior_times(p).times, extremal_superior_times(negate(p)).times)
    u = extremal_times(p)
    assert set(extremal_superior_times(p).times) <= set(u)


def test_grid_path_extremal_times():
    p = GridPath(0.0, 0.25, [0.0, 1.0, 1.5, 1.0, 0.0])
    e = extremal_superior_times(p)
    np.testing.assert_array_equal(e.times, [0.0, 0.25, 0.5, 0.75, 1.0])
    assert not e.is_jump.any()
    assert e.T == 0.5


def test_majorant_slope_sides():
    m = MajorantPL([0.0, 1.0, 3.0], [0.0, 2.0, 3.0])
    assert majorant_slope(m, 1.0, "left") == 2.0
    assert majorant_slope(m, 1.0, "right") == 0.5
    assert majorant_slope(m, 2.0, "left") == 0.5
    with pytest.raises(ContractViolation):
        majorant_slope(m, 0.0, "left")
    with pytest.raises(ContractViolation):
        majorant_slope(m, 3.0, "right")
    with pytest.raises(ContractViolation):
        majorant_slope(m, 1.0, "up")


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=20),
       st.lists(st.floats(-10, 10), min_size=1, max_size=20))
def test_hausdorff_matches_brute_force(a, b):
    a, b = sorted(a), sorted(b)
    assert hausdorff_distance(a, b) == pytest.approx(hausdorff_brute(a, b), abs=1e-12)


def test_hausdorff_examples_and_errors():
    assert hausdorff_distance([0.0, 1.0], [0.0, 1.0]) == 0.0
    assert hausdorff_distance([0.0], [0.0, 0.5]) == 0.5
    with pytest.raises(UndefinedDistanceError):
        hausdorff_distance([], [1.0])


def test_lebesgue_estimate_counts_cells():
    assert lebesgue_estimate([0.01, 0.02, 0.55], 0.1) == pytest.approx(0.2)
    assert lebesgue_estimate([], 0.1) == 0.0
    with pytest.raises(ContractViolation):
        lebesgue_estimate([0.1], 0.0)


def test_clear_condition():
    p = GridPath(0.0, 1.0, [0.0, 1.0, 0.0, 1.0, 0.0])
    # the only non-vertex point, (2, 0), sits 1.0 below the majorant
    assert check_clear_condition(p, 0.99)
    assert not check_clear_condition(p, 1.0)
    assert check_clear_condition(GridPath(0.0, 1.0, [0.0, 1.0]), 10.0)


def test_face_count_merges_close_slopes():
    m = MajorantPL([0.0, 1.0, 2.0, 3.0], [0.0, 1.0, 2.0 - 1e-14, 2.0])
    assert face_count(m) == 3
    assert face_count(m, rel_tol=1e-10) == 2


def test_serialization_round_trips():
    m = MajorantPL([0.0, 0.5, 1.0], [0.0, 1.0, 0.5])
    back = MajorantPL.from_json(m.to_json())
    np.testing.assert_array_equal(back.y, m.y)
    assert m.to_csv().splitlines()[0] == "t,value"
    e = ExtremalSet([0.0, 0.5], [False, True], [False, True])
    e2 = ExtremalSet.from_json(e.to_json())
    np.testing.assert_array_equal(e2.is_jump, e.is_jump)
    assert e.to_csv().splitlines()[1] == "0.0,0,0"
    with pytest.raises(ContractViolation):
        ExtremalSet([0.5, 0.0], [False, False], [False, False])
