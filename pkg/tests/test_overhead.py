import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repcat.analysis.fitting import FitResult
from repcat.analysis.overhead import (FitGrid, OverheadQuery, bit_flip_per_cycle, optimize_overhead,
                                      overhead_curve)
from repcat.error_model import bitflip_fast


def fit(a=0.05, c=0.5, x_th=1e-3, variant="cd"):
    return FitResult(a, c, x_th, np.zeros((3, 3)), variant, 20, (3, 5, 7))


def grid(strategy="fast-symmetric", theta=1, th8=1e-3, variant="cd"):
    # threshold shrinks as 1/alpha_sq like the per-cycle data error
    fits = {a: fit(x_th=th8 * 8 / a, variant=variant) for a in (8, 12, 16, 20)}
    return FitGrid(strategy, fits, theta)


def test_query_validation():
    with pytest.raises(ValueError):
        OverheadQuery(0.0, 1e-10, "fast-symmetric")
    with pytest.raises(ValueError):
        OverheadQuery(1e-4, 0.0, "fast-symmetric")


def test_grid_validation():
    with pytest.raises(ValueError):
        FitGrid("fast-symmetric", {})
    with pytest.raises(ValueError):
        FitGrid("fast-symmetric", {8: fit(), 12: fit(variant="c(d+1)")})
    g = grid()
    with pytest.raises(ValueError):
        g.parameters(4)
    assert g.covers(8) and g.covers(20) and not g.covers(21)


def test_interpolation_hits_fitted_points():
    g = grid()
    assert g.threshold(12) == pytest.approx(1e-3 * 8 / 12)
    th = g.threshold(10)
    assert g.threshold(12) < th < g.threshold(8)


def test_grid_round_trip():
    g = grid(theta=5, strategy="fast-asymmetric")
    back = FitGrid.from_dict(g.to_dict())
    assert back.theta == 5 and back.p_zl(1e-5, 7, 10) == pytest.approx(g.p_zl(1e-5, 7, 10))


def test_loose_target_gives_smallest_code():
    g = grid()
    pt = optimize_overhead(OverheadQuery(1e-5, 1.0, "fast-symmetric"), g)
    assert pt.reachable and pt.d == 3 and pt.alpha_sq == 8 and pt.total_cat_qubits == 5


def test_above_threshold():
    pt = optimize_overhead(OverheadQuery(5e-3, 1e-10, "fast-symmetric"), grid())
    assert not pt.reachable and pt.above_threshold


def test_unreachable_within_grid():
    pt = optimize_overhead(OverheadQuery(3e-4, 1e-10, "fast-symmetric"), grid(), d_grid=(3, 5))
    assert not pt.reachable and not pt.above_threshold
    assert "not met" in pt.reason


def test_mismatched_grid():
    with pytest.raises(ValueError):
        optimize_overhead(OverheadQuery(1e-5, 1e-10, "fast-asymmetric", 5), grid())
    with pytest.raises(ValueError):
        optimize_overhead(OverheadQuery(1e-5, 1e-10, "fast-symmetric"), grid(), alpha_grid=(4, 5))


def test_solution_meets_target_and_is_minimal():
    g = grid()
    q = OverheadQuery(2e-5, 1e-10, "fast-symmetric")
    pt = optimize_overhead(q, g)
    assert pt.p_zl + pt.p_xl <= 1e-10
    smaller = pt.d - 2
    for a in range(8, 21):
        assert g.p_zl(q.eta, smaller, a) + bit_flip_per_cycle(q.strategy, smaller, a, q.eta) > 1e-10


def test_bit_flips_limit_small_photon_numbers():
    assert bit_flip_per_cycle("fast-symmetric", 5, 8, 1e-4) == pytest.approx(8 * bitflip_fast(8))
    assert bit_flip_per_cycle("phenom", 5, 8, 1e-4) == 0.0
    # fast gates pay for their speed with more bit flips
    assert bit_flip_per_cycle("optimal-time", 5, 8, 1e-4) < bit_flip_per_cycle("fast-symmetric", 5, 8, 1e-4)
    # at very low loss the phase-flip part is negligible and alpha_sq is set by bit flips
    pt = optimize_overhead(OverheadQuery(1e-9, 1e-10, "fast-symmetric"), grid())
    assert pt.reachable and pt.alpha_sq > 8


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-7, 2e-4), st.floats(1.1, 3.0))
def test_overhead_non_decreasing_in_eta(eta, factor):
    g = grid()
    lo = optimize_overhead(OverheadQuery(eta, 1e-10, "fast-symmetric"), g)
    hi = optimize_overhead(OverheadQuery(eta * factor, 1e-10, "fast-symmetric"), g)
    if lo.reachable and hi.reachable:
        assert hi.total_cat_qubits >= lo.total_cat_qubits
    if not lo.reachable:
        assert not hi.reachable


@pytest.mark.parametrize("eta", [1e-5, 5e-5, 1e-4])
def test_higher_threshold_never_costs_more(eta):
    # a larger threshold, as obtained for larger theta, never increases the overhead
    low = overhead_curve([eta], 1e-10, grid("fast-asymmetric", 1, th8=1e-3))[0]
    high = overhead_curve([eta], 1e-10, grid("fast-asymmetric", 20, th8=3e-3))[0]
    assert high.reachable
    if low.reachable:
        assert high.total_cat_qubits <= low.total_cat_qubits


def test_p_zl_depends_on_d_around_threshold():
    g = grid()
    th = g.threshold(8)
    assert g.p_zl(th / 10, 7, 8) < g.p_zl(th / 10, 5, 8)
    assert g.p_zl(th * 2, 7, 8) > g.p_zl(th * 2, 5, 8)


def test_point_dict():
    pt = optimize_overhead(OverheadQuery(1e-5, 1e-10, "fast-symmetric"), grid())
    row = pt.to_dict()
    assert row["strategy"] == "fast-symmetric" and row["d"] == pt.d and row["reachable"] is True
