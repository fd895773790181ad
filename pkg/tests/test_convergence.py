import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcfband.convergence import (
    SweepPlan,
    band_sweep,
    detect_gaps,
    dof,
    estimate_order,
    richardson_reference,
    resolution_sweep,
    windowed_orders,
)
from pcfband.lattice import KPath, Lattice2D, reciprocal_lattice
from pcfband.medium import eta_fourier_polygon, homogeneous
from pcfband.planewave import BlochParams

SQ = Lattice2D.square()


def test_dof():
    assert dof(4) == 162


def test_exact_power_law():
    N = np.array([4, 6, 8, 12, 16])
    d = [dof(n) for n in N]
    fit = estimate_order(3.0 * N**-2.0, d)
    # dof ~ N^2 so the rate in dof is about 1; check against the exact log-log slope
    x, y = np.log(d), np.log(3.0 * N**-2.0)
    assert fit.p_hat == pytest.approx(-np.polyfit(x, y, 1)[0], abs=1e-12)


def test_injected_sequence_in_dof():
    d = np.array([10.0, 20.0, 40.0, 80.0])
    fit = estimate_order(3 * d**-2, d)
    assert fit.p_hat == pytest.approx(2.0, abs=0.01)
    assert fit.residual < 1e-12


def test_quarter_sequence():
    assert estimate_order([1, 0.25, 1 / 16], [1, 2, 4]).p_hat == pytest.approx(2.0)


def test_constant_errors():
    assert estimate_order([0.3, 0.3, 0.3], [1, 2, 4]).p_hat == pytest.approx(0.0, abs=1e-12)


def test_floor_exclusion():
    fit = estimate_order([1e-3, 1e-5, 1e-16, 0.0], [1, 2, 4, 8])
    assert fit.excluded == (2, 3)
    assert np.isnan(estimate_order([1e-3, 1e-16, 0.0], [1, 2, 4]).p_hat)


def test_too_few_points():
    with pytest.raises(ValueError):
        estimate_order([1, 0.5], [1, 2])


# p <= 3 keeps the finest increments (~c 200^-p) far above rounding of the limit
@given(st.floats(0.3, 3.0), st.floats(-3, 3), st.floats(0.1, 10))
def test_richardson_recovers_limit(p, limit, c):
    x = np.array([50.0, 100.0, 200.0, 400.0])
    v = limit + c * x**-p
    ref, rate = richardson_reference(v, x)
    assert rate == pytest.approx(p, rel=1e-6)
    assert ref == pytest.approx(limit, abs=1e-8 * (1 + abs(limit)))


def test_richardson_fallback():
    ref, rate = richardson_reference([3.0, 2.0, 2.5], [1, 2, 4])
    assert rate == 1.0


def test_windowed_orders():
    d = np.array([10.0, 20, 40, 80, 160])
    w = windowed_orders(d**-1.5, d)
    assert len(w) == 3
    assert np.allclose(w, 1.5)


def test_homogeneous_sweep_is_exact():
    t = eta_fourier_polygon(homogeneous(2.0), 6)
    plan = SweepPlan(t, SQ, [BlochParams((0.4, 0.2), 1.0)], (2, 3, 4, 6), 4)
    rec = resolution_sweep(plan)
    assert np.ptp(rec.kappa2[0], axis=0).max() < 1e-12
    assert np.abs(rec.errors).max() < 1e-12


def test_sweep_plan_validation():
    t = eta_fourier_polygon(homogeneous(2.0), 4)
    with pytest.raises(ValueError):
        SweepPlan(t, SQ, [], (4, 3, 2), 1)
    with pytest.raises(ValueError):
        SweepPlan(t, SQ, [], (2, 4, 6), 1)


def test_rod_sweep_monotone(rod_table):
    plan = SweepPlan(rod_table, SQ, [BlochParams((0.5, 0.4), 0.5)], (3, 4, 6, 8), 3)
    rec = resolution_sweep(plan)
    assert np.all(np.diff(rec.kappa2[0], axis=0) <= 1e-9)
    assert np.all(np.diff(np.abs(rec.errors[0]), axis=0) < 0)


def test_threads_match_serial(rod_table):
    plan = SweepPlan(rod_table, SQ, [BlochParams((0.5, 0.4), 0.5), BlochParams((0.1, 0.0), 1.0)], (2, 3, 4), 2)
    a = resolution_sweep(plan, threads=1)
    b = resolution_sweep(plan, threads=3)
    assert np.array_equal(a.kappa2, b.kappa2)


def test_gaps_synthetic():
    assert detect_gaps([[1, 3], [2, 4]]) == [(2.0, 3.0)]
    assert detect_gaps([[1, 2], [3, 4]]) == []


def test_homogeneous_bands_are_folded_parabolas():
    t = eta_fourier_polygon(homogeneous(2.0), 3)
    rec = reciprocal_lattice(SQ)
    path = KPath(((0, 0), (np.pi, 0), (np.pi, np.pi)), ("G", "X", "M"), 4)
    bt = band_sweep(t, SQ, path, 0.5, 3, 6)
    m = np.stack(np.meshgrid(np.arange(-3, 4), np.arange(-3, 4)), -1).reshape(-1, 2)
    G = rec.vectors(m)
    for xi, row in zip(bt.xi, bt.kappa2):
        k2 = (np.sum((G + xi) ** 2, axis=1) + 0.25) / 2.0
        assert np.allclose(row, np.sort(np.repeat(k2, 2))[:6], rtol=1e-12)
    assert detect_gaps(bt.kappa2) == []
