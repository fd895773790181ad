import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcfband.corners import (
    SMOOTH,
    angular_determinant,
    angular_function,
    eval_singular_function,
    find_exponents,
    sigma_epsilon,
    solve_lamc,
    _transfer_entries,
    transfer_matrix,
)
from pcfband.errors import DegenerateExponent, FlatInterface, NoInterface
from pcfband.geometry import CornerSpec, PolygonalPartition, Region, extract_corners
from pcfband.lattice import Lattice2D
from pcfband.medium import square_rod

RIGHT_ANGLE_10 = (2 / math.pi) * math.acos(9 / 22)


def cross(k):
    return CornerSpec((0, 0), ((math.pi / 2, 1.0), (math.pi / 2, k), (math.pi / 2, 1.0), (math.pi / 2, k)))


def test_right_angle_closed_form():
    roots = solve_lamc(math.pi / 2, 10.0, 1.0)
    assert roots[0].lam == pytest.approx(RIGHT_ANGLE_10, abs=1e-13)
    assert roots[0].lam > 0.5
    det = find_exponents(CornerSpec.two_material(math.pi / 2, 10.0, 1.0))
    assert det[0].lam == pytest.approx(RIGHT_ANGLE_10, abs=1e-12)


def test_swap_gives_same_roots():
    a = [r.lam for r in solve_lamc(2.0, 7.0, 1.5)]
    b = [r.lam for r in solve_lamc(2.0, 1.5, 7.0)]
    assert np.allclose(a, b, atol=1e-13)


def test_nearly_equal_materials_have_no_root():
    assert solve_lamc(math.pi / 2, 1 + 1e-9, 1.0) == []
    assert find_exponents(CornerSpec.two_material(math.pi / 2, 1 + 1e-9, 1.0)) == []


def test_errors():
    with pytest.raises(FlatInterface):
        solve_lamc(math.pi, 3.0, 1.0)
    with pytest.raises(NoInterface):
        solve_lamc(1.0, 3.0, 3.0)
    with pytest.raises(ValueError):
        solve_lamc(7.0, 3.0, 1.0)


def test_homogeneous_determinant_is_rotation():
    # a single material: T is a rotation by 2 pi lambda
    lam = np.linspace(0.01, 0.99, 50)
    same = [(1.0, 2.0), (2 * math.pi - 1.0, 2.0)]
    t11, t12, t21, t22 = _transfer_entries(same, lam)
    D = (t11 - 1) * (t22 - 1) - t12 * t21
    assert np.allclose(D, 2 * (1 - np.cos(2 * math.pi * lam)), atol=1e-13)


def test_transfer_is_unimodular():
    c = cross(7.0)
    for lam in (0.1, 0.37, 0.9):
        assert np.linalg.det(transfer_matrix(c, lam)) == pytest.approx(1.0, abs=1e-12)


def test_two_sector_determinant_factorises():
    # D = 2 (cos(l w1 + l w2) - 1) + ... is zero exactly at the lamc roots
    c = CornerSpec.two_material(1.1, 30.0, 1.0)
    for r in solve_lamc(1.1, 30.0, 1.0):
        assert abs(angular_determinant(c, r.lam)) < 1e-10 * 30


def test_cross_point_closed_form():
    k = 50.0
    exact = (2 / math.pi) * math.asin(2 * math.sqrt(k) / (1 + k))
    ex = find_exponents(cross(k))
    assert ex[0].lam == pytest.approx(exact, abs=1e-10)
    assert ex[0].lam < 0.5


def test_square_rod_sigma():
    corners = extract_corners(square_rod().partition)
    lams = [find_exponents(c)[0].lam for c in corners]
    assert np.ptp(lams) < 1e-14
    assert sigma_epsilon(corners) == lams[0]
    assert lams[0] == pytest.approx(solve_lamc(math.pi / 2, 13.0, 1.0)[0].lam, abs=1e-12)


def test_no_corners_is_smooth():
    assert sigma_epsilon([]) == SMOOTH


def test_sigma_is_min_over_corner_types():
    sq = Lattice2D.square()
    tri = Region([(-0.3, -0.3), (0.1, -0.3), (-0.3, 0.2)], 20.0)
    part = PolygonalPartition(sq, (tri,), 1.0)
    corners = extract_corners(part)
    assert len(corners) == 3
    per = [find_exponents(c)[0].lam for c in corners]
    assert sigma_epsilon(corners) == min(per)
    assert np.ptp(per) > 1e-3


@given(st.floats(0.2, 2 * math.pi - 0.2), st.floats(1.2, 500))
def test_routes_agree(omega, ratio):
    if abs(omega - math.pi) < 1e-3:
        return
    a = [r.lam for r in solve_lamc(omega, ratio, 1.0)]
    b = [r.lam for r in find_exponents(CornerSpec.two_material(omega, ratio, 1.0))]
    assert len(a) >= 1
    assert a[0] == pytest.approx(b[0], abs=1e-10)
    assert all(0.5 < x < 1 for x in a)


def test_angular_function_satisfies_transmission():
    c = CornerSpec.two_material(math.pi / 2, 10.0, 1.0)
    lam = find_exponents(c)[0].lam
    phi = angular_function(c, lam)
    assert phi.max_abs() == pytest.approx(1.0)
    w = c.boundaries
    eps = phi.eps
    L = len(c.sectors)
    for l in range(L):
        nxt = (l + 1) % L
        theta_end = w[l + 1]
        theta_start = w[nxt] if nxt else 0.0
        assert phi(theta_end, sector=l) == pytest.approx(phi(theta_start, sector=nxt), abs=1e-10)
        flux_l = eps[l] * phi.derivative(theta_end, sector=l)
        flux_n = eps[nxt] * phi.derivative(theta_start, sector=nxt)
        assert flux_l == pytest.approx(flux_n, abs=1e-9)
    # inside each sector phi'' = -lam^2 phi
    th = np.linspace(0.1, 1.4, 7)
    assert np.allclose(phi.derivative(th, order=2), -lam**2 * phi(th), atol=1e-12)


def test_angular_function_degenerate():
    with pytest.raises(DegenerateExponent):
        angular_function(CornerSpec.two_material(math.pi / 2, 10.0, 1.0), 0.3)


def test_singular_function_scaling():
    c = CornerSpec((0.5, 0.5), ((math.pi / 2, 13.0), (3 * math.pi / 2, 1.0)), start_angle=math.pi / 4)
    ex = find_exponents(c)[0]
    th = np.linspace(0, 2 * math.pi, 9)[:-1]
    a = eval_singular_function(c, ex, 0.1, th)
    b = eval_singular_function(c, ex, 0.4, th)
    assert np.allclose(b, 4**ex.lam * a)
