import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcfband.errors import TableTooSmall, Undersampled
from pcfband.geometry import PolygonalPartition, Region
from pcfband.lattice import Lattice2D, reciprocal_lattice
from pcfband.medium import (
    FourierTable,
    PermittivityMap,
    eta_fourier_grid,
    eta_fourier_polygon,
    homogeneous,
    index_grid,
    polygon_fourier,
    regular_polygon,
    square_rod,
)

SQ = Lattice2D.square()


def test_homogeneous_table():
    t = eta_fourier_polygon(homogeneous(4.0), 3)
    assert t.mean == pytest.approx(0.25)
    off = t.coeffs.copy()
    off[t.span, t.span] = 0
    assert np.max(np.abs(off)) == 0.0


def test_homogeneous_grid_table():
    t = eta_fourier_grid(homogeneous(4.0), 64, 2)
    off = t.coeffs.copy()
    assert off[t.span, t.span] == pytest.approx(0.25, abs=1e-14)
    off[t.span, t.span] = 0
    assert np.max(np.abs(off)) < 1e-14


def test_rectangle_matches_separable_sinc():
    # indicator of [x0,x1]x[y0,y1]: product of 1D transforms
    x0, x1, y0, y1 = -0.1, 0.3, -0.25, 0.05
    poly = np.array([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
    m1, m2 = index_grid(5)
    G = np.stack([m1, m2], axis=-1) * 2 * np.pi

    def one_d(g, a, b):
        out = np.where(g == 0, b - a, 0j)
        nz = g != 0
        out[nz] = (np.exp(-1j * g[nz] * a) - np.exp(-1j * g[nz] * b)) / (1j * g[nz])
        return out

    exact = one_d(G[..., 0], x0, x1) * one_d(G[..., 1], y0, y1)
    assert np.max(np.abs(polygon_fourier(poly, G) - exact)) < 1e-14


def test_polygon_fourier_zero_is_area():
    poly = regular_polygon(7, 0.3)
    area = 0.5 * 7 * 0.09 * np.sin(2 * np.pi / 7)
    assert polygon_fourier(poly, np.zeros(2)).real == pytest.approx(area, rel=1e-14)


def test_rod_grid_oracle():
    med = square_rod()
    a = eta_fourier_polygon(med, 8)
    b = eta_fourier_grid(med, 1024, 8)
    assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-3


def test_disc_64gon_grid_oracle():
    med = PermittivityMap(PolygonalPartition(SQ, (Region(regular_polygon(64, 0.3), 13.0),), 1.0))
    a = eta_fourier_polygon(med, 8)
    b = eta_fourier_grid(med, 1024, 8)
    assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-4


def test_centrosymmetric_is_real():
    t = eta_fourier_polygon(square_rod(), 6)
    assert np.max(np.abs(t.coeffs.imag)) < 1e-12
    h = PermittivityMap(PolygonalPartition(Lattice2D.hexagonal(), (Region(regular_polygon(6, 0.3), 5.0),), 1.0))
    assert np.max(np.abs(eta_fourier_polygon(h, 4).coeffs.imag)) < 1e-12


def test_mean_is_eta_average():
    med = square_rod()
    assert eta_fourier_polygon(med, 2).mean.real == pytest.approx(med.eta_average(), rel=1e-14)
    assert med.eta_average() == pytest.approx(0.16 / 13 + 0.84)


def test_undersampled():
    with pytest.raises(Undersampled):
        eta_fourier_grid(square_rod(), 100, 8)


def test_table_range():
    t = eta_fourier_polygon(square_rod(), 2)
    t(4, -4)
    with pytest.raises(TableTooSmall):
        t(5, 0)
    with pytest.raises(TableTooSmall):
        t.truncated(3)
    assert np.array_equal(t.truncated(1).coeffs, t.coeffs[2:-2, 2:-2])


def test_from_modes_fills_conjugates():
    t = FourierTable.from_modes({(0, 0): 0.5, (1, 0): 0.1 + 0.05j}, 2)
    assert t(-1, 0) == pytest.approx(0.1 - 0.05j)
    assert t.conjugate_symmetry_error() == 0.0


@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_translation_covariance(tx, ty):
    # eta(x - t) has coefficients exp(-i G.t) eta_hat(G)
    base = square_rod()
    moved = square_rod(center=(tx, ty))
    a = eta_fourier_polygon(base, 3)
    b = eta_fourier_polygon(moved, 3)
    m1, m2 = index_grid(a.span)
    G = np.stack([m1, m2], axis=-1) @ reciprocal_lattice(SQ).matrix
    phase = np.exp(-1j * (G[..., 0] * tx + G[..., 1] * ty))
    assert np.max(np.abs(b.coeffs - phase * a.coeffs)) < 1e-10


@given(st.integers(3, 12), st.floats(0.05, 0.45), st.floats(1.1, 20))
def test_conjugate_symmetry_regular_polygons(n, r, n2):
    med = PermittivityMap(PolygonalPartition(SQ, (Region(regular_polygon(n, r, (0.1, -0.05)), n2),), 1.0))
    t = eta_fourier_polygon(med, 3)
    assert t.conjugate_symmetry_error() < 1e-14
