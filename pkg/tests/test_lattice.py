import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcfband.errors import DegenerateLattice, EmptyPath
from pcfband.lattice import (
    KPath,
    Lattice2D,
    fold_to_zone,
    in_zone,
    reciprocal_lattice,
    sample_kpath,
    zone_fractional,
)

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def test_square_reciprocal():
    rec = reciprocal_lattice(Lattice2D.square())
    assert np.allclose(rec.b1, [2 * np.pi, 0])
    assert np.allclose(rec.b2, [0, 2 * np.pi])


def test_hexagonal_biorthogonal():
    lat = Lattice2D((1, 0), (0.5, np.sqrt(3) / 2))
    rec = reciprocal_lattice(lat)
    A = lat.matrix
    assert np.allclose(A @ rec.matrix.T, 2 * np.pi * np.eye(2), atol=1e-14)


@given(finite, finite, finite, finite)
def test_biorthogonality_property(a, b, c, d):
    try:
        lat = Lattice2D((a, b), (c, d))
    except DegenerateLattice:
        return
    if abs(lat.det) < 1e-6:
        return
    rec = reciprocal_lattice(lat)
    err = lat.matrix @ rec.matrix.T - 2 * np.pi * np.eye(2)
    scale = np.linalg.norm(lat.matrix) * np.linalg.norm(rec.matrix)
    assert np.max(np.abs(err)) <= 1e-12 * scale


def test_degenerate_lattice():
    with pytest.raises(DegenerateLattice):
        Lattice2D((1, 0), (2, 0))


def test_rectangular_zone():
    lat = Lattice2D((2.0, 0.0), (0.0, 0.5))
    assert in_zone((np.pi / 2, 2 * np.pi), lat)
    assert not in_zone((np.pi / 2 + 1e-6, 0.0), lat)
    assert not in_zone((0.0, 2 * np.pi + 1e-6), lat)


@given(finite, finite)
def test_fold_is_idempotent_and_lands_in_zone(x, y):
    lat = Lattice2D.hexagonal()
    f = fold_to_zone((x, y), lat)
    assert in_zone(f, lat, tol=1e-9)
    assert np.allclose(fold_to_zone(f, lat), f)
    # the shift is a reciprocal lattice vector
    m = zone_fractional(np.array((x, y)) - f, lat)
    assert np.allclose(m, np.round(m), atol=1e-9)


def test_path_two_samples():
    path = KPath(((0, 0), (np.pi, 0)), ("G", "X"), samples=2)
    pts = sample_kpath(path)
    assert np.allclose([p.xi for p in pts], [(0, 0), (np.pi / 2, 0), (np.pi, 0)])
    assert [p.label for p in pts] == ["G", "", "X"]


def test_path_single_vertex():
    pts = sample_kpath(KPath(((0.3, 0.1),), ("P",), samples=4))
    assert len(pts) == 1
    assert pts[0].arclength == 0.0


def test_path_arclength():
    path = KPath(((0, 0), (np.pi, 0), (np.pi, np.pi)), ("G", "X", "M"), samples=1)
    pts = sample_kpath(path)
    assert np.allclose([p.arclength for p in pts], [0, np.pi, 2 * np.pi])


def test_empty_path():
    with pytest.raises(EmptyPath):
        sample_kpath(KPath((), (), samples=3))
