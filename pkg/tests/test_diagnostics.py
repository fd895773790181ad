import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcfband.diagnostics import (
    TrigField,
    add,
    check_garding,
    check_identity,
    curl_xi,
    div_xi,
    form_value,
    grad_norm2,
    grad_xi,
    project_divergence_free,
    random_field,
)
from pcfband.errors import ParamMismatch
from pcfband.lattice import Lattice2D
from pcfband.medium import eta_fourier_polygon, homogeneous, square_rod

SQ = Lattice2D.square()
ROD = eta_fourier_polygon(square_rod(), 3)
AIR = eta_fourier_polygon(homogeneous(1.0), 3)


def zero_field(N=2, xi=(0.0, 0.0), beta=0.0, vector=True):
    n = (2 * N + 1) ** 2
    return TrigField(SQ, N, xi, beta, np.zeros((n, 3) if vector else n))


def test_constant_field_has_no_derivatives():
    v = zero_field()
    c = v.coeffs.copy()
    c[len(c) // 2] = (1, 2j, -0.5)
    v = v.with_coeffs(c)
    assert curl_xi(v).norm2() == 0
    assert div_xi(v).norm2() == 0


def test_zero_field_identity():
    chk = check_identity(zero_field())
    assert chk.lhs == chk.rhs == chk.gap == 0


def test_single_mode_pythagoras():
    v = zero_field(1, (0.3, -0.2), 0.7)
    c = v.coeffs.copy()
    c[2] = (0.3, 1j, -2.0)
    v = v.with_coeffs(c)
    chk = check_identity(v)
    assert chk.relative_gap < 1e-14


@given(st.integers(0, 2**32 - 1))
def test_identity_random(seed):
    rng = np.random.default_rng(seed)
    v = random_field(SQ, 3, rng.uniform(-np.pi, np.pi, 2), rng.uniform(-2, 2), rng)
    assert check_identity(v).relative_gap < 1e-12


@given(st.integers(0, 2**32 - 1))
def test_div_curl_and_curl_grad_vanish(seed):
    rng = np.random.default_rng(seed)
    v = random_field(SQ, 2, rng.uniform(-np.pi, np.pi, 2), rng.uniform(-2, 2), rng)
    scale = np.abs(v.coeffs).max() * np.abs(v.k).max() ** 2
    assert np.abs(div_xi(curl_xi(v)).coeffs).max() < 1e-13 * scale
    s = v.with_coeffs(v.coeffs[:, 0])
    assert np.abs(curl_xi(grad_xi(s)).coeffs).max() < 1e-13 * scale


def test_projection_is_divergence_free(rng):
    v = random_field(SQ, 3, (0.4, 0.1), 1.2, rng)
    w = project_divergence_free(v)
    assert np.abs(div_xi(w).coeffs).max() < 1e-12
    assert np.allclose(project_divergence_free(w).coeffs, w.coeffs)


def test_param_mismatch():
    with pytest.raises(ParamMismatch):
        add(zero_field(xi=(0.1, 0.0)), zero_field(xi=(0.2, 0.0)))


def test_form_nonnegative(rng):
    for _ in range(10):
        v = random_field(SQ, 2, rng.uniform(-np.pi, np.pi, 2), rng.uniform(-2, 2), rng)
        assert form_value(v, ROD) >= 0


def test_form_homogeneous_is_curl_norm(rng):
    v = random_field(SQ, 2, (0.2, 0.3), 0.5, rng)
    assert form_value(v, AIR) == pytest.approx(curl_xi(v).norm2(), rel=1e-13)


def test_garding_constant_field():
    v = zero_field(2, (0.0, 0.0), 0.0)
    c = v.coeffs.copy()
    c[len(c) // 2] = (1.0, 0.0, 0.0)
    v = v.with_coeffs(c)
    g = check_garding(v, AIR, 1.0)
    assert g.form == 0
    assert g.lhs == pytest.approx(v.norm2())
    assert g.slack == pytest.approx(0.5 * v.norm2())


def test_garding_homogeneous_per_mode(rng):
    # n = 1: ||grad_xi v||^2 + 3|xi|^2 ||v||^2 >= 1/2 ||grad v||^2 for div-free v
    for _ in range(20):
        v = random_field(SQ, 2, rng.uniform(-np.pi, np.pi, 2), rng.uniform(-2, 2), rng, divergence_free=True)
        g = check_garding(v, AIR, 1.0)
        assert g.slack >= -1e-10 * (1 + abs(g.lhs))
        assert g.form == pytest.approx(grad_norm2(v), rel=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_garding_rod(seed):
    rng = np.random.default_rng(seed)
    xi = rng.uniform(-np.pi, np.pi, 2)
    v = random_field(SQ, 3, xi, rng.uniform(-2, 2), rng, divergence_free=True)
    g = check_garding(v, ROD, np.sqrt(13.0))
    assert g.slack >= -1e-10 * (1 + abs(g.lhs))
    assert g.slack2 >= -1e-10 * (1 + abs(g.lhs2))
