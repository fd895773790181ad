"""Shifted-gradient calculus on trigonometric fields and coercivity checks.

A ``TrigField`` is a truncated Fourier series of a periodic field on the
cell. All differential operators act coefficientwise with the shifted
wavevector k_G = (xi' + G, beta), and L2 norms follow from Parseval,
||v||^2 = |Q| sum_G |v_G|^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParamMismatch
from .lattice import Lattice2D, reciprocal_lattice
from .medium import FourierTable
from .planewave import basis_indices


@dataclass(frozen=True)
class TrigField:
    lattice: Lattice2D
    cutoff: int
    xi: tuple
    beta: float
    coeffs: np.ndarray  # (n, 3) for vector fields, (n,) for scalars

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(float(c) for c in self.xi))
        object.__setattr__(self, "beta", float(self.beta))
        c = np.array(self.coeffs, dtype=complex)
        n = (2 * self.cutoff + 1) ** 2
        if c.shape[0] != n or c.ndim not in (1, 2) or (c.ndim == 2 and c.shape[1] != 3):
            raise ValueError(f"expected {n} coefficients of shape () or (3,), got {c.shape}")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def m(self) -> np.ndarray:
        return basis_indices(self.cutoff)

    @property
    def G(self) -> np.ndarray:
        return reciprocal_lattice(self.lattice).vectors(self.m)

    @property
    def G3(self) -> np.ndarray:
        """Unshifted gradient wavevectors (G, 0)."""
        return np.column_stack([self.G, np.zeros(len(self.m))])

    @property
    def k(self) -> np.ndarray:
        return np.column_stack([self.G + np.asarray(self.xi), np.full(len(self.m), self.beta)])

    @property
    def is_vector(self) -> bool:
        return self.coeffs.ndim == 2

    def with_coeffs(self, c) -> "TrigField":
        return TrigField(self.lattice, self.cutoff, self.xi, self.beta, c)

    def norm2(self) -> float:
        return self.lattice.cell_area * float(np.sum(np.abs(self.coeffs) ** 2))


def _same_params(a: TrigField, b: TrigField):
    if a.cutoff != b.cutoff or a.xi != b.xi or a.beta != b.beta or a.lattice != b.lattice:
        raise ParamMismatch("fields carry different Bloch parameters or cutoffs")


def curl_xi(v: TrigField) -> TrigField:
    if not v.is_vector:
        raise ValueError("curl needs a vector field")
    return v.with_coeffs(1j * np.cross(v.k, v.coeffs))


def div_xi(v: TrigField) -> TrigField:
    if not v.is_vector:
        raise ValueError("div needs a vector field")
    return v.with_coeffs(1j * np.einsum("gi,gi->g", v.k, v.coeffs))


def grad_xi(s: TrigField) -> TrigField:
    if s.is_vector:
        raise ValueError("grad needs a scalar field")
    return s.with_coeffs(1j * s.k * s.coeffs[:, None])


def add(a: TrigField, b: TrigField) -> TrigField:
    _same_params(a, b)
    return a.with_coeffs(a.coeffs + b.coeffs)


def grad_norm2(v: TrigField, shifted: bool = True) -> float:
    """||grad v||^2 summed over components; plain gradient when ``shifted`` is False."""
    k = v.k if shifted else v.G3
    k2 = np.sum(k**2, axis=1)
    c2 = np.abs(v.coeffs) ** 2
    if v.is_vector:
        c2 = c2.sum(axis=1)
    return v.lattice.cell_area * float(np.sum(k2 * c2))


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float
    gap: float

    @property
    def relative_gap(self) -> float:
        return self.gap / max(self.rhs, 1e-300) if self.rhs else self.gap


def check_identity(v: TrigField) -> IdentityCheck:
    """||curl v||^2 + ||div v||^2 against ||grad v||^2 (all shifted)."""
    lhs = curl_xi(v).norm2() + div_xi(v).norm2()
    rhs = grad_norm2(v)
    return IdentityCheck(lhs, rhs, abs(lhs - rhs))


def project_divergence_free(v: TrigField) -> TrigField:
    """Remove the k_G-parallel part of every coefficient (k_G = 0 is kept)."""
    k = v.k
    k2 = np.sum(k**2, axis=1)
    kv = np.einsum("gi,gi->g", k, v.coeffs)
    scale = np.divide(kv, k2, out=np.zeros_like(kv), where=k2 > 0)
    return v.with_coeffs(v.coeffs - scale[:, None] * k)


def form_value(v: TrigField, table: FourierTable) -> float:
    """a(v, v) = integral of eta |curl v|^2, exact for trigonometric v."""
    w = curl_xi(v).coeffs
    m = v.m
    dm = m[:, None, :] - m[None, :, :]
    E = table(dm[..., 0], dm[..., 1])
    val = np.einsum("gi,gh,hi->", w.conj(), E, w)
    return v.lattice.cell_area * float(val.real)


@dataclass(frozen=True)
class GardingCheck:
    """Both coercivity bounds for a divergence-free field.

    ``slack`` is for the bound with the full wavevector (xi', beta) in the
    shift term; ``slack2`` is for the transverse-shift version with the
    extra beta^2 ||v||^2 on the right.
    """

    lhs: float
    rhs: float
    slack: float
    lhs2: float
    rhs2: float
    slack2: float
    form: float


def check_garding(v: TrigField, table: FourierTable, n_inf: float) -> GardingCheck:
    """Evaluate the Garding inequalities after projecting v onto div-free fields.

    ``n_inf`` is the sup of the refractive index n (not n^2).
    """
    v = project_divergence_free(v)
    a = form_value(v, table)
    l2 = v.norm2()
    h1 = l2 + grad_norm2(v, shifted=False)
    xi2 = v.xi[0] ** 2 + v.xi[1] ** 2
    full2 = xi2 + v.beta**2
    lhs = n_inf**2 * a + (3 * full2 + 1) * l2
    rhs = 0.5 * h1
    lhs2 = n_inf**2 * a + (3 * xi2 + 1) * l2
    rhs2 = 0.5 * h1 + v.beta**2 * l2
    return GardingCheck(lhs, rhs, lhs - rhs, lhs2, rhs2, lhs2 - rhs2, a)


def random_field(
    lattice: Lattice2D,
    cutoff: int,
    xi,
    beta: float,
    rng: np.random.Generator,
    divergence_free: bool = False,
) -> TrigField:
    """Complex Gaussian coefficients, optionally projected to div-free."""
    n = (2 * cutoff + 1) ** 2
    c = rng.standard_normal((n, 3)) + 1j * rng.standard_normal((n, 3))
    v = TrigField(lattice, cutoff, xi, beta, c)
    return project_divergence_free(v) if divergence_free else v
