"""Floquet eigenproblem in a divergence-free transverse planewave basis.

For Bloch parameters (xi', beta) the periodic part of the magnetic field is
expanded as

    u(x') = sum_{G, p} c_{G,p} e_p(G) exp(i G.x'),

where k_G = (xi' + G, beta) and e_1(G), e_2(G) span the plane orthogonal to
k_G. Every basis function is divergence free for the shifted gradient, and
the Galerkin matrix of the curl-curl form is

    A[(G,p), (G',p')] = eta_hat(G - G') (k_G x e_p) . (k_G' x e_p').

The planewaves and polarisation vectors are orthonormal, so the mass matrix
is the identity and the problem is a standard Hermitian eigenproblem with
eigenvalues kappa^2 (units with eps0 = mu0 = 1 and unit pitch).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.signal import fftconvolve

from .errors import OutsideZone, SolverDiverged, TableTooSmall, ZeroFrequency
from .lattice import Lattice2D, in_zone, reciprocal_lattice
from .medium import FourierTable, PermittivityMap, cell_grid, index_grid

PARALLEL_TOL = 1e-12
ZERO_K_TOL = 1e-14
CLUSTER_GAP = 1e-10


def _ro(a):
    a = np.asarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class BlochParams:
    xi: tuple
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(float(c) for c in self.xi))
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def k0(self) -> np.ndarray:
        return np.array([self.xi[0], self.xi[1], self.beta])


def basis_indices(cutoff: int) -> np.ndarray:
    """(m1, m2) with |m_i| <= N in lexicographic order."""
    m = np.arange(-cutoff, cutoff + 1)
    m1, m2 = np.meshgrid(m, m, indexing="ij")
    return np.stack([m1.ravel(), m2.ravel()], axis=1)


def polarization_frame(k: np.ndarray):
    """Orthonormal (e1, e2) orthogonal to each row of k, plus a zero-mode mask."""
    k = np.atleast_2d(np.asarray(k, dtype=float))
    n = len(k)
    e1 = np.zeros((n, 3))
    e2 = np.zeros((n, 3))
    knorm = np.linalg.norm(k, axis=1)
    kxy = np.linalg.norm(k[:, :2], axis=1)
    axial = kxy < PARALLEL_TOL
    e1[axial] = (1.0, 0.0, 0.0)
    e2[axial] = (0.0, 1.0, 0.0)
    gen = ~axial
    khat = k[gen] / knorm[gen, None]
    z = np.array([0.0, 0.0, 1.0])
    a = np.cross(z, khat)
    a /= np.linalg.norm(a, axis=1)[:, None]
    e1[gen] = a
    e2[gen] = np.cross(khat, a)
    zero = knorm < ZERO_K_TOL
    return e1, e2, zero


@dataclass(frozen=True)
class PlanewaveBasis:
    params: BlochParams
    lattice: Lattice2D
    cutoff: int
    m: np.ndarray
    G: np.ndarray
    k: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    zero_mode: np.ndarray

    def __len__(self):
        return len(self.m)

    @property
    def dim(self) -> int:
        return 2 * len(self.m)

    @property
    def polarizations(self) -> np.ndarray:
        """Row 2g+p is e_p of planewave g."""
        P = np.empty((self.dim, 3))
        P[0::2] = self.e1
        P[1::2] = self.e2
        return P

    @property
    def curl_vectors(self) -> np.ndarray:
        """Row 2g+p is k_G x e_p."""
        return np.cross(np.repeat(self.k, 2, axis=0), self.polarizations)

    @property
    def n_zero_modes(self) -> int:
        return 2 * int(np.count_nonzero(self.zero_mode))

    def vector_coefficients(self, c: np.ndarray) -> np.ndarray:
        """Cartesian coefficient vectors u_G (shape (n, 3)) from basis coefficients."""
        c = np.asarray(c).reshape(-1, 2)
        return c[:, :1] * self.e1 + c[:, 1:] * self.e2


def build_basis(params: BlochParams, lat: Lattice2D, cutoff: int) -> PlanewaveBasis:
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    if not in_zone(params.xi, lat):
        raise OutsideZone(f"xi' = {params.xi} lies outside the first zone; fold it first")
    rec = reciprocal_lattice(lat)
    m = basis_indices(cutoff)
    G = rec.vectors(m)
    k = np.column_stack([G + np.asarray(params.xi), np.full(len(G), params.beta)])
    e1, e2, zero = polarization_frame(k)
    return PlanewaveBasis(
        params, lat, cutoff, _ro(m), _ro(G), _ro(k), _ro(e1), _ro(e2), _ro(zero)
    )


@dataclass(frozen=True)
class OperatorMatrix:
    matrix: np.ndarray
    basis: PlanewaveBasis
    table: FourierTable

    @property
    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def eta_matrix(basis: PlanewaveBasis, table: FourierTable) -> np.ndarray:
    """Toeplitz block eta_hat(G - G') over the basis."""
    if table.span < 2 * basis.cutoff:
        raise TableTooSmall(
            f"table covers |m| <= {table.span}, basis cutoff {basis.cutoff} needs {2 * basis.cutoff}"
        )
    dm = basis.m[:, None, :] - basis.m[None, :, :]
    return table(dm[..., 0], dm[..., 1])


def assemble(basis: PlanewaveBasis, table: FourierTable) -> OperatorMatrix:
    E = eta_matrix(basis, table)
    W = basis.curl_vectors
    A = np.repeat(np.repeat(E, 2, axis=0), 2, axis=1) * (W @ W.T)
    return OperatorMatrix(_ro(A), basis, table)


@dataclass(frozen=True)
class EigenSolution:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    basis: PlanewaveBasis
    table: FourierTable
    residuals: np.ndarray
    clusters: tuple = field(default=())

    @property
    def params(self) -> BlochParams:
        return self.basis.params

    @property
    def nev(self) -> int:
        return len(self.eigenvalues)

    def coefficients(self, band: int) -> np.ndarray:
        """u_G for one band, shape (n, 3)."""
        if not 0 <= band < self.nev:
            raise IndexError(f"band {band} not in [0, {self.nev})")
        return self.basis.vector_coefficients(self.eigenvectors[:, band])


def _clusters(vals: np.ndarray) -> tuple:
    groups = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i] - vals[i - 1] >= CLUSTER_GAP * max(1.0, abs(vals[i])):
            groups.append(tuple(range(start, i)))
            start = i
    return tuple(groups)


def fix_phase(V: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of every column real and positive."""
    idx = np.argmax(np.abs(V), axis=0)
    piv = V[idx, np.arange(V.shape[1])]
    return V * (np.abs(piv) / piv)[None, :]


def eigensolve(op: OperatorMatrix, nev: int, tol: float = 1e-10) -> EigenSolution:
    """Smallest ``nev`` eigenpairs of the Hermitian operator, ascending.

    Dense LAPACK Hermitian solver (Householder tridiagonalisation followed by
    the MRRR tridiagonal eigensolver).
    """
    A = op.matrix
    n = A.shape[0]
    if not 1 <= nev <= n:
        raise ValueError(f"nev={nev} must lie in [1, {n}]")
    if not 0 < tol <= 1e-4:
        raise ValueError("tol must lie in (0, 1e-4]")
    vals, vecs = scipy.linalg.eigh(A, subset_by_index=[0, nev - 1], driver="evr")
    vecs = fix_phase(vecs)
    scale = max(np.linalg.norm(A, 1), 1e-300)
    res = np.linalg.norm(A @ vecs - vecs * vals[None, :], axis=0)
    if np.any(res > tol * scale):
        worst = float(np.max(res) / scale)
        raise SolverDiverged(f"relative residual {worst:.3e} exceeds tol {tol:.1e}", worst)
    return EigenSolution(_ro(vals), _ro(vecs), op.basis, op.table, _ro(res), _clusters(vals))


def solve_bloch(
    table: FourierTable,
    lat: Lattice2D,
    params: BlochParams,
    cutoff: int,
    nbands: int,
    tol: float = 1e-10,
    keep_zero_modes: bool = False,
) -> EigenSolution:
    """Assemble and solve in one go, dropping the k = 0 null modes by default."""
    basis = build_basis(params, lat, cutoff)
    op = assemble(basis, table)
    nz = 0 if keep_zero_modes else basis.n_zero_modes
    sol = eigensolve(op, min(nbands + nz, basis.dim), tol)
    if nz == 0:
        return sol
    return EigenSolution(
        _ro(sol.eigenvalues[nz:]),
        _ro(sol.eigenvectors[:, nz:]),
        sol.basis,
        sol.table,
        _ro(sol.residuals[nz:]),
        _clusters(sol.eigenvalues[nz:]),
    )


# -- fields ------------------------------------------------------------------


@dataclass(frozen=True)
class FieldSample:
    """Complex 3-vector field on the node grid x_ij = (i/M) a1 + (j/M) a2."""

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray  # shape (3, M, M)
    beta: float


def synthesize(basis: PlanewaveBasis, coeffs: np.ndarray, M: int, bloch: bool = True) -> np.ndarray:
    """Evaluate sum_G coeffs_G exp(i (xi'+G).x) on the M x M node grid.

    ``coeffs`` has shape (n,) or (n, c). Aliased modes are accumulated, so
    the values at grid points are exact for any M.
    """
    coeffs = np.asarray(coeffs)
    scalar = coeffs.ndim == 1
    C = coeffs.reshape(len(basis), -1)
    grid = np.zeros((C.shape[1], M, M), dtype=complex)
    i1 = basis.m[:, 0] % M
    i2 = basis.m[:, 1] % M
    for c in range(C.shape[1]):
        np.add.at(grid[c], (i1, i2), C[:, c])
    vals = np.fft.ifft2(grid, axes=(1, 2)) * (M * M)
    if bloch:
        x, y = cell_grid(basis.lattice, M, offset=0.0)
        vals = vals * np.exp(1j * (basis.params.xi[0] * x + basis.params.xi[1] * y))[None]
    return vals[0] if scalar else vals


def reconstruct_H(sol: EigenSolution, band: int, M: int) -> FieldSample:
    u = sol.coefficients(band)
    x, y = cell_grid(sol.basis.lattice, M, offset=0.0)
    return FieldSample(x, y, synthesize(sol.basis, u, M), sol.params.beta)


def divergence_bound(sol: EigenSolution, band: int) -> float:
    """sum_G |k_G . u_G|: bounds the shifted divergence of h at every point."""
    u = sol.coefficients(band)
    return float(np.sum(np.abs(np.einsum("gi,gi->g", sol.basis.k, u))))


def _omega(sol: EigenSolution, band: int) -> float:
    kappa2 = float(sol.eigenvalues[band])
    if kappa2 <= 1e-12:
        raise ZeroFrequency(f"band {band} has kappa^2 = {kappa2:.3e}; E = i/(omega eps) curl H needs omega != 0")
    return np.sqrt(kappa2)


def eta_on_grid(table: FourierTable, lat: Lattice2D, M: int) -> np.ndarray:
    """Real Fourier synthesis of eta from its table on the node grid."""
    S = table.span
    m1, m2 = index_grid(S)
    grid = np.zeros((M, M), dtype=complex)
    np.add.at(grid, (m1.ravel() % M, m2.ravel() % M), table.coeffs.ravel())
    return np.real(np.fft.ifft2(grid) * (M * M))


def recover_E(
    sol: EigenSolution, band: int, M: int, medium: PermittivityMap | None = None
) -> FieldSample:
    """e = i/(omega n^2(x)) curl h, evaluated pointwise on the node grid.

    omega = +sqrt(kappa^2). Without ``medium`` the permittivity is taken from
    the Fourier series of the table (exact for injected smooth media).
    """
    omega = _omega(sol, band)
    u = sol.coefficients(band)
    curl = 1j * np.cross(sol.basis.k, u)
    ch = synthesize(sol.basis, curl, M)
    x, y = cell_grid(sol.basis.lattice, M, offset=0.0)
    if medium is not None:
        eta = medium.eta_at(x, y)
    else:
        eta = eta_on_grid(sol.table, sol.basis.lattice, M)
    return FieldSample(x, y, 1j / omega * eta[None] * ch, sol.params.beta)


def e_coefficients(sol: EigenSolution, band: int) -> np.ndarray:
    """Galerkin projection of e onto the basis planewaves, shape (n, 3)."""
    omega = _omega(sol, band)
    u = sol.coefficients(band)
    w = 1j * np.cross(sol.basis.k, u)
    E = eta_matrix(sol.basis, sol.table)
    return 1j / omega * (E @ w)


def faraday_residual(sol: EigenSolution, band: int) -> float:
    """|| curl e - i omega h || / || h || in the truncated space (mu = 1)."""
    omega = _omega(sol, band)
    u = sol.coefficients(band)
    e = e_coefficients(sol, band)
    r = 1j * np.cross(sol.basis.k, e) - 1j * omega * u
    return float(np.linalg.norm(r) / np.linalg.norm(u))


@dataclass(frozen=True)
class Reg4Residual:
    r_a: float
    r_b: float
    r_c: float
    r_d: float
    test_cutoff: int

    def as_tuple(self):
        return (self.r_a, self.r_b, self.r_c, self.r_d)


def residual_reg4(
    sol: EigenSolution, band: int, table: FourierTable | None = None, test_cutoff: int | None = None
) -> Reg4Residual:
    """Weak residuals of the four component equations of L h = kappa^2 h, div h = 0.

    The x, y, z components of (L u - kappa^2 u) are tested against all
    planewaves with |m_i| <= test_cutoff (default 2N) and measured in the
    dual H^-1 norm sum |R_G|^2 / (1 + |k_G|^2), relative to ||u||. The
    fourth number is the L2 norm of the shifted divergence, which the
    transverse basis makes zero up to rounding.
    """
    N = sol.basis.cutoff
    T = 2 * N if test_cutoff is None else test_cutoff
    if T < N:
        raise ValueError("test cutoff must be at least the basis cutoff")
    table = table or sol.table
    if table.span < T + N:
        raise TableTooSmall(f"need eta_hat up to |m| <= {T + N}, table has {table.span}")
    S = table.span
    u = sol.coefficients(band)
    k = sol.basis.k
    w = 1j * np.cross(k, u)
    side = 2 * N + 1
    W = w.T.reshape(3, side, side)
    ew = np.stack([fftconvolve(table.coeffs, W[c]) for c in range(3)])
    lo = S + N - T
    ew = ew[:, lo : lo + 2 * T + 1, lo : lo + 2 * T + 1].reshape(3, -1).T

    rec = reciprocal_lattice(sol.basis.lattice)
    mt = basis_indices(T)
    kt = np.column_stack([rec.vectors(mt) + np.asarray(sol.params.xi), np.full(len(mt), sol.params.beta)])
    Lu = 1j * np.cross(kt, ew)
    ut = np.zeros((len(mt), 3), dtype=complex)
    pos = (sol.basis.m[:, 0] + T) * (2 * T + 1) + (sol.basis.m[:, 1] + T)
    ut[pos] = u
    R =Lu - sol.eigenvalues[band] * ut
    weight = 1.0 / (1.0 + np.sum(np.abs(kt) ** 2, axis=1))
    unorm = np.linalg.norm(u)
    r = np.sqrt(np.sum(np.abs(R) ** 2 * weight[:, None], axis=0)) / unorm
    div = np.einsum("gi,gi->g", k, u)
    r_d = float(np.linalg.norm(div) / unorm)
    return Reg4Residual(float(r[0]), float(r[1]), float(r[2]), r_d, T)


def evaluate_at(basis: PlanewaveBasis, coeffs: np.ndarray, points, bloch: bool = True) -> np.ndarray:
    """Direct sum of the planewave series at arbitrary Cartesian points.

    ``points`` has shape (P, 2); returns shape (P,) or (P, c).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    k = basis.G + (np.asarray(basis.params.xi) if bloch else 0.0)
    phase = np.exp(1j * pts @ k.T)
    return phase @ np.asarray(coeffs)


def e_at(sol: EigenSolution, band: int, points, medium: PermittivityMap) -> np.ndarray:
    """e = i/(omega n^2) curl h at points, shape (P, 3)."""
    omega = _omega(sol, band)
    u = sol.coefficients(band)
    curl = evaluate_at(sol.basis, 1j * np.cross(sol.basis.k, u), points)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    eta = medium.eta_at(pts[:, 0], pts[:, 1])
    return 1j / omega * eta[:, None] * curl


def tangential_jump(
    sol: EigenSolution,
    band: int,
    medium: PermittivityMap,
    p,
    q,
    offset: float = 1e-3,
    samples: int = 21,
    margin: float = 0.25,
) -> float:
    """Max jump of tangential e across the segment p -> q, relative to max |e| there.

    The trace is sampled at interior points of the segment (``margin`` of its
    length is skipped at each end, away from corners) at distance ``offset``
    on either side. The tangential part keeps the in-plane component along
    the segment and the z component.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = q - p
    L = float(np.hypot(*d))
    if L == 0:
        raise ValueError("degenerate segment")
    t = d / L
    nrm = np.array([t[1], -t[0]])
    s = np.linspace(margin, 1 - margin, samples)
    base = p[None] + s[:, None] * d[None]
    plus = e_at(sol, band, base + offset * nrm, medium)
    minus = e_at(sol, band, base - offset * nrm, medium)

    def tangential(e):
        return np.stack([e[:, 0] * t[0] + e[:, 1] * t[1], e[:, 2]], axis=1)

    jump = np.abs(tangential(plus) - tangential(minus)).max()
    scale = max(np.abs(plus).max(), np.abs(minus).max())
    return float(jump / scale)
