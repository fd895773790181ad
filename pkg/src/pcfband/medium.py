"""Piecewise-constant permittivity and Fourier coefficients of eta = 1/n^2.

Coefficients use the normalised cell average

    eta_hat(G) = (1/|Q|) * integral_Q eta(x) exp(-i G.x) dx,

with G = m1 b1 + m2 b2. A table of cutoff N stores |m1|, |m2| <= 2N so that
every difference of two basis indices with |m_i| <= N is available.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TableTooSmall, Undersampled
from .geometry import PolygonalPartition, Region
from .lattice import Lattice2D, reciprocal_lattice


@dataclass(frozen=True)
class PermittivityMap:
    partition: PolygonalPartition

    @property
    def lattice(self) -> Lattice2D:
        return self.partition.lattice

    @property
    def n2_max(self) -> float:
        return max(self.partition.n2_values())

    @property
    def n2_min(self) -> float:
        return min(self.partition.n2_values())

    def n2_at(self, x, y) -> np.ndarray:
        return self.partition.n2_at(x, y)

    def eta_at(self, x, y) -> np.ndarray:
        return 1.0 / self.partition.n2_at(x, y)

    def eta_average(self) -> float:
        """Cell average of 1/n^2 computed from region areas."""
        part = self.partition
        eta_bg = 1.0 / part.background_n2
        total = eta_bg * self.lattice.cell_area
        for r in part.regions:
            total += (1.0 / r.n2 - eta_bg) * r.area
        return total / self.lattice.cell_area


@dataclass(frozen=True)
class FourierTable:
    """eta_hat on the index square |m1|, |m2| <= 2*cutoff.

    ``coeffs[m1 + 2N, m2 + 2N]`` holds eta_hat(m1 b1 + m2 b2).
    """

    cutoff: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        side = 4 * self.cutoff + 1
        if c.shape != (side, side):
            raise ValueError(f"coefficient array must be {side}x{side}, got {c.shape}")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def span(self) -> int:
        return 2 * self.cutoff

    def __call__(self, m1, m2):
        """Vectorised lookup of eta_hat at integer indices."""
        m1 = np.asarray(m1)
        m2 = np.asarray(m2)
        S = self.span
        if np.any(np.abs(m1) > S) or np.any(np.abs(m2) > S):
            raise TableTooSmall(
                f"index up to ({np.max(np.abs(m1))}, {np.max(np.abs(m2))}) requested "
                f"from a table covering |m| <= {S}"
            )
        return self.coeffs[m1 + S, m2 + S]

    @property
    def mean(self) -> complex:
        return self.coeffs[self.span, self.span]

    def conjugate_symmetry_error(self) -> float:
        return float(np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1, ::-1]))))

    def truncated(self, cutoff: int) -> "FourierTable":
        if cutoff > self.cutoff:
            raise TableTooSmall(f"cannot extend table of cutoff {self.cutoff} to {cutoff}")
        d = 2 * (self.cutoff - cutoff)
        return FourierTable(cutoff, self.coeffs[d : self.coeffs.shape[0] - d, d : self.coeffs.shape[1] - d])

    @classmethod
    def from_modes(cls, modes: dict, cutoff: int) -> "FourierTable":
        """Build a table from a sparse {(m1, m2): value} mapping.

        Used to inject smooth (trigonometric-polynomial) media directly.
        Missing conjugate partners are filled in so that eta stays real.
        """
        S = 2 * cutoff
        c = np.zeros((2 * S + 1, 2 * S + 1), dtype=complex)
        for (m1, m2), v in modes.items():
            if abs(m1) > S or abs(m2) > S:
                raise TableTooSmall(f"mode {(m1, m2)} outside |m| <= {S}")
            c[m1 + S, m2 + S] = v
        for (m1, m2), v in modes.items():
            if (-m1, -m2) not in modes:
                c[-m1 + S, -m2 + S] = np.conj(v)
        return cls(cutoff, c)


def index_grid(span: int):
    m = np.arange(-span, span + 1)
    return np.meshgrid(m, m, indexing="ij")


def polygon_fourier(poly: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Exact integral of exp(-i G.x) over a counterclockwise polygon.

    Divergence theorem turns the area integral into a sum over edges,

        F(G) = (i/|G|^2) sum_e (G.n_e |e|) exp(-i G.m_e) sinc(G.d_e / 2),

    with edge vector d_e, midpoint m_e and outward normal n_e |e| = (d_y, -d_x).
    The sinc factor is regular at G.d_e = 0; F(0) is the polygon area.
    """
    G = np.asarray(G, dtype=float)
    flat = G.reshape(-1, 2)
    p = poly
    q = np.roll(poly, -1, axis=0)
    d = q - p
    mid = 0.5 * (p + q)
    normal = np.stack([d[:, 1], -d[:, 0]], axis=1)
    Gn = flat @ normal.T
    Gd = flat @ d.T
    Gm = flat @ mid.T
    # np.sinc(x) = sin(pi x)/(pi x)
    edge = Gn * np.exp(-1j * Gm) * np.sinc(Gd / (2 * np.pi))
    g2 = np.sum(flat**2, axis=1)
    out = np.empty(len(flat), dtype=complex)
    nz = g2 > 0
    out[nz] = 1j * edge[nz].sum(axis=1) / g2[nz]
    out[~nz] = 0.5 * np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1])
    return out.reshape(G.shape[:-1])


def eta_fourier_polygon(medium: PermittivityMap, cutoff: int) -> FourierTable:
    """Closed-form Fourier table of 1/n^2 for a polygonal partition."""
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    lat = medium.lattice
    rec = reciprocal_lattice(lat)
    S = 2 * cutoff
    m1, m2 = index_grid(S)
    G = np.stack([m1, m2], axis=-1) @ rec.matrix
    eta_bg = 1.0 / medium.partition.background_n2
    c = np.zeros(m1.shape, dtype=complex)
    c[S, S] = eta_bg
    area = lat.cell_area
    for r in medium.partition.regions:
        c += (1.0 / r.n2 - eta_bg) * polygon_fourier(r.polygon, G) / area
    return FourierTable(cutoff, c)


def cell_grid(lat: Lattice2D, M: int, offset: float = 0.5):
    """Cartesian coordinates of x_ij = ((i+offset)/M) a1 + ((j+offset)/M) a2."""
    s = (np.arange(M) + offset) / M
    f1, f2 = np.meshgrid(s, s, indexing="ij")
    x = f1 * lat.a1[0] + f2 * lat.a2[0]
    y = f1 * lat.a1[1] + f2 * lat.a2[1]
    return x, y


def eta_fourier_grid(medium: PermittivityMap, M: int, cutoff: int) -> FourierTable:
    """Fourier table from midpoint samples of 1/n^2 on an M x M cell grid.

    This is the independent sampling oracle for ``eta_fourier_polygon``; its
    error is first order in the grid spacing near interfaces.
    """
    need = 8 * (2 * cutoff + 1)
    if M < need:
        raise Undersampled(f"grid {M} < 8(2N+1) = {need}")
    x, y = cell_grid(medium.lattice, M)
    eta = medium.eta_at(x, y)
    F = np.fft.fft2(eta) / (M * M)
    S = 2 * cutoff
    m1, m2 = index_grid(S)
    # samples sit at (i + 1/2)/M, hence the half-cell phase
    phase = np.exp(-1j * np.pi * (m1 + m2) / M)
    c = F[m1 % M, m2 % M] * phase
    c = 0.5 * (c + np.conj(c[::-1, ::-1]))
    return FourierTable(cutoff, c)


def square_rod(
    lattice: Lattice2D | None = None,
    side: float = 0.4,
    n2_rod: float = 13.0,
    n2_background: float = 1.0,
    center=(0.0, 0.0),
) -> PermittivityMap:
    """Axis-aligned square rod, the workhorse test medium."""
    lattice = lattice or Lattice2D.square()
    h = 0.5 * side
    cx, cy = center
    poly = [(cx - h, cy - h), (cx + h, cy - h), (cx + h, cy + h), (cx - h, cy + h)]
    part = PolygonalPartition(lattice, (Region(poly, n2_rod),), n2_background)
    return PermittivityMap(part)


def homogeneous(n2: float, lattice: Lattice2D | None = None) -> PermittivityMap:
    return PermittivityMap(PolygonalPartition(lattice or Lattice2D.square(), (), n2))


def regular_polygon(n_sides: int, radius: float, center=(0.0, 0.0)) -> np.ndarray:
    t = 2 * np.pi * np.arange(n_sides) / n_sides
    return np.stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)], axis=1)
