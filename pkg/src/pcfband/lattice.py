"""Bravais lattices in the transverse plane, reciprocal lattices and k-paths.

Lengths are in units of the lattice pitch, wavevectors in inverse pitch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateLattice, EmptyPath

DET_TOL = 1e-14


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Lattice2D:
    a1: np.ndarray
    a2: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, Lattice2D):
            return NotImplemented
        return bool(np.array_equal(self.a1, other.a1) and np.array_equal(self.a2, other.a2))

    def __hash__(self):
        return hash((tuple(self.a1), tuple(self.a2)))

    def __post_init__(self):
        object.__setattr__(self, "a1", _frozen(self.a1))
        object.__setattr__(self, "a2", _frozen(self.a2))
        if self.a1.shape != (2,) or self.a2.shape != (2,):
            raise ValueError("lattice vectors must be 2D")
        if abs(self.det) < DET_TOL:
            raise DegenerateLattice(f"|det[a1 a2]| = {abs(self.det):.3e} < {DET_TOL}")

    @classmethod
    def square(cls, pitch: float = 1.0) -> "Lattice2D":
        return cls((pitch, 0.0), (0.0, pitch))

    @classmethod
    def hexagonal(cls, pitch: float = 1.0) -> "Lattice2D":
        return cls((pitch, 0.0), (0.5 * pitch, 0.5 * np.sqrt(3.0) * pitch))

    @property
    def matrix(self) -> np.ndarray:
        """Rows are a1, a2."""
        return np.vstack([self.a1, self.a2])

    @property
    def det(self) -> float:
        return float(self.a1[0] * self.a2[1] - self.a1[1] * self.a2[0])

    @property
    def cell_area(self) -> float:
        return abs(self.det)

    def to_cartesian(self, frac) -> np.ndarray:
        return np.asarray(frac, dtype=float) @ self.matrix

    def to_fractional(self, x) -> np.ndarray:
        return np.linalg.solve(self.matrix.T, np.asarray(x, dtype=float).T).T

    def fold_point(self, x) -> np.ndarray:
        """Map a point (or array of points) into the cell with fractional coords in [0, 1)."""
        f = self.to_fractional(x)
        f = f - np.floor(f)
        # snap rounding noise at the upper face back to 0
        f = np.where(f > 1.0 - 1e-13, 0.0, f)
        return self.to_cartesian(f)


@dataclass(frozen=True)
class ReciprocalLattice2D:
    b1: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "b1", _frozen(self.b1))
        object.__setattr__(self, "b2", _frozen(self.b2))

    @property
    def matrix(self) -> np.ndarray:
        return np.vstack([self.b1, self.b2])

    def vectors(self, m) -> np.ndarray:
        """G = m1 b1 + m2 b2 for integer index rows m."""
        return np.asarray(m, dtype=float) @ self.matrix


def reciprocal_lattice(lat: Lattice2D) -> ReciprocalLattice2D:
    """Reciprocal basis with a_i . b_j = 2 pi delta_ij."""
    if abs(lat.det) < DET_TOL:
        raise DegenerateLattice("degenerate lattice")
    B = 2.0 * np.pi * np.linalg.inv(lat.matrix).T
    return ReciprocalLattice2D(B[0], B[1])


def zone_fractional(xi, lat: Lattice2D) -> np.ndarray:
    """Fractional reciprocal coordinates f with xi = f1 b1 + f2 b2."""
    return np.asarray(xi, dtype=float) @ lat.matrix.T / (2.0 * np.pi)


def fold_to_zone(xi, lat: Lattice2D) -> np.ndarray:
    """Fold a quasi-momentum into the parallelogram zone f_i in (-1/2, 1/2].

    Points already inside the closed zone are returned unchanged, so folding
    is idempotent.
    """
    xi = np.asarray(xi, dtype=float)
    f = zone_fractional(xi, lat)
    shift = np.where(np.abs(f) <= 0.5 + 1e-12, 0.0, np.ceil(f - 0.5))
    if not np.any(shift):
        return xi.copy()
    return xi - shift @ reciprocal_lattice(lat).matrix


def in_zone(xi, lat: Lattice2D, tol: float = 1e-12) -> bool:
    return bool(np.all(np.abs(zone_fractional(xi, lat)) <= 0.5 + tol))


@dataclass(frozen=True)
class KPath:
    """Ordered labelled vertices of a band-diagram sweep.

    ``samples`` is the number of intervals each segment is split into.
    """

    vertices: tuple
    labels: tuple = ()
    samples: int = 8

    def __post_init__(self):
        verts = tuple(tuple(float(c) for c in v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        labels = tuple(self.labels) or tuple(f"P{i}" for i in range(len(verts)))
        if len(labels) != len(verts):
            raise ValueError("one label per vertex required")
        object.__setattr__(self, "labels", labels)
        if self.samples < 1:
            raise ValueError("samples per segment must be positive")


@dataclass(frozen=True)
class KSample:
    xi: np.ndarray
    arclength: float
    label: str = ""


def sample_kpath(path: KPath, lat: Lattice2D | None = None) -> list[KSample]:
    """Piecewise-linear samples along the path, endpoints included.

    Vertex labels are attached to the samples that coincide with vertices.
    ``lat`` is accepted for symmetry with the rest of the API; the path is
    given in Cartesian wavevector coordinates and is not folded here.
    """
    if not path.vertices:
        raise EmptyPath("k-path has no vertices")
    verts = np.array(path.vertices, dtype=float)
    out = [KSample(verts[0].copy(), 0.0, path.labels[0])]
    s = 0.0
    for i in range(len(verts) - 1):
        p, q = verts[i], verts[i + 1]
        seg = float(np.linalg.norm(q - p))
        for j in range(1, path.samples + 1):
            t = j / path.samples
            label = path.labels[i + 1] if j == path.samples else ""
            out.append(KSample(p + t * (q - p), s + t * seg, label))
        s += seg
    return out
