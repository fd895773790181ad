"""Polygonal partitions of the periodicity cell and their interface corners."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import shapely
import shapely.affinity

from .errors import AmbiguousGeometry, InvalidPartition
from .lattice import Lattice2D

MERGE_TOL = 1e-9  # vertices closer than this are the same point
AMBIGUOUS_TOL = 1e-6  # distinct vertices closer than this are rejected
ANGLE_TOL = 1e-9


def _as_polygon(vertices) -> np.ndarray:
    poly = np.array(vertices, dtype=float)
    if poly.ndim != 2 or poly.shape[1] != 2 or len(poly) < 3:
        raise InvalidPartition("a polygon needs at least 3 two-dimensional vertices")
    if np.allclose(poly[0], poly[-1]):
        poly = poly[:-1]
    # drop repeated consecutive vertices
    keep = np.linalg.norm(poly - np.roll(poly, 1, axis=0), axis=1) > MERGE_TOL
    poly = poly[keep]
    if len(poly) < 3:
        raise InvalidPartition("polygon collapses to fewer than 3 vertices")
    if signed_area(poly) < 0:
        poly = poly[::-1].copy()
    poly.flags.writeable = False
    return poly


def signed_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


@dataclass(frozen=True)
class Region:
    """A polygonal inclusion; vertices are stored counterclockwise."""

    polygon: np.ndarray
    n2: float

    def __post_init__(self):
        object.__setattr__(self, "polygon", _as_polygon(self.polygon))
        if not np.isfinite(self.n2) or self.n2 <= 0:
            raise InvalidPartition(f"n2 must be positive and finite, got {self.n2}")

    @property
    def area(self) -> float:
        return signed_area(self.polygon)

    def edges(self):
        p = self.polygon
        return p, np.roll(p, -1, axis=0)


def points_in_polygon(poly: np.ndarray, x, y, tol: float = 1e-12) -> np.ndarray:
    """Closed point-in-polygon test (boundary counts as inside), vectorised."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    result = np.zeros(x.shape, dtype=bool)
    lo = poly.min(axis=0) - tol
    hi = poly.max(axis=0) + tol
    box = (x >= lo[0]) & (x <= hi[0]) & (y >= lo[1]) & (y <= hi[1])
    if not box.any():
        return result
    x, y = x[box], y[box]
    inside = np.zeros(x.shape, dtype=bool)
    on_edge = np.zeros_like(inside)
    px, py = poly[:, 0], poly[:, 1]
    qx, qy = np.roll(px, -1), np.roll(py, -1)
    for ax, ay, bx, by in zip(px, py, qx, qy):
        crosses = (ay > y) != (by > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = ax + (y - ay) * (bx - ax) / (by - ay)
        inside ^= crosses & (x < xint)
        dx, dy = bx - ax, by - ay
        L2 = dx * dx + dy * dy
        t = np.clip(((x - ax) * dx + (y - ay) * dy) / L2, 0.0, 1.0)
        d2 = (x - ax - t * dx) ** 2 + (y - ay - t * dy) ** 2
        on_edge |= d2 <= tol * tol
    result[box] = inside | on_edge
    return result


@dataclass(frozen=True)
class PolygonalPartition:
    """Piecewise-constant n^2 on the cell: regions over a background.

    Region order matters: on shared boundaries the first listed region wins.
    """

    lattice: Lattice2D
    regions: tuple = ()
    background_n2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        if not np.isfinite(self.background_n2) or self.background_n2 <= 0:
            raise InvalidPartition("background n2 must be positive and finite")
        self._validate()

    def _validate(self):
        shapes = []
        for i, r in enumerate(self.regions):
            sp = shapely.Polygon(r.polygon)
            if not sp.is_valid or not sp.exterior.is_simple:
                raise InvalidPartition(f"region {i}: polygon is not simple")
            shapes.append(sp)
        shifts = [self.lattice.to_cartesian(s) for s in itertools.product((-1, 0, 1), repeat=2)]
        for (i, si), (j, sj) in itertools.combinations_with_replacement(enumerate(shapes), 2):
            for t in shifts:
                if i == j and not np.any(t):
                    continue
                other = shapely.affinity.translate(sj, *t)
                if si.intersection(other).area > 1e-12:
                    raise InvalidPartition(
                        f"regions {i} and {j} overlap (translate {tuple(np.round(t, 12))})"
                    )

    @property
    def is_homogeneous(self) -> bool:
        return all(r.n2 == self.background_n2 for r in self.regions)

    def n2_values(self) -> list[float]:
        return [self.background_n2] + [r.n2 for r in self.regions]

    def _shifts_for(self, region: Region):
        """Lattice translates of a region that can meet the fractional cell [0,1)^2."""
        f = self.lattice.to_fractional(region.polygon)
        lo = np.floor(f.min(axis=0) - 1e-9).astype(int)
        hi = np.floor(f.max(axis=0) + 1e-9).astype(int)
        out = []
        for s1 in range(-hi[0], -lo[0] + 1):
            for s2 in range(-hi[1], -lo[1] + 1):
                out.append(self.lattice.to_cartesian((s1, s2)))
        return out

    def n2_at(self, x, y) -> np.ndarray:
        """Vectorised region lookup with periodic folding."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast(x, y).shape
        pts = np.stack(np.broadcast_arrays(x, y), axis=-1).reshape(-1, 2)
        pts = self.lattice.fold_point(pts)
        out = np.full(len(pts), float(self.background_n2))
        todo = np.ones(len(pts), dtype=bool)
        for r in self.regions:
            hit = np.zeros(len(pts), dtype=bool)
            for t in self._shifts_for(r):
                hit |= points_in_polygon(r.polygon + t, pts[:, 0], pts[:, 1])
            hit &= todo
            out[hit] = r.n2
            todo &= ~hit
        return out.reshape(shape)


def region_at(part: PolygonalPartition, point) -> float:
    """n^2 at a single point; boundary points go to the first listed region."""
    p = np.asarray(point, dtype=float)
    return float(part.n2_at(p[0], p[1]))


@dataclass(frozen=True)
class CornerSpec:
    """Interface corner: sectors counterclockwise from ``start_angle``.

    ``sectors`` holds (opening angle, n2) pairs whose angles sum to 2 pi.
    """

    location: tuple
    sectors: tuple
    start_angle: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "location", tuple(float(c) for c in self.location))
        object.__setattr__(self, "sectors", tuple((float(a), float(e)) for a, e in self.sectors))
        total = sum(a for a, _ in self.sectors)
        if abs(total - 2 * np.pi) > 1e-10:
            raise ValueError(f"sector angles sum to {total}, not 2 pi")
        if any(a <= 0 for a, _ in self.sectors):
            raise ValueError("sector opening angles must be positive")
        if len({e for _, e in self.sectors}) < 2:
            raise ValueError("a corner needs at least two distinct materials")

    @classmethod
    def two_material(cls, omega_c: float, eps1: float, eps2: float, location=(0.0, 0.0)):
        return cls(location, ((omega_c, eps1), (2 * np.pi - omega_c, eps2)))

    @property
    def boundaries(self) -> np.ndarray:
        """omega_0 = 0 < omega_1 < ... < omega_L = 2 pi, relative to start_angle."""
        return np.concatenate([[0.0], np.cumsum([a for a, _ in self.sectors])])

    @property
    def is_two_material(self) -> bool:
        return len(self.sectors) == 2


def _incident_directions(point, polys, tol):
    dirs = []
    for poly in polys:
        p, q = poly, np.roll(poly, -1, axis=0)
        for a, b in zip(p, q):
            da, db = np.linalg.norm(a - point), np.linalg.norm(b - point)
            if da < tol:
                dirs.append(b - a)
            elif db < tol:
                dirs.append(a - b)
            else:
                d = b - a
                t = np.dot(point - a, d) / np.dot(d, d)
                if 0 < t < 1 and np.linalg.norm(a + t * d - point) < tol:
                    dirs.extend([d, -d])
    return dirs


def _merge_vertices(points, lattice):
    """Deduplicate folded points; raise on near-but-not-equal pairs."""
    merged = []
    shifts = [lattice.to_cartesian(s) for s in itertools.product((-1, 0, 1), repeat=2)]
    for p in points:
        dup = False
        for q in merged:
            d = min(np.linalg.norm(p - q + t) for t in shifts)
            if d < MERGE_TOL:
                dup = True
                break
            if d < AMBIGUOUS_TOL:
                raise AmbiguousGeometry(
                    f"vertices {tuple(p)} and {tuple(q)} are {d:.2e} apart: "
                    f"neither equal (<{MERGE_TOL}) nor clearly distinct"
                )
        if not dup:
            merged.append(p)
    return merged


def extract_corners(part: PolygonalPartition) -> list[CornerSpec]:
    """All polygon vertices that are genuine kinks of a material interface.

    Vertices where n2 is locally constant, or where the interface is straight
    (two half-planes), are dropped. Corner locations are folded into the
    fractional cell [0, 1)^2.
    """
    lat = part.lattice
    if not part.regions:
        return []
    candidates = [lat.fold_point(v) for r in part.regions for v in r.polygon]
    points = _merge_vertices(candidates, lat)

    copies = []
    for r in part.regions:
        for s in itertools.product((-2, -1, 0, 1, 2), repeat=2):
            copies.append(r.polygon + lat.to_cartesian(s))
    min_edge = min(
        float(np.min(np.linalg.norm(r.polygon - np.roll(r.polygon, -1, axis=0), axis=1)))
        for r in part.regions
    )
    probe = 1e-4 * min(1.0, min_edge)

    corners = []
    for c in points:
        dirs = _incident_directions(c, copies, MERGE_TOL)
        if len(dirs) < 2:
            continue
        ang = np.sort(np.mod([np.arctan2(d[1], d[0]) for d in dirs], 2 * np.pi))
        uniq = [ang[0]]
        for a in ang[1:]:
            if a - uniq[-1] > ANGLE_TOL:
                uniq.append(a)
        if len(uniq) > 1 and uniq[0] + 2 * np.pi - uniq[-1] <= ANGLE_TOL:
            uniq.pop()
        uniq = np.array(uniq)
        if len(uniq) < 2:
            continue
        openings = np.diff(np.append(uniq, uniq[0] + 2 * np.pi))
        mids = uniq + 0.5 * openings
        probes_x = c[0] + probe * np.cos(mids)
        probes_y = c[1] + probe * np.sin(mids)
        mats = part.n2_at(probes_x, probes_y)

        # merge neighbouring sectors of equal material, keeping interface rays only
        ray_idx = [i for i in range(len(uniq)) if mats[i - 1] != mats[i]]
        if len(ray_idx) < 2:
            continue
        rays = uniq[ray_idx]
        sect_open = np.diff(np.append(rays, rays[0] + 2 * np.pi))
        sect_mat = [float(mats[i]) for i in ray_idx]
        # canonical order: start with the first sector of largest n2
        s0 = int(np.argmax(sect_mat))
        rays = np.roll(rays, -s0)
        sect_open = np.roll(sect_open, -s0)
        sect_mat = sect_mat[s0:] + sect_mat[:s0]
        if len(rays) == 2 and np.all(np.abs(sect_open - np.pi) < ANGLE_TOL):
            continue  # straight interface, not a corner
        # renormalise rounding so angles sum to 2 pi exactly
        sect_open = sect_open * (2 * np.pi / sect_open.sum())
        corners.append(
            CornerSpec(tuple(c), tuple(zip(sect_open, sect_mat)), start_angle=float(np.mod(rays[0], 2 * np.pi)))
        )
    return corners
