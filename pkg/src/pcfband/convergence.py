"""Resolution sweeps, empirical convergence orders and band diagrams."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import PcfBandError
from .lattice import KPath, Lattice2D, fold_to_zone, sample_kpath
from .medium import FourierTable
from .planewave import BlochParams, solve_bloch

ERROR_FLOOR = 1e-13
TRACK_GAP = 1e-9  # relative gap below which tracked eigenvalues form one cluster


def dof(cutoff: int) -> int:
    """Matrix dimension 2(2N+1)^2."""
    return 2 * (2 * cutoff + 1) ** 2


def _map(fn, items, threads: int):
    if threads == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads or None) as pool:
        return list(pool.map(fn, items))


# -- order estimation -------------------------------------------------------


@dataclass(frozen=True)
class OrderFit:
    p_hat: float
    residual: float
    used: tuple
    excluded: tuple


def estimate_order(errors, dofs, floor: float = ERROR_FLOOR) -> OrderFit:
    """Least-squares slope of log(error) against log(dof), sign-flipped.

    Points with error <= ``floor`` are dropped and reported in ``excluded``;
    fewer than two usable points give p_hat = nan.
    """
    errors = np.asarray(errors, dtype=float)
    dofs = np.asarray(dofs, dtype=float)
    if len(errors) != len(dofs):
        raise ValueError("errors and dofs differ in length")
    if len(errors) < 3:
        raise ValueError("need at least 3 points for an order fit")
    ok = errors > floor
    used = tuple(int(i) for i in np.flatnonzero(ok))
    excluded = tuple(int(i) for i in np.flatnonzero(~ok))
    if len(used) < 2:
        return OrderFit(float("nan"), float("nan"), used, excluded)
    x = np.log(dofs[ok])
    y = np.log(errors[ok])
    slope, icpt = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
    return OrderFit(float(-slope), resid, used, excluded)


def windowed_orders(errors, dofs, window: int = 3, floor: float = ERROR_FLOOR) -> np.ndarray:
    """Order fits over sliding windows of consecutive rungs."""
    errors = np.asarray(errors, dtype=float)
    dofs = np.asarray(dofs, dtype=float)
    return np.array(
        [
            estimate_order(errors[i : i + window], dofs[i : i + window], floor).p_hat
            for i in range(len(errors) - window + 1)
        ]
    )


def _rate_from_three(v, x):
    """Algebraic rate p with v_i ~ v_inf + C x_i^-p through three samples, or None."""
    d1, d2 = v[0] - v[1], v[1] - v[2]
    if d2 == 0 or d1 / d2 <= 0:
        return None
    rho = d1 / d2

    def f(p):
        return (x[0] ** -p - x[1] ** -p) / (x[1] ** -p - x[2] ** -p) - rho

    lo, hi = 1e-6, 60.0
    try:
        if f(lo) * f(hi) > 0:
            return None
        return brentq(f, lo, hi, xtol=1e-12)
    except (ValueError, ZeroDivisionError, OverflowError):
        return None


def richardson_reference(values, dofs, fallback_rate: float = 1.0) -> tuple[float, float]:
    """Extrapolated limit from the two finest rungs.

    The rate used in the extrapolation is fitted through the three finest
    rungs (falling back to ``fallback_rate`` when the three values do not
    define one). Returns (limit, rate).
    """
    v = np.asarray(values, dtype=float)
    x = np.asarray(dofs, dtype=float)
    if len(v) < 2:
        raise ValueError("need at least two rungs")
    if v[-2] == v[-1]:
        return float(v[-1]), float("nan")
    p = _rate_from_three(v[-3:], x[-3:]) if len(v) >= 3 else None
    if p is None:
        p = fallback_rate
    w1, w2 = x[-2] ** -p, x[-1] ** -p
    limit = v[-1] - (v[-2] - v[-1]) * w2 / (w1 - w2)
    return float(limit), float(p)


# -- resolution sweeps ------------------------------------------------------


@dataclass(frozen=True)
class SweepPlan:
    table: FourierTable
    lattice: Lattice2D
    kpoints: tuple  # BlochParams
    ladder: tuple
    bands: int
    tol: float = 1e-10
    extra: int = 4  # eigenvalues beyond ``bands`` used to complete clusters

    def __post_init__(self):
        object.__setattr__(self, "kpoints", tuple(self.kpoints))
        object.__setattr__(self, "ladder", tuple(int(n) for n in self.ladder))
        if any(b <= a for a, b in zip(self.ladder, self.ladder[1:])):
            raise ValueError("cutoff ladder must be strictly increasing")
        if len(self.ladder) < 3:
            raise ValueError("need at least 3 rungs")
        if self.bands < 1:
            raise ValueError("track at least one band")
        if self.table.cutoff < self.ladder[-1]:
            raise ValueError("table cutoff below the finest rung")


@dataclass(frozen=True)
class ConvergenceRecord:
    ladder: tuple
    dofs: np.ndarray
    kappa2: np.ndarray  # (n_k, n_rungs, bands), cluster-averaged
    raw: np.ndarray  # (n_k, n_rungs, bands + extra), sorted eigenvalues
    reference: np.ndarray  # (n_k, bands)
    rate_used: np.ndarray  # (n_k, bands), rate inside the extrapolation
    errors: np.ndarray  # (n_k, n_rungs, bands)
    p_hat: np.ndarray  # (n_k, bands)
    fit_residual: np.ndarray  # (n_k, bands)
    windows: np.ndarray  # (n_k, bands, n_rungs - 2)
    clusters: tuple = field(default=())  # per k-point: tuple of index tuples


def _track(raw_k: np.ndarray, bands: int):
    """Cluster-average the sorted eigenvalues using clusters of the finest rung."""
    fine = raw_k[-1]
    groups = []
    start = 0
    for i in range(1, len(fine) + 1):
        if i == len(fine) or fine[i] - fine[i - 1] >= TRACK_GAP * max(1.0, abs(fine[i])):
            groups.append(tuple(range(start, i)))
            start = i
    out = np.empty((raw_k.shape[0], bands))
    for g in groups:
        for j in g:
            if j < bands:
                out[:, j] = raw_k[:, list(g)].mean(axis=1)
    used = tuple(g for g in groups if g[0] < bands)
    return out, used


def resolution_sweep(plan: SweepPlan, threads: int = 1) -> ConvergenceRecord:
    nev = plan.bands + plan.extra
    jobs = [(ik, iN) for ik in range(len(plan.kpoints)) for iN in range(len(plan.ladder))]

    def run(job):
        ik, iN = job
        N = plan.ladder[iN]
        try:
            sol = solve_bloch(plan.table, plan.lattice, plan.kpoints[ik], N, nev, plan.tol)
        except PcfBandError as exc:
            raise type(exc)(f"k-point {ik}, N={N}: {exc}") from exc
        return job, sol.eigenvalues

    results = dict(_map(run, jobs, threads))
    nk, nr = len(plan.kpoints), len(plan.ladder)
    raw = np.empty((nk, nr, nev))
    for (ik, iN), vals in results.items():
        raw[ik, iN] = vals[:nev]
    dofs = np.array([dof(n) for n in plan.ladder], dtype=float)

    kappa2 = np.empty((nk, nr, plan.bands))
    ref = np.empty((nk, plan.bands))
    rate = np.empty((nk, plan.bands))
    errs = np.empty_like(kappa2)
    p_hat = np.empty((nk, plan.bands))
    fres = np.empty((nk, plan.bands))
    win = np.empty((nk, plan.bands, max(nr - 2, 0)))
    clusters = []
    for ik in range(nk):
        kappa2[ik], groups = _track(raw[ik], plan.bands)
        clusters.append(groups)
        for b in range(plan.bands):
            ref[ik, b], rate[ik, b] = richardson_reference(kappa2[ik, :, b], dofs)
            e = kappa2[ik, :, b] - ref[ik, b]
            errs[ik, :, b] = e
            fit = estimate_order(e, dofs)
            p_hat[ik, b], fres[ik, b] = fit.p_hat, fit.residual
            win[ik, b] = windowed_orders(e, dofs)
    return ConvergenceRecord(
        plan.ladder, dofs, kappa2, raw, ref, rate, errs, p_hat, fres, win, tuple(clusters)
    )


# -- band diagrams ----------------------------------------------------------


@dataclass(frozen=True)
class BandTable:
    xi: np.ndarray  # (n_k, 2), as sampled on the path
    arclength: np.ndarray  # (n_k,)
    labels: tuple
    kappa2: np.ndarray  # (n_k, nbands)
    beta: float
    cutoff: int


def band_sweep(
    table: FourierTable,
    lattice: Lattice2D,
    kpath: KPath,
    beta: float,
    cutoff: int,
    nbands: int,
    tol: float = 1e-10,
    threads: int = 1,
) -> BandTable:
    """kappa^2 of the lowest ``nbands`` non-null bands along a k-path.

    Path points outside the first zone are folded before solving; the
    spectrum is invariant under reciprocal-lattice shifts.
    """
    if nbands < 1:
        raise ValueError("nbands must be positive")
    samples = sample_kpath(kpath, lattice)

    def run(s):
        xi = fold_to_zone(s.xi, lattice)
        return solve_bloch(table, lattice, BlochParams(xi, beta), cutoff, nbands, tol).eigenvalues

    vals = _map(run, samples, threads)
    return BandTable(
        np.array([s.xi for s in samples]),
        np.array([s.arclength for s in samples]),
        tuple(s.label for s in samples),
        np.array(vals),
        float(beta),
        int(cutoff),
    )


def detect_gaps(kappa2) -> list[tuple[float, float]]:
    """Intervals (max of band j, min of band j+1) that are open.

    ``kappa2`` has one row per k-point and one column per band.
    """
    k2 = np.atleast_2d(np.asarray(kappa2, dtype=float))
    tops = k2.max(axis=0)
    bottoms = k2.min(axis=0)
    return [
        (float(tops[j]), float(bottoms[j + 1]))
        for j in range(k2.shape[1] - 1)
        if bottoms[j + 1] > tops[j]
    ]
