"""Singular exponents at interface corners of a piecewise-constant medium.

Two independent routes compute the exponents lambda in (0, 1) for which the
transmission problem div(eps grad u) = 0 admits r^lambda phi(theta):

* ``solve_lamc``: the closed-form two-material relation
  sin((pi - w) lambda) / sin(pi lambda) = +-(eps1 + eps2) / (eps1 - eps2);
* ``angular_determinant``: a transfer matrix that carries the state
  (phi, eps phi' / lambda) once around the corner, for any number of sectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DegenerateExponent, FlatInterface, NoInterface
from .geometry import CornerSpec

SCAN_STEP = 1e-3
LAMBDA_MIN = 1e-6
LAMBDA_MAX = 1.0 - 1e-6
XTOL = 1e-14
SMOOTH = math.inf  # sigma_epsilon for media without corners


@dataclass(frozen=True)
class SingularExponent:
    lam: float
    family: str
    residual: float
    corner: CornerSpec | None = None


def _refine(f, a, b):
    return brentq(f, a, b, xtol=XTOL, rtol=4 * np.finfo(float).eps, maxiter=200)


def _scan_roots(f, lo=LAMBDA_MIN, hi=LAMBDA_MAX, step=SCAN_STEP, touch_tol=None):
    """Sign-change scan with bisection refinement.

    Samples where |f| has a local minimum without a sign change are
    subdivided, so two roots closer than the scan step are still resolved;
    with ``touch_tol`` a remaining minimum below that value is accepted as a
    double (touching) root.
    """
    n = max(int(math.ceil((hi - lo) / step)), 2)
    xs = np.linspace(lo, hi, n + 1)
    fs = np.asarray(f(xs), dtype=float)
    roots = []
    for i in range(n):
        a, b, fa, fb = xs[i], xs[i + 1], fs[i], fs[i + 1]
        if fa == 0.0:
            roots.append((a, "sign"))
        elif fa * fb < 0:
            roots.append((_refine(f, a, b), "sign"))
    for i in range(1, n):
        fm, f0, fp = abs(fs[i - 1]), abs(fs[i]), abs(fs[i + 1])
        if not (f0 < fm and f0 < fp):
            continue
        if fs[i - 1] * fs[i] < 0 or fs[i] * fs[i + 1] < 0:
            continue
        a, b = xs[i - 1], xs[i + 1]
        sub = np.linspace(a, b, 201)
        fsub = np.asarray(f(sub), dtype=float)
        found = False
        for j in range(200):
            if fsub[j] * fsub[j + 1] < 0:
                roots.append((_refine(f, sub[j], sub[j + 1]), "sign"))
                found = True
        if not found and touch_tol is not None:
            res = minimize_scalar(lambda x: abs(float(f(x))), bounds=(a, b), method="bounded",
                                  options={"xatol": 1e-13})
            if abs(float(f(res.x))) < touch_tol:
                roots.append((float(res.x), "touch"))
    roots.sort()
    out = []
    for r in roots:
        if not out or r[0] - out[-1][0] > 1e-10:
            out.append(r)
    return out


def lamc_rhs(eps1: float, eps2: float) -> float:
    return (eps1 + eps2) / (eps1 - eps2)


def solve_lamc(omega_c: float, eps1: float, eps2: float) -> list[SingularExponent]:
    """Real roots in (0, 1) of both sign branches of the two-material relation.

    Each branch is scanned in the pole-free form
    sin((pi - w) lambda) -/+ rhs * sin(pi lambda) = 0, which is equivalent on
    (0, 1) because sin(pi lambda) > 0 there. The residual reported is that of
    the quotient form, relative to |rhs|.
    """
    if not 0 < omega_c < 2 * np.pi:
        raise ValueError("corner angle must lie in (0, 2 pi)")
    if abs(omega_c - np.pi) < 1e-12:
        raise FlatInterface("omega_c = pi is a straight interface, not a corner")
    if eps1 <= 0 or eps2 <= 0:
        raise ValueError("permittivities must be positive")
    if eps1 == eps2:
        raise NoInterface("equal permittivities: no interface")
    rhs = lamc_rhs(eps1, eps2)
    out = []
    for sign, tag in ((1.0, "+"), (-1.0, "-")):
        target = sign * rhs

        def g(lam, target=target):
            return np.sin((np.pi - omega_c) * lam) - target * np.sin(np.pi * lam)

        for lam, _ in _scan_roots(g):
            q = math.sin((math.pi - omega_c) * lam) / math.sin(math.pi * lam)
            out.append(SingularExponent(lam, tag, abs(q - target) / abs(target)))
    out.sort(key=lambda s: s.lam)
    return out


def _rotation(t: float) -> np.ndarray:
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, s], [-s, c]])


def _transfer_entries(sectors, lam):
    """Entries of the monodromy matrix; ``lam`` may be a scalar or an array."""
    t11, t12, t21, t22 = 1.0, 0.0, 0.0, 1.0
    for opening, eps in sectors:
        c = np.cos(lam * opening)
        s = np.sin(lam * opening)
        # diag(1, eps) R diag(1, 1/eps) = [[c, s/eps], [-eps s, c]]
        m12 = s / eps
        m21 = -eps * s
        t11, t12, t21, t22 = (
            c * t11 + m12 * t21,
            c * t12 + m12 * t22,
            m21 * t11 + c * t21,
            m21 * t12 + c * t22,
        )
    return t11, t12, t21, t22


def transfer_matrix(corner: CornerSpec, lam: float) -> np.ndarray:
    """Monodromy of (phi, eps phi'/lambda) once around the corner.

    Inside a sector of constant eps the pair (phi, phi'/lambda) rotates by
    lambda times the opening angle; the state (phi, eps phi'/lambda) is
    continuous across interfaces, which is exactly the transmission
    condition.
    """
    t11, t12, t21, t22 = _transfer_entries(corner.sectors, float(lam))
    return np.array([[t11, t12], [t21, t22]])


def angular_determinant(corner: CornerSpec, lam):
    """det(T(lambda) - I) = 2 - tr T (det T = 1); vectorised over ``lam``."""
    t11, t12, t21, t22 = _transfer_entries(corner.sectors, np.asarray(lam, dtype=float))
    d = (t11 - 1.0) * (t22 - 1.0) - t12 * t21
    return float(d) if np.ndim(d) == 0 else d


def _det_scale(corner: CornerSpec) -> float:
    e = [eps for _, eps in corner.sectors]
    # crude bound on |entries of T|^2, keeps residuals comparable across contrasts
    return 2.0 + float(np.prod([max(a / b, b / a) for a, b in zip(e, e[1:] + e[:1])]))


def find_exponents(corner: CornerSpec) -> list[SingularExponent]:
    """Real roots of the angular determinant on (0, 1), ascending.

    Complex exponents are not searched for; with three or more sectors they
    may exist and this list is then not exhaustive.
    """
    scale = _det_scale(corner)

    def D(lam):
        return angular_determinant(corner, lam) / scale

    return [
        SingularExponent(lam, f"det-{kind}", abs(D(lam)), corner)
        for lam, kind in _scan_roots(D, touch_tol=1e-12)
    ]


def sigma_epsilon(corners) -> float:
    """Smallest exponent over all corners; ``SMOOTH`` (inf) if there are none."""
    best = SMOOTH
    for c in corners:
        ex = find_exponents(c)
        if ex:
            best = min(best, ex[0].lam)
    return best


@dataclass(frozen=True)
class AngularFunction:
    """phi(theta) = A_l cos(lam (theta - w_{l-1})) + B_l sin(lam (theta - w_{l-1})) on sector l.

    Angles are relative to the corner's start ray.
    """

    lam: float
    boundaries: np.ndarray
    A: np.ndarray
    B: np.ndarray
    eps: np.ndarray

    def _sector(self, theta, sector=None):
        """Sector index per angle; an explicit ``sector`` evaluates that branch unwrapped."""
        theta = np.asarray(theta, dtype=float)
        if sector is not None:
            return theta, np.full(theta.shape, sector, dtype=int)
        theta = np.mod(theta, 2 * np.pi)
        idx = np.searchsorted(self.boundaries, theta, side="right") - 1
        return theta, np.clip(idx, 0, len(self.A) - 1)

    def __call__(self, theta, sector=None):
        theta, idx = self._sector(theta, sector)
        t = self.lam * (theta - self.boundaries[idx])
        return self.A[idx] * np.cos(t) + self.B[idx] * np.sin(t)

    def derivative(self, theta, sector=None, order=1):
        theta, idx = self._sector(theta, sector)
        t = self.lam * (theta - self.boundaries[idx])
        A, B, lam = self.A[idx], self.B[idx], self.lam
        if order == 1:
            return lam * (-A * np.sin(t) + B * np.cos(t))
        if order == 2:
            return -lam * lam * (A * np.cos(t) + B * np.sin(t))
        raise ValueError("order must be 1 or 2")

    def max_abs(self) -> float:
        """Exact max of |phi| over the circle."""
        best = 0.0
        for l in range(len(self.A)):
            R = math.hypot(self.A[l], self.B[l])
            delta = math.atan2(self.B[l], self.A[l])
            span = self.lam * (self.boundaries[l + 1] - self.boundaries[l])
            # |phi| = R |cos(t - delta)| peaks where t = delta mod pi
            j = math.ceil((0.0 - delta) / math.pi)
            if delta + j * math.pi <= span:
                best = max(best, R)
            else:
                end = self.A[l] * math.cos(span) + self.B[l] * math.sin(span)
                best = max(best, abs(self.A[l]), abs(end))
        return best


def angular_function(corner: CornerSpec, lam: float, tol: float = 1e-8) -> AngularFunction:
    """Angular profile from the null vector of T(lambda) - I, max |phi| = 1."""
    M = transfer_matrix(corner, lam) - np.eye(2)
    _, s, vt = np.linalg.svd(M)
    scale = max(1.0, float(np.max(np.abs(M))))
    null_dim = int(np.sum(s <= tol * scale))
    if null_dim != 1:
        raise DegenerateExponent(
            f"null space of T(lambda) - I has dimension {null_dim} at lambda = {lam!r} "
            f"(singular values {s})"
        )
    state = vt[-1].copy()
    A, B = [], []
    eps = np.array([e for _, e in corner.sectors])
    for opening, e in corner.sectors:
        A.append(state[0])
        B.append(state[1] / e)
        D = np.diag([1.0, e])
        state = D @ _rotation(lam * opening) @ np.diag([1.0, 1.0 / e]) @ state
    f = AngularFunction(lam, corner.boundaries, np.array(A), np.array(B), eps)
    norm = f.max_abs()
    return AngularFunction(lam, corner.boundaries, f.A / norm, f.B / norm, eps)


def eval_singular_function(corner: CornerSpec, exponent: SingularExponent | float, r, theta):
    """r^lambda phi(theta) on polar samples; theta is absolute (x-axis based)."""
    lam = exponent.lam if isinstance(exponent, SingularExponent) else float(exponent)
    phi = angular_function(corner, lam)
    r = np.asarray(r, dtype=float)
    return r**lam * phi(np.asarray(theta, dtype=float) - corner.start_angle)
