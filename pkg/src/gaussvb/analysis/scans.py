"""Exploratory scans: how large may the radius be for bodies of measure p?"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from ..gauss import phi, phi_inv, psi, psi_inv, radius_derived
from .halfplane import VIOLATION_TOL, halfplane_delta


def sufficient_condition(r: float):
    """Compare ``Phi(r - w_r)`` with ``r (w_r - r)``.

    Returns ``(lhs, rhs, holds)``; at ``r = 0`` both sides vanish.
    """
    if r == 0:
        return 0.0, 0.0, True
    w = radius_derived(r).w
    lhs = phi(r - w)
    rhs = r * (w - r)
    return lhs, rhs, lhs <= rhs


def s_inequality_bound(p: float, t: float) -> float:
    """``Psi(t Psi^{-1}(p))``, the lower bound on ``gamma(tK)`` for a
    symmetric convex ``K`` of measure ``p`` and ``t >= 1``."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if not t >= 1.0:
        raise ValueError("t must be at least 1")
    return psi(t * psi_inv(p))


def slab_delta(a: float, r: float) -> float:
    """Increment for the slab ``|y| <= a`` shifted along its normal."""
    after = psi(a + r) if a >= r else 0.0
    return after - psi(a)


def ball_delta(n: int, R: float, r: float) -> float:
    """Increment for the Euclidean ball of radius ``R`` in ``R^n``.

    Fibers through a point at squared distance ``q`` from the axis have
    half-length ``sqrt(R^2 - q)`` and ``q`` is chi-square with ``n - 1``
    degrees of freedom.
    """
    before = stats.chi2.cdf(R * R, n)
    if r == 0:
        return 0.0
    top = R * R - r * r
    if top <= 0:
        return -before
    k = n - 1

    def f(q):
        return psi(math.sqrt(max(R * R - q, 0.0)) + r) * stats.chi2.pdf(q, k)

    pts = [x for x in (max(k - 2, 0.0), float(k)) if 0 < x < top]
    val, _ = integrate.quad(f, 0.0, top, points=pts or None, epsabs=1e-13, epsrel=1e-11,
                            limit=400)
    return val - before


def _prefix_threshold(r_grid, bad) -> float:
    # largest grid r with no violation at it or at any smaller grid radius
    best = None
    for r, b in zip(r_grid, bad):
        if b:
            break
        best = r
    return math.nan if best is None else float(best)


def default_alphas():
    base = list(np.arange(1, 20) * math.pi / 40)
    near = [math.pi / 2 * (1 - 10.0 ** -j) for j in range(2, 5)]
    return np.array(base + near + [math.pi / 2])


@dataclass(frozen=True)
class AppendixRow:
    """Thresholds per family; ``shape_exponent`` is ``q = Phi^{-1}(p)^2 e^{Phi^{-1}(p)^2}``,
    the shape bound being ``exp(-c q)`` for an unspecified constant ``c``."""

    p: float
    r_halfplane: float
    r_slab: float
    r_ball: float
    threshold: float
    psi_inv_p: float
    shape_exponent: float


def appendix_scan_rp(p_grid, r_grid, alpha_grid=None, d_offsets=None, ball_dims=(2, 10, 100, 1000),
                     tol: float = VIOLATION_TOL) -> list[AppendixRow]:
    """For each ``p`` the largest grid radius with no monotonicity violation.

    Families scanned, all of measure at least ``p``: halfplanes at angles
    ``alpha_grid`` with offsets ``Phi^{-1}(p) + d_offsets``; the symmetric
    slab of measure exactly ``p``; Euclidean balls of measure exactly ``p``
    in each of ``ball_dims``.  ``threshold`` is the minimum over families.
    A family with no violation on the grid reports the largest grid radius.
    """
    r_grid = np.sort(np.asarray(r_grid, dtype=float))
    alphas = default_alphas() if alpha_grid is None else np.asarray(alpha_grid, dtype=float)
    offs = np.arange(17) * 0.25 if d_offsets is None else np.asarray(d_offsets, dtype=float)
    rows = []
    for p in np.asarray(p_grid, dtype=float):
        if not 0.0 < p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        d0 = phi_inv(p)
        hp_bad = [any(halfplane_delta(float(a), float(d0 + o), float(r))[0] < -tol
                      for a in alphas for o in offs) for r in r_grid]
        a = psi_inv(p)
        slab_bad = [slab_delta(a, float(r)) < -tol for r in r_grid]
        ball_bad = []
        radii = [math.sqrt(stats.chi2.ppf(p, n)) for n in ball_dims]
        for r in r_grid:
            ball_bad.append(any(ball_delta(n, R, float(r)) < -tol for n, R in zip(ball_dims, radii)))
        th = [_prefix_threshold(r_grid, b) for b in (hp_bad, slab_bad, ball_bad)]
        q = d0 * d0
        rows.append(AppendixRow(float(p), th[0], th[1], th[2], float(np.nanmin(th)) if not all(
            math.isnan(x) for x in th) else math.nan, a, q * math.exp(q)))
    return rows
