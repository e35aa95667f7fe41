"""The halfplane inequality and its cone region.

For the halfplane ``H = {x cos(a) + y sin(a) <= d}`` and the shift ``r e_2``
the transform keeps the vertical fibers with ``x <= x0``, where
``x0 = (d + w_r sin a) / cos a``, and raises them by ``r``.  With the cone

    C_r = {(x, y) : x > x0, x cos a + y sin a <= d + r sin a}

this gives ``gamma(H o r e_2) - gamma(H) = Phi(d + r sin a) - Phi(d) - gamma(C_r)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ..gauss import SQRT2PI, density, interval_mass, mills_bound, mills_tail, phi, radius_derived

VIOLATION_TOL = 1e-9


@dataclass(frozen=True)
class ConeRegion:
    """The region cut off by the transform of the halfplane with angle
    ``alpha`` in ``[0, pi/2]`` and offset ``d``, at radius ``r``."""

    alpha: float
    d: float
    r: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= math.pi / 2 + 1e-15:
            raise ValueError("alpha must lie in [0, pi/2]")
        if self.r < 0:
            raise ValueError("r must be nonnegative")

    @property
    def c(self) -> float:
        return math.cos(self.alpha)

    @property
    def s(self) -> float:
        return math.sin(self.alpha)

    @property
    def w(self) -> float:
        return radius_derived(self.r).w

    @property
    def x0(self) -> float:
        if self.c <= 0.0:
            return math.inf
        return (self.d + self.s * self.w) / self.c

    def contains(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        x, y = X[:, 0], X[:, 1]
        c, s = self.c, self.s
        lin = c * x + s * y
        return (x > self.x0) & (lin <= self.d + self.r * s)


def _degenerate(cone: ConeRegion) -> bool:
    return cone.r == 0.0 or cone.s == 0.0 or cone.c <= 0.0 or math.isinf(cone.w)


def cone_measure(cone: ConeRegion, epsabs: float = 1e-13):
    """``gamma_2(C_r)`` by one-dimensional quadrature.

    After ``x = x0 + (s/c) v`` the inner Gaussian integral is
    ``Phi(r - w_r - v)``, which decays fast enough for ``scipy.integrate.quad``
    on ``[0, inf)``.

    Returns
    -------
    (value, error) : tuple of float
    """
    if _degenerate(cone):
        return 0.0, 0.0
    c, s, r, w, x0 = cone.c, cone.s, cone.r, cone.w, cone.x0
    k = s / c

    def f(v):
        return phi(r - w - v) * density(x0 + k * v) * k

    val, err = integrate.quad(f, 0.0, math.inf, epsabs=epsabs, epsrel=1e-12, limit=400)
    return max(val, 0.0), err


def cone_bound(cone: ConeRegion, tight: bool = False) -> float:
    """Upper bound on ``gamma_2(C_r)`` valid once ``w_r > r``.

    The plain form is ``s e^{-(d+rs)^2/2} / sqrt(2 pi) * T(w_r - r) / (w_r - r)``;
    with ``tight`` the Mills factor ``T(w_r - r)`` is replaced by its
    closed-form bound ``e^{-(w_r - r)^2/2} / ((w_r - r) sqrt(2 pi))``.
    """
    if _degenerate(cone):
        return 0.0
    A = cone.w - cone.r
    if A <= 0:
        return math.inf
    tail = mills_bound(A) if tight else mills_tail(A)
    lead = cone.s * math.exp(-0.5 * (cone.d + cone.r * cone.s) ** 2) / SQRT2PI
    return lead * tail / A


def halfplane_delta(alpha: float, d: float, r: float):
    """``gamma(H o r e_2) - gamma(H)`` for the halfplane at angle ``alpha``.

    Returns
    -------
    (delta, cone, err) : tuple of float
        ``cone`` is ``gamma_2(C_r)`` (zero when no region is cut off).
    """
    cone = ConeRegion(alpha, d, r)
    if r == 0.0 or cone.s == 0.0:
        return 0.0, 0.0, 0.0
    if cone.c <= 1e-15:
        # horizontal halfplane: vertical fibers are rays of mass Phi(d)
        if d >= -cone.w:
            return interval_mass(d, d + r), 0.0, 0.0
        return -phi(d), 0.0, 0.0
    gain = interval_mass(d, d + r * cone.s)
    cm, err = cone_measure(cone)
    return gain - cm, cm, err


@dataclass(frozen=True)
class ScanRow:
    alpha: float
    d: float
    r: float
    delta: float
    cone_measure: float
    bound: float
    status: str  # "ok", "within_tolerance" or "violation"


def classify(delta: float, tol: float = VIOLATION_TOL) -> str:
    if delta >= 0.0:
        return "ok"
    return "within_tolerance" if delta >= -tol else "violation"


def lemma_scan(alpha_grid, d_grid, r_grid, tol: float = VIOLATION_TOL) -> list[ScanRow]:
    """Evaluate ``halfplane_delta`` on the product grid (alpha outermost)."""
    rows = []
    for a in np.asarray(alpha_grid, dtype=float):
        for d in np.asarray(d_grid, dtype=float):
            for r in np.asarray(r_grid, dtype=float):
                delta, cm, _ = halfplane_delta(float(a), float(d), float(r))
                b = cone_bound(ConeRegion(float(a), float(d), float(r)))
                rows.append(ScanRow(float(a), float(d), float(r), delta, cm, b, classify(delta, tol)))
    return rows


def default_grids():
    """alpha = k pi/40 (k = 1..19), d = 0..4 step 1/4, r = 0..1/7 step 1/70."""
    alpha = np.arange(1, 20) * math.pi / 40
    d = np.arange(17) * 0.25
    r = np.arange(11) / 70.0
    return alpha, d, r
