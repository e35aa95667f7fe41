"""Gaussian measure of convex bodies.

Planar bodies are integrated fiber by fiber: along the body's fiber
direction each slice is an interval whose mass is exact, and the outer
one-dimensional integral uses adaptive Gauss-Legendre panels split at the
body's fiber breakpoints.  Higher dimensions use the same fiber idea with
Monte Carlo on the transverse coordinates, which removes the variance along
one axis.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..bodies import ConvexBody, Halfspace, HPolytope, PlanarHypograph, perp
from ..gauss import GaussianSampler, MeasureEstimate, density, interval_mass, phi
from ..transforms import EmpiricalTheta, rotate_to_axis

DEFAULT_SAMPLES = 2_000_000
QUAD_TOL = 1e-10
# beyond |y| = 8.5 the outer Gaussian weight is below 1e-16 in total
CUTOFF = 8.5
MC_MAX_DIM = 8
CHUNK = 100_000

_G_HI = np.polynomial.legendre.leggauss(20)
_G_LO = np.polynomial.legendre.leggauss(10)


def _gl(f, a, b, rule):
    x, w = rule
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = f(pts.ravel()).reshape(pts.shape)
    return half * (vals @ w)


def adaptive_quad(f, lo: float, hi: float, breaks=(), tol: float = QUAD_TOL,
                  max_rounds: int = 60, min_width: float = 1e-12):
    """Integrate a vectorized ``f`` over ``[lo, hi]``.

    Panels start at the sorted ``breaks`` (and have width at most 1); each
    panel is accepted when the 20-point and 10-point Gauss-Legendre values
    agree to within its share of ``tol``, otherwise it is halved.

    Returns
    -------
    (value, error) : tuple of float
        ``error`` is the sum of the accepted panel discrepancies.
    """
    b = np.asarray([x for x in np.ravel(breaks) if np.isfinite(x) and lo < x < hi], dtype=float)
    edges = np.unique(np.concatenate([[lo, hi], b]))
    pieces = []
    for a0, b0 in zip(edges[:-1], edges[1:]):
        k = max(1, int(math.ceil(b0 - a0)))
        e = np.linspace(a0, b0, k + 1)
        pieces.append(np.column_stack([e[:-1], e[1:]]))
    panels = np.vstack(pieces)
    total = 0.0
    err = 0.0
    span = hi - lo
    for _ in range(max_rounds):
        a, c = panels[:, 0], panels[:, 1]
        hi_v = _gl(f, a, c, _G_HI)
        lo_v = _gl(f, a, c, _G_LO)
        diff = np.abs(hi_v - lo_v)
        width = c - a
        ok = (diff <= tol * width / span) | (width < min_width)
        total += float(hi_v[ok].sum())
        err += float(diff[ok].sum())
        if ok.all():
            return total, err
        bad = panels[~ok]
        m = 0.5 * (bad[:, 0] + bad[:, 1])
        panels = np.vstack([np.column_stack([bad[:, 0], m]), np.column_stack([m, bad[:, 1]])])
    # out of rounds: take what is left at face value
    hi_v = _gl(f, panels[:, 0], panels[:, 1], _G_HI)
    lo_v = _gl(f, panels[:, 0], panels[:, 1], _G_LO)
    return total + float(hi_v.sum()), err + float(np.abs(hi_v - lo_v).sum())


def planar_quadrature(body: ConvexBody, tol: float = QUAD_TOL) -> MeasureEstimate:
    if body.dim != 2:
        raise ValueError("planar quadrature needs a planar body")
    d = np.asarray(body.fiber_direction(), dtype=float)
    p = perp(d)

    def f(y):
        lo, hi = body.slice(y[:, None] * p, d)
        return interval_mass(lo, hi) * density(y)

    val, err = adaptive_quad(f, -CUTOFF, CUTOFF, body.fiber_breakpoints(d), tol=tol)
    return MeasureEstimate(val, err + 2.0 * phi(-CUTOFF), "quadrature")


def _fiber_block(body, d, T, Y):
    X = Y @ T
    lo, hi = body.slice(X, d)
    return interval_mass(lo, hi)


def fiber_monte_carlo(body: ConvexBody, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                      workers: int = 1) -> MeasureEstimate:
    """Conditional Monte Carlo: exact fiber masses at Gaussian transverse points.

    With ``workers > 1`` the sample is split over spawned child streams, so
    the estimate depends on ``(seed, workers)`` but is reproducible for both.
    """
    n = body.dim
    if n < 2:
        raise ValueError("Monte Carlo needs dim >= 2")
    d = np.asarray(body.fiber_direction(), dtype=float)
    T = rotate_to_axis(d).Q[: n - 1, :]  # rows span the complement of d

    def run(sampler, m):
        out = []
        left = m
        while left > 0:
            k = min(CHUNK, left)
            out.append(_fiber_block(body, d, T, sampler.draw(k)))
            left -= k
        return np.concatenate(out)

    root = GaussianSampler(seed, n - 1)
    if workers <= 1:
        vals = run(root, samples)
    else:
        share = [samples // workers + (i < samples % workers) for i in range(workers)]
        with ThreadPoolExecutor(workers) as ex:
            vals = np.concatenate(list(ex.map(run, root.spawn(workers), share)))
    return MeasureEstimate.from_samples(vals)


def measure(body: ConvexBody, method: str = "auto", samples: int = DEFAULT_SAMPLES,
            seed: int = 0, workers: int = 1, tol: float = QUAD_TOL) -> MeasureEstimate:
    """Gaussian measure of ``body`` with an error half-width.

    Parameters
    ----------
    method : {"auto", "exact", "quadrature", "monte_carlo"}
        ``auto`` uses the closed form for a single halfspace, quadrature in
        the plane and fiber Monte Carlo above.
    samples : int
        Monte Carlo sample size.  Dimensions above 8 are refused unless it
        is raised above the default.

    Raises
    ------
    ValueError
        Unknown method, or a method that does not apply to this body.
    """
    if method not in ("auto", "exact", "quadrature", "monte_carlo"):
        raise ValueError(f"unknown method {method!r}")
    n = body.dim
    if method in ("auto", "exact"):
        if isinstance(body, HPolytope) and len(body.b) == 1 and isinstance(body, Halfspace):
            return MeasureEstimate(phi(body.b[0]), 0.0, "exact")
        if isinstance(body, HPolytope) and len(body.b) == 0:
            return MeasureEstimate(1.0, 0.0, "exact")
        if method == "exact":
            raise ValueError("no closed form for this body")
    if method == "auto" and isinstance(body, PlanarHypograph) and isinstance(body.theta, EmpiricalTheta):
        return body.theta.measure_estimate()
    if method == "quadrature" or (method == "auto" and n == 2):
        if n != 2:
            raise ValueError("quadrature is only available in the plane")
        return planar_quadrature(body, tol=tol)
    if n > MC_MAX_DIM and samples <= DEFAULT_SAMPLES:
        raise ValueError(f"dimension {n} needs samples above {DEFAULT_SAMPLES}")
    return fiber_monte_carlo(body, samples=samples, seed=seed, workers=workers)
