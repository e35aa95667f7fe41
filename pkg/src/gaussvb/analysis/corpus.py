"""Seeded random test bodies: bounded polytopes and concave profiles."""
from __future__ import annotations

import numpy as np

from ..bodies import HPolytope, PiecewiseLinearConcave, MinAffine
from .measure import measure

GEN_SAMPLES = 200_000


def _random_directions(rng, k, dim):
    N = rng.standard_normal((k, dim))
    return N / np.linalg.norm(N, axis=1, keepdims=True)


def _mass(P, seed):
    if P.dim == 2:
        return measure(P).value
    return measure(P, samples=GEN_SAMPLES, seed=seed).value


def random_polytope(rng: np.random.Generator, dim: int = 2, facets=(6, 12),
                    mass=(0.55, 0.9), max_tries: int = 100) -> HPolytope:
    """A bounded polytope whose Gaussian measure lies in ``mass``.

    Facet normals are uniform on the sphere and offsets uniform on
    ``[0.5, 2.5]``; unbounded draws are rejected.  The body is then grown
    (if too light) or slid along a random direction (if too heavy) until
    its measure lands in the target window.  In dimension three and up the
    measure used for this is a Monte Carlo estimate with a fixed seed.
    """
    lo_m, hi_m = mass
    seed = int(rng.integers(2**31))
    for _ in range(max_tries):
        k = int(rng.integers(facets[0], facets[1] + 1))
        P = HPolytope(_random_directions(rng, k, dim), rng.uniform(0.5, 2.5, k))
        if not P.is_bounded():
            continue
        for _ in range(20):
            if _mass(P, seed) >= lo_m:
                break
            P = P.scale(1.5)
        m0 = _mass(P, seed)
        if m0 < lo_m:
            continue
        if m0 <= hi_m:
            return P
        v = _random_directions(rng, 1, dim)[0]
        far = 1.0
        while _mass(P.translate(far * v), seed) > hi_m:
            far *= 2.0
            if far > 64:
                break
        a, b = 0.0, far
        for _ in range(60):
            mid = 0.5 * (a + b)
            m = _mass(P.translate(mid * v), seed)
            if lo_m <= m <= hi_m:
                return P.translate(mid * v)
            if m > hi_m:
                a = mid
            else:
                b = mid
    raise RuntimeError("could not generate a polytope in the requested mass window")


def polytope_corpus(seed: int, count: int, dim: int = 2, **kw) -> list[HPolytope]:
    rng = np.random.default_rng(seed)
    return [random_polytope(rng, dim, **kw) for _ in range(count)]


def random_unit_vector(rng, dim: int) -> np.ndarray:
    return _random_directions(rng, 1, dim)[0]


def random_pl_concave(rng, pieces=(2, 6), monotone: bool = False) -> PiecewiseLinearConcave:
    """Random concave piecewise-linear ``theta`` of one variable.

    Slopes decrease from knot to knot; with ``monotone`` they are all
    non-positive, so ``theta`` is non-increasing.
    """
    k = int(rng.integers(pieces[0], pieces[1] + 1))
    z = np.sort(rng.uniform(-2.0, 2.0, k))
    if monotone:
        slopes = -np.sort(rng.uniform(0.05, 3.0, k + 1))
    else:
        slopes = np.sort(rng.uniform(-3.0, 3.0, k + 1))[::-1]
    x = [rng.uniform(-0.5, 1.5)]
    for i in range(1, k):
        x.append(x[-1] + slopes[i] * (z[i] - z[i - 1]))
    knots = np.column_stack([z, x])
    return PiecewiseLinearConcave(knots, left_slope=slopes[0], right_slope=slopes[-1])


def random_min_affine(rng, arg_dim: int, pieces=(2, 6)) -> MinAffine:
    """``psi(y) = min_k (<g_k, y> + h_k)`` with random gradients and offsets."""
    k = int(rng.integers(pieces[0], pieces[1] + 1))
    G = rng.uniform(-2.0, 2.0, (k, arg_dim))
    h = rng.uniform(-0.5, 1.5, k)
    return MinAffine(G, h)
