"""Scalar Gaussian functions, root finding and seeded sampling.

Extended reals are plain IEEE floats: ``+inf`` and ``-inf`` are the tags for
the two infinite values.  Every function here is written so that infinite
inputs propagate to infinite (or 0/1) outputs and never to NaN.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

SQRT2PI = math.sqrt(2.0 * math.pi)

# phi_inv maps probabilities this close to 0 or 1 onto -inf / +inf
CLAMP = 1e-16


def phi(t):
    """Standard normal CDF.  Accepts scalars or arrays, +-inf included."""
    out = special.ndtr(np.asarray(t, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def density(t):
    t = np.asarray(t, dtype=float)
    out = np.exp(-0.5 * t * t) / SQRT2PI
    return float(out) if np.ndim(out) == 0 else out


def phi_inv(p):
    """Inverse of :func:`phi` with codomain the extended reals.

    Probabilities below ``1e-16`` map to ``-inf`` and those above
    ``1 - 1e-16`` to ``+inf``.  Two Newton steps polish the initial guess.

    Raises
    ------
    ValueError
        If any ``p`` lies outside ``[0, 1]`` (or is NaN).
    """
    p = np.asarray(p, dtype=float)
    if np.any(~((p >= 0.0) & (p <= 1.0))):
        raise ValueError("phi_inv: probability outside [0, 1]")
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    finite = (p >= CLAMP) & (p <= 1.0 - CLAMP)
    tf = special.ndtri(p[finite])
    pf = p[finite]
    for _ in range(2):
        d = density(tf)
        ok = d > 0.0
        tf = np.where(ok, tf - _signed_excess(tf, pf) / np.where(ok, d, 1.0), tf)
    t = np.where(p < 0.5, -np.inf, np.inf)
    t[finite] = tf
    return float(t[0]) if scalar else t


def _signed_excess(t, p):
    # Phi(t) - p, evaluated on the tail that keeps relative precision
    t = np.asarray(t, dtype=float)
    p = np.asarray(p, dtype=float)
    upper = t > 0.0
    val = np.where(upper, (1.0 - p) - special.ndtr(-t), special.ndtr(t) - p)
    return float(val) if val.ndim == 0 else val


def psi(x):
    """``gamma_1([-x, x]) = 2 Phi(x) - 1`` for ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    out = np.where(x > 0.0, special.erf(np.maximum(x, 0.0) / math.sqrt(2.0)), 0.0)
    return float(out) if out.ndim == 0 else out


def psi_inv(p):
    """Inverse of :func:`psi` on ``[0, 1]``; ``psi_inv(1) = +inf``."""
    p = np.asarray(p, dtype=float)
    if np.any(~((p >= 0.0) & (p <= 1.0))):
        raise ValueError("psi_inv: probability outside [0, 1]")
    out = math.sqrt(2.0) * special.erfinv(p)
    return float(out) if out.ndim == 0 else out


def interval_mass(lo, hi):
    """``gamma_1([lo, hi])``, zero for empty intervals (``lo > hi``).

    Computed on whichever tail avoids cancellation, so that intervals far
    out in either tail keep full relative precision.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    right = lo > 0.0
    m = np.where(right, special.ndtr(-lo) - special.ndtr(-hi), special.ndtr(hi) - special.ndtr(lo))
    m = np.where(lo > hi, 0.0, np.maximum(m, 0.0))
    return float(m) if m.ndim == 0 else m


def interval_quantile(lo, hi):
    """``Phi^{-1}(gamma_1([lo, hi]))``, accurate also when the mass is near 1.

    Masses above one half are inverted through their complement
    ``Phi(lo) + Phi(-hi)``, so a ray ``(-inf, h]`` maps back to ``h``.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    scalar = lo.ndim == 0 and hi.ndim == 0
    lo, hi = np.broadcast_arrays(np.atleast_1d(lo), np.atleast_1d(hi))
    mass = interval_mass(lo, hi)
    comp = np.where(lo > hi, 1.0, special.ndtr(lo) + special.ndtr(-hi))
    big = mass > 0.5
    out = np.empty(mass.shape)
    out[~big] = phi_inv(np.clip(mass[~big], 0.0, 1.0))
    out[big] = -phi_inv(np.clip(comp[big], 0.0, 1.0))
    return float(out[0]) if scalar else out


def mills_tail(A: float) -> float:
    """Upper Gaussian tail ``T(A) = Phi(-A)`` for ``A > 0``."""
    if not A > 0:
        raise ValueError("mills_tail requires A > 0")
    return phi(-A)


def mills_bound(A: float) -> float:
    """The Mills-ratio upper bound ``exp(-A^2/2) / (A sqrt(2 pi))`` on ``T(A)``."""
    if not A > 0:
        raise ValueError("mills_bound requires A > 0")
    if math.isinf(A):
        return 0.0
    return math.exp(-0.5 * A * A) / (A * SQRT2PI)


@dataclass(frozen=True)
class RadiusDerived:
    """Scalars attached to a transform radius ``r``.

    ``p`` is ``gamma_1([-r, r])`` and ``w`` solves ``Phi(-w) = p``
    (``w = +inf`` at ``r = 0``).
    """

    r: float
    p: float
    w: float


def radius_derived(r: float) -> RadiusDerived:
    if r < 0:
        raise ValueError("radius must be nonnegative")
    p = psi(r)
    return RadiusDerived(r=float(r), p=p, w=-phi_inv(p))


def bisect(f, lo: float, hi: float, tol: float = 1e-12, maxiter: int = 200) -> float:
    """Root of a function with a sign change on ``[lo, hi]`` by plain bisection."""
    flo = f(lo)
    fhi = f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError("bisect: no sign change on bracket")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class LemmaConstants:
    lambda0: float
    r0: float


def lemma_constants(tol: float = 1e-13) -> LemmaConstants:
    """Solve ``2 + exp(-l^2/2) = l sqrt(2 pi)`` for ``lambda0`` and then
    ``w_r - r = lambda0`` for ``r0``.  Both left sides are monotone on the
    brackets used, so bisection is safe."""
    lam = bisect(lambda x: 2.0 + math.exp(-0.5 * x * x) - x * SQRT2PI, 0.1, 3.0, tol=tol)

    def gap(r):
        return radius_derived(r).w - r - lam

    r0 = bisect(gap, 0.01, 0.5, tol=tol)
    return LemmaConstants(lambda0=lam, r0=r0)


@dataclass(frozen=True)
class MeasureEstimate:
    """A Gaussian measure value with its error half-width.

    ``method`` is one of ``"exact"``, ``"quadrature"`` or ``"monte_carlo"``;
    ``samples`` is zero unless the estimate is a Monte Carlo mean.
    """

    value: float
    error: float
    method: str
    samples: int = 0

    def __post_init__(self):
        if self.method not in ("exact", "quadrature", "monte_carlo"):
            raise ValueError(f"unknown method {self.method!r}")
        object.__setattr__(self, "value", float(min(max(self.value, 0.0), 1.0)))
        object.__setattr__(self, "error", float(max(self.error, 0.0)))

    @classmethod
    def from_samples(cls, values: np.ndarray) -> "MeasureEstimate":
        n = len(values)
        sd = float(np.std(values, ddof=1)) if n > 1 else 0.0
        return cls(float(np.mean(values)), 3.0 * sd / math.sqrt(n), "monte_carlo", n)


class GaussianSampler:
    """Reproducible stream of standard Gaussian vectors in ``R^dim``.

    The stream depends only on ``(seed, dim)``: drawing in one block or in
    several smaller blocks yields the same sequence.  One consumer per
    instance; use :meth:`spawn` for parallel workers.
    """

    def __init__(self, seed: int, dim: int):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.seed = seed
        self.dim = dim
        self._seq = np.random.SeedSequence(seed)
        self._rng = np.random.default_rng(self._seq)

    def draw(self, m: int) -> np.ndarray:
        flat = self._rng.standard_normal(m * self.dim)
        return flat.reshape(m, self.dim)

    def __iter__(self):
        while True:
            yield self.draw(1)[0]

    def spawn(self, k: int) -> list["GaussianSampler"]:
        out = []
        for child in self._seq.spawn(k):
            s = GaussianSampler.__new__(GaussianSampler)
            s.seed = self.seed
            s.dim = self.dim
            s._seq = child
            s._rng = np.random.default_rng(child)
            out.append(s)
        return out
