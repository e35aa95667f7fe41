"""Banaszczyk-type transforms and Ehrhard symmetrizations.

All transforms are lazy: they wrap the oracle of their input body, so a
transformed body is exact up to the slice tolerance of whatever it wraps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bodies import (
    ConvexBody, Hypograph, LinearImage, PlanarHypograph, _ConcaveProfile, _same_dir,
    as_points, basis, bisection_slice, perp, unit,
)
from .gauss import (
    GaussianSampler, MeasureEstimate, RadiusDerived, interval_mass, interval_quantile,
    phi_inv, radius_derived,
)


@dataclass(frozen=True)
class Rotation:
    """Orthogonal map ``x -> Q x`` sending a chosen vector onto the last axis."""

    Q: np.ndarray

    def apply(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.Q.T

    def apply_inverse(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.Q

    @property
    def inverse(self) -> "Rotation":
        return Rotation(self.Q.T)

    def body(self, K: ConvexBody) -> ConvexBody:
        return LinearImage(K, self.Q)


def rotate_to_axis(u) -> Rotation:
    """Orthogonal ``rho`` with ``rho(u) = |u| e_n``.

    A Householder reflection, so ``det = -1`` except when ``u`` already
    points along ``e_n`` (identity).
    """
    u = np.asarray(u, dtype=float)
    if not np.any(u):
        raise ValueError("cannot align the zero vector")
    n = len(u)
    uh = u / np.linalg.norm(u)
    en = basis(n - 1, n)
    w = uh - en
    nw = np.linalg.norm(w)
    if nw < 1e-15:
        return Rotation(np.eye(n))
    w /= nw
    return Rotation(np.eye(n) - 2.0 * np.outer(w, w))


def coordinate_reflection(dim: int, axis: int) -> np.ndarray:
    Q = np.eye(dim)
    Q[axis, axis] = -1.0
    return Q


# fiber masses within this of p_r count as ties, and ties are kept
TIE_SLACK = 1e-15


class CircTransformed(ConvexBody):
    """``K o u`` (Gaussian variant) or ``K * u`` (Euclidean variant).

    Fibers along ``u`` are kept, widened by ``|u|`` on both ends, exactly
    when the fiber of ``K`` has Gaussian mass at least ``p_r`` (``circ``) or
    length at least ``2 |u|`` (``star``).  The boundary case counts as kept.
    """

    def __init__(self, base: ConvexBody, u, variant: str = "circ"):
        if variant not in ("circ", "star"):
            raise ValueError("variant must be 'circ' or 'star'")
        u = np.asarray(u, dtype=float)
        if len(u) != base.dim:
            raise ValueError("u has the wrong dimension")
        self.base = base
        self.u = u
        self.variant = variant
        self.dim = base.dim
        self.derived: RadiusDerived = radius_derived(float(np.linalg.norm(u)))
        self.uhat = unit(u)
        self._z = None
        self._set_depth(base)

    @property
    def r(self) -> float:
        return self.derived.r

    def _keep(self, lo, hi, s):
        nonempty = lo <= hi
        if self.variant == "circ":
            ok = interval_mass(lo + s, hi + s) >= self.derived.p - TIE_SLACK
        else:
            ok = (hi - lo) >= 2.0 * self.r
        return nonempty & ok

    def contains(self, X):
        X = as_points(X, self.dim)
        lo, hi = self.base.slice(X, self.uhat)
        s = X @ self.uhat
        return self._keep(lo, hi, s) & (lo - self.r <= 0.0) & (hi + self.r >= 0.0)

    def slice(self, X, v):
        v = np.asarray(v, dtype=float)
        if _same_dir(v, self.uhat) or _same_dir(v, -self.uhat):
            X = as_points(X, self.dim)
            lo, hi = self.base.slice(X, self.uhat)
            keep = self._keep(lo, hi, X @ self.uhat)
            lo = np.where(keep, lo - self.r, math.inf)
            hi = np.where(keep, hi + self.r, -math.inf)
            return (lo, hi) if v @ self.uhat > 0 else (-hi, -lo)
        return bisection_slice(self, X, v)

    def fiber_direction(self):
        return self.uhat

    def zone(self) -> tuple[float, float]:
        """Planar case: the kept transverse coordinates (along ``perp(u)``)
        as an interval; ``(inf, -inf)`` if no fiber is kept."""
        if self.dim != 2:
            raise ValueError("zone() is planar")
        if self._z is None:
            p = perp(self.uhat)

            def score(y):
                y = np.atleast_1d(np.asarray(y, dtype=float))
                lo, hi = self.base.slice(y[:, None] * p, self.uhat)
                if self.variant == "circ":
                    val = interval_mass(lo, hi)
                else:
                    val = np.where(lo <= hi, hi - lo, -math.inf)
                return np.where(lo <= hi, val, -1.0)

            prof = _ConcaveProfile(score)
            level = self.derived.p - TIE_SLACK if self.variant == "circ" else 2.0 * self.r
            lo, hi = prof.superlevel(np.array([level]))
            self._z = (float(lo[0]), float(hi[0]))
        return self._z

    def fiber_breakpoints(self, v):
        if self.dim != 2 or not _same_dir(v, self.uhat):
            return np.empty(0)
        z = np.array([c for c in self.zone() if np.isfinite(c)])
        return np.concatenate([self.base.fiber_breakpoints(self.uhat), z])

    def describe(self):
        sym = "o" if self.variant == "circ" else "*"
        return f"({self.base.describe()} {sym} {np.round(self.u, 12).tolist()})"


def circ_transform(K: ConvexBody, u) -> ConvexBody:
    """``K o u``; ``K o 0 = K``."""
    u = np.asarray(u, dtype=float)
    if not np.any(u):
        return K
    return CircTransformed(K, u, "circ")


def star_transform(K: ConvexBody, u) -> ConvexBody:
    """Banaszczyk's ``K * u``; ``K * 0 = K``."""
    u = np.asarray(u, dtype=float)
    if not np.any(u):
        return K
    return CircTransformed(K, u, "star")


def ehrhard_E(K: ConvexBody) -> Hypograph:
    """Symmetrization replacing each fiber along ``e_n`` by a downward ray of
    the same Gaussian mass; ``psi(y) = Phi^{-1}(gamma_1(I_y))``."""
    if K.dim < 2:
        raise ValueError("ehrhard_E needs dim >= 2")
    n = K.dim
    en = basis(n - 1, n)

    def psi(Y):
        Y = np.asarray(Y, dtype=float).reshape(-1, n - 1)
        lo, hi = K.slice(np.hstack([Y, np.zeros((len(Y), 1))]), en)
        return interval_quantile(lo, hi)

    bps = K.fiber_breakpoints(en) if n == 2 else None
    return Hypograph(psi, n, breakpoints=bps, source=K, label=f"E({K.describe()})")


class EmpiricalTheta:
    """``theta(z) = Phi^{-1}(F(max(z - shift, floor)))`` with ``F`` the
    empirical section mass built from fibers ``[a_i, b_i]`` along ``e_n``.

    The fibers are drawn once (write-once cache); ``F(z)`` is the fraction
    of fibers containing ``z``.
    """

    def __init__(self, a, b, shift: float = 0.0, floor: float = -math.inf):
        keep = a <= b
        self.n = len(a)
        self.a = np.asarray(a)[keep]
        self.b = np.asarray(b)[keep]
        self._as = np.sort(self.a)
        self._bs = np.sort(self.b)
        self.shift = shift
        self.floor = floor

    def section_mass(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        cnt = (np.searchsorted(self._as, z, side="right")
               - np.searchsorted(self._bs, z, side="left"))
        return cnt / self.n

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        zz = np.maximum(z - self.shift, self.floor)
        return phi_inv(np.clip(self.section_mass(zz), 0.0, 1.0))

    def theta_error(self, z) -> np.ndarray:
        """Three-sigma error of ``theta`` propagated through ``Phi^{-1}``."""
        F = self.section_mass(np.maximum(np.asarray(z, float) - self.shift, self.floor))
        t = phi_inv(np.clip(F, 0.0, 1.0))
        dens = np.exp(-0.5 * np.where(np.isfinite(t), t, 0.0) ** 2) / math.sqrt(2 * math.pi)
        return np.where(np.isfinite(t), 3.0 * np.sqrt(F * (1 - F) / self.n) / dens, math.inf)

    def shifted(self, r: float, w: float) -> "EmpiricalTheta":
        if self.shift != 0.0 or self.floor != -math.inf:
            raise ValueError("only an unshifted profile can be shifted")
        out = EmpiricalTheta.__new__(EmpiricalTheta)
        out.__dict__.update(self.__dict__)
        out.shift = r
        out.floor = -w
        return out

    def measure_estimate(self) -> MeasureEstimate:
        # per-fiber integral of 1{a <= max(z - s, c) <= b} against gamma_1
        s, c = self.shift, self.floor
        vals = np.zeros(self.n)
        k = len(self.a)
        head = np.where((self.a <= c) & (c <= self.b), interval_mass(-math.inf, c + s), 0.0)
        tail = interval_mass(np.maximum(self.a, c) + s, self.b + s)
        vals[:k] = head + tail
        return MeasureEstimate.from_samples(vals)


def ehrhard_E2(K: ConvexBody, samples: int = 200_000, seed: int = 0) -> PlanarHypograph:
    """Planar symmetrization ``x <= Phi^{-1}(gamma_{n-1}(K_z))``.

    For ``n = 2`` sections are intervals measured exactly.  For ``n >= 3``
    the section masses come from ``samples`` Gaussian fibers along ``e_n``
    (seeded), see :class:`EmpiricalTheta`.
    """
    n = K.dim
    if n < 2:
        raise ValueError("ehrhard_E2 needs dim >= 2")
    monotone = isinstance(K, Hypograph)
    label = f"E2({K.describe()})"
    if n == 2:
        e1 = np.array([1.0, 0.0])

        def theta(z):
            z = np.atleast_1d(np.asarray(z, dtype=float))
            lo, hi = K.slice(np.column_stack([np.zeros(len(z)), z]), e1)
            return interval_quantile(lo, hi)

        return PlanarHypograph(theta, monotone=monotone, breakpoints=K.fiber_breakpoints(e1),
                               source=K, label=label)
    Y = GaussianSampler(seed, n - 1).draw(samples)
    lo, hi = K.slice(np.hstack([Y, np.zeros((samples, 1))]), basis(n - 1, n))
    return PlanarHypograph(EmpiricalTheta(lo, hi), monotone=monotone, source=K, label=label)


def planar_T_r(L: PlanarHypograph, r: float) -> PlanarHypograph:
    """``L_theta o (r e_2)`` as the hypograph of
    ``theta_r(z) = theta(max(z - r, -w_r))``."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    if r == 0:
        return L
    w = radius_derived(r).w
    if isinstance(L.theta, EmpiricalTheta):
        theta_r = L.theta.shifted(r, w)
    else:
        def theta_r(z):
            z = np.asarray(z, dtype=float)
            return L.theta_at(np.maximum(z - r, -w))
    bps = [] if L._bps is None else list(np.asarray(L._bps) + r)
    bps.append(r - w)
    return PlanarHypograph(theta_r, monotone=L.monotone, breakpoints=bps, source=L,
                           label=f"T_{r:.6g}({L.describe()})")


def hypograph_shift(Lam: Hypograph, r: float) -> Hypograph:
    """``Lambda_psi o (r e_n)`` as the hypograph of ``psi + r`` restricted to
    ``{psi >= -w_r}``."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    if r == 0:
        return Lam
    w = radius_derived(r).w

    def psi_r(Y):
        v = Lam.psi_at(Y)
        return np.where(v >= -w - TIE_SLACK, v + r, -math.inf)

    bps = None
    if Lam.dim == 2:
        # psi_r jumps where psi crosses -w_r; transverse coordinate is -y
        lo, hi = Lam.profile().superlevel(np.array([-w]))
        jumps = -np.array([c for c in (lo[0], hi[0]) if np.isfinite(c)])
        bps = np.concatenate([Lam.fiber_breakpoints(np.array([0.0, 1.0])), jumps])
    return Hypograph(psi_r, Lam.dim, breakpoints=bps,
                     source=Lam, label=f"shift_{r:.6g}({Lam.describe()})")
