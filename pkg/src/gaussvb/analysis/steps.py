"""Verifiers for the three reductions from a convex body to a halfplane.

Each verifier returns the measures on both sides of one inequality so that
tests and the CLI can compare them against the combined error bounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..bodies import ConvexBody, Halfspace, PlanarHypograph, basis
from ..gauss import MeasureEstimate, phi_inv, radius_derived
from ..transforms import circ_transform, ehrhard_E, ehrhard_E2, hypograph_shift, planar_T_r
from .halfplane import halfplane_delta
from .measure import DEFAULT_SAMPLES, measure

TOL = 1e-9


@dataclass(frozen=True)
class Comparison:
    """``lhs >= rhs`` up to the summed error bars."""

    lhs: MeasureEstimate
    rhs: MeasureEstimate

    @property
    def gap(self) -> float:
        return self.lhs.value - self.rhs.value

    @property
    def error(self) -> float:
        return self.lhs.error + self.rhs.error

    def holds(self, tol: float = TOL) -> bool:
        return self.gap >= -(self.error + tol)


def verify_step1(K: ConvexBody, r: float, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                 workers: int = 1) -> Comparison:
    """``gamma(K o r e_n)`` against ``gamma(E(K) o r e_n)``.

    Both sides are integrated along ``e_n``; in dimension three and up they
    share the Monte Carlo points, so their difference is much more accurate
    than either error bar.
    """
    n = K.dim
    lhs = measure(circ_transform(K, r * basis(n - 1, n)), samples=samples, seed=seed,
                  workers=workers)
    rhs = measure(hypograph_shift(ehrhard_E(K), r), samples=samples, seed=seed, workers=workers)
    return Comparison(lhs, rhs)


@dataclass(frozen=True)
class Step2Result:
    """Increments of a hypograph and of its planar symmetrization."""

    delta_hypograph: float
    delta_planar: float
    error: float

    def holds(self, tol: float = TOL) -> bool:
        return abs(self.delta_hypograph - self.delta_planar) <= self.error + tol


def verify_step2(Lam, r: float, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> Step2Result:
    a1 = measure(hypograph_shift(Lam, r), samples=samples, seed=seed)
    a0 = measure(Lam, samples=samples, seed=seed)
    L = ehrhard_E2(Lam, seed=seed)
    b1 = measure(planar_T_r(L, r))
    b0 = measure(L)
    err = a0.error + a1.error + b0.error + b1.error
    return Step2Result(a1.value - a0.value, b1.value - b0.value, err)


@dataclass(frozen=True)
class TangentReduction:
    """Data of the tangent construction at height ``-w_r``.

    ``a0 = theta(-w_r)``, the tangent line is ``c x + s y = D`` and the
    comparison halfplane ``c x + s y <= d`` meets ``y = -w_r`` at ``x = a1``.
    """

    a0: float
    D: float
    a1: float
    d: float
    alpha: float

    def check(self, tol: float = 1e-9) -> bool:
        c = math.cos(self.alpha)
        return self.a1 <= self.a0 + tol and abs((self.a0 - self.a1) * c - (self.D - self.d)) <= tol


@dataclass
class Step3Result:
    """``case`` is ``"tangent"``, ``"horizontal"`` (``H = L``) or ``"skip"``
    (``theta`` constant below ``-w_r``, so ``L o r e_2`` already contains ``L``)."""

    case: str
    H: Halfspace | None
    lhs: MeasureEstimate        # gamma(L o r e_2)
    rhs: MeasureEstimate        # gamma(H o r e_2), or gamma(L) when skipped
    gamma_L: MeasureEstimate
    gamma_H: MeasureEstimate | None = None
    reduction: TangentReduction | None = None
    notes: list = field(default_factory=list)

    @property
    def comparisons(self) -> list[Comparison]:
        out = [Comparison(self.lhs, self.rhs)]
        if self.gamma_H is not None:
            out.append(Comparison(self.gamma_H, self.gamma_L))
        return out

    def holds(self, tol: float = TOL) -> bool:
        return all(c.holds(tol) for c in self.comparisons)


def verify_step3(L: PlanarHypograph, r: float) -> Step3Result:
    """Replace ``L`` by the halfplane under the tangent at height ``-w_r``.

    Raises
    ------
    ValueError
        If ``theta(-w_r) = -inf``, which cannot happen when ``gamma(L) >= 1/2``.
    """
    w = radius_derived(r).w
    gL = measure(L)
    lhs = measure(planar_T_r(L, r))
    a0 = float(L.theta_at(np.array([-w]))[0])
    if a0 == -math.inf:
        raise ValueError("theta(-w_r) = -inf: L has measure below 1/2")
    if a0 == math.inf:
        # a concave theta that is infinite at an interior point is infinite
        # on its whole domain, so L is the horizontal halfplane below some h
        h = phi_inv(gL.value)
        H = Halfspace([0.0, 1.0], h)
        delta, _, err = halfplane_delta(math.pi / 2, h, r)
        rhs = MeasureEstimate(gL.value + delta, gL.error + err, "quadrature")
        return Step3Result("horizontal", H, lhs, rhs, gL, gL)
    m = L.left_derivative(-w)
    if m >= 0.0:
        # theta non-increasing and flat on (-inf, -w_r]
        return Step3Result("skip", None, lhs, gL, gL, notes=["theta constant below -w_r"])
    norm = math.hypot(1.0, m)
    c, s = 1.0 / norm, -m / norm
    alpha = math.atan2(s, c)
    D = c * a0 - s * w

    def theta_ext(z):
        z = np.asarray(z, dtype=float)
        return np.where(z >= -w, L.theta_at(np.maximum(z, -w)), (D - s * z) / c)

    bps = [] if L._bps is None else list(L._bps)
    Lp = PlanarHypograph(theta_ext, monotone=True, breakpoints=bps + [-w], source=L,
                         label=f"tangent({L.describe()})")
    gLp = measure(Lp)
    d = phi_inv(gLp.value)
    a1 = (d + s * w) / c
    H = Halfspace([c, s], d)
    gH = MeasureEstimate(gLp.value, gLp.error, "quadrature")
    delta, _, err = halfplane_delta(alpha, d, r)
    rhs = MeasureEstimate(gH.value + delta, gH.error + err, "quadrature")
    red = TangentReduction(a0=a0, D=D, a1=a1, d=d, alpha=alpha)
    return Step3Result("tangent", H, lhs, rhs, gL, gH, red)


@dataclass
class Chain:
    """The increments ``Delta_K >= Delta_Lambda = Delta_L >= Delta_H >= 0``."""

    r: float
    delta_K: float
    delta_Lambda: float
    delta_L: float
    delta_H: float
    errors: dict
    case: str

    def links(self):
        """(name, left, right, relation, allowed error) for each link."""
        e = self.errors
        return [
            ("K>=Lambda", self.delta_K, self.delta_Lambda, ">=", e["K"] + e["Lambda"]),
            ("Lambda=L", self.delta_Lambda, self.delta_L, "=", e["Lambda"] + e["L"]),
            ("L>=H", self.delta_L, self.delta_H, ">=", e["L"] + e["H"]),
            ("H>=0", self.delta_H, 0.0, ">=", e["H"]),
        ]

    def violations(self, tol: float = TOL):
        bad = []
        for name, a, b, rel, err in self.links():
            slack = err + tol
            if (rel == ">=" and a < b - slack) or (rel == "=" and abs(a - b) > slack):
                bad.append(name)
        return bad


def verify_chain(K: ConvexBody, r: float) -> Chain:
    """Run all three reductions on a planar body for the shift ``r e_2``."""
    if K.dim != 2:
        raise ValueError("the full chain is implemented for planar bodies")
    e2 = np.array([0.0, 1.0])
    gK = measure(K)
    gK1 = measure(circ_transform(K, r * e2))
    Lam = ehrhard_E(K)
    gLam = measure(Lam)
    gLam1 = measure(hypograph_shift(Lam, r))
    L = ehrhard_E2(Lam)
    s3 = verify_step3(L, r)
    if s3.case == "skip":
        dH, eH = 0.0, 0.0
    else:
        dH = s3.rhs.value - s3.gamma_H.value
        eH = s3.rhs.error + s3.gamma_H.error
    errors = {"K": gK.error + gK1.error, "Lambda": gLam.error + gLam1.error,
              "L": s3.lhs.error + s3.gamma_L.error, "H": eH}
    return Chain(r, gK1.value - gK.value, gLam1.value - gLam.value,
                 s3.lhs.value - s3.gamma_L.value, dH, errors, s3.case)
