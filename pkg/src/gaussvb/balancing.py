"""Vector balancing at desk scale.

``brute_force_signs`` enumerates all sign vectors.  ``chain_extract_signs``
builds ``K_i = K_{i-1} o u_i`` and walks back from ``0 in K_t``: each step
keeps a point of the previous body, because a kept fiber has length at least
``2|u|`` and so the widened fiber is covered by its two shifts.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .bodies import ConvexBody, HPolytope, body_from_json, from_vertices, perp, unit
from .gauss import interval_mass, radius_derived
from .transforms import CircTransformed, circ_transform, star_transform

MAX_T = 24
BLOCK = 1 << 16
WALK_TOL = 1e-9
NORM_BOUND = {"circ": 1.0 / 7.0, "star": 1.0 / 5.0}


class ExtractionFailure(RuntimeError):
    """The chain walk could not keep its point inside the bodies."""


class InstanceTooLarge(ValueError):
    pass


# -- gauges -------------------------------------------------------------
def gauge_values(S: np.ndarray, gauge) -> np.ndarray:
    """Norm of each row of ``S``; ``gauge`` is ``"l1"``, ``"l2"``, ``"linf"`` or
    an :class:`HPolytope` containing the origin in its interior."""
    if isinstance(gauge, HPolytope):
        return gauge.gauge(S)
    if gauge == "l2":
        return np.linalg.norm(S, axis=1)
    if gauge == "l1":
        return np.abs(S).sum(axis=1)
    if gauge == "linf":
        return np.abs(S).max(axis=1)
    raise ValueError(f"unknown gauge {gauge!r}")


@dataclass
class BalancingInstance:
    vectors: np.ndarray
    body: ConvexBody | None = None
    gauge: object = "l2"
    bound: float = math.inf

    def __post_init__(self):
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if len(self.vectors) < 1:
            raise ValueError("need at least one vector")
        if np.any(np.linalg.norm(self.vectors, axis=1) > self.bound + 1e-12):
            raise ValueError("a vector exceeds the declared norm bound")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def t(self) -> int:
        return len(self.vectors)

    @classmethod
    def from_json(cls, data: dict) -> "BalancingInstance":
        V = np.asarray(data["vectors"], dtype=float)
        if V.shape[1] != data.get("dim", V.shape[1]):
            raise ValueError("vectors do not match dim")
        body = body_from_json(data["body"]) if "body" in data else None
        return cls(V, body, data.get("gauge", "l2"), data.get("bound", math.inf))

    @classmethod
    def load(cls, path) -> "BalancingInstance":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass
class SignResult:
    eps: np.ndarray
    value: float
    verified: bool = True
    method: str = "brute_force"

    def to_json(self) -> dict:
        return {"signs": [int(e) for e in self.eps], "gauge_value": float(self.value),
                "verified": bool(self.verified), "method": self.method}


# -- enumeration --------------------------------------------------------
def _sign_block(start: int, stop: int, t: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(t - 1, -1, -1)) & 1
    return 1.0 - 2.0 * bits  # bit 0 -> +1, so +1 comes first


def brute_force_signs(inst: BalancingInstance, workers: int = 1,
                      rel_tie: float = 1e-12) -> SignResult:
    """Sign vector minimizing the gauge of ``sum eps_i u_i``.

    Ties (values within ``rel_tie`` relative of the minimum) go to the
    lexicographically first vector with ``+1`` before ``-1``.

    Raises
    ------
    InstanceTooLarge
        If ``t > 24``.
    """
    t = inst.t
    if t > MAX_T:
        raise InstanceTooLarge(f"t = {t} exceeds the enumeration cap {MAX_T}")
    U = inst.vectors
    total = 1 << t
    starts = list(range(0, total, BLOCK))

    def scan(s):
        E = _sign_block(s, min(s + BLOCK, total), t)
        return gauge_values(E @ U, inst.gauge)

    mins = []
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            mins = [float(v.min()) for v in ex.map(scan, starts)]
    else:
        for s in starts:
            mins.append(float(scan(s).min()))
            if mins[-1] == 0.0:
                break
    best_val = min(mins)
    cut = best_val + rel_tie * best_val
    k = next(i for i, m in enumerate(mins) if m <= cut)
    vals = scan(starts[k])
    best_idx = starts[k] + int(np.nonzero(vals <= cut)[0][0])
    best = float(vals[best_idx - starts[k]])
    eps = _sign_block(best_idx, best_idx + 1, t)[0]
    return SignResult(eps, best)


# -- the transform chain ------------------------------------------------
def _fiber_score(P: HPolytope, uhat, variant):
    def score(Y):
        lo, hi = P.slice(Y, uhat)
        if variant == "circ":
            return np.where(lo <= hi, interval_mass(lo, hi), -1.0)
        return np.where(lo <= hi, hi - lo, -1.0)
    return score


def _zone_cuts(P: HPolytope, u, variant: str, rays: int = 32, shrink: float = 1e-9):
    """Halfspaces (normals orthogonal to ``u``) whose intersection is an
    inner approximation of the kept zone, shrunk by ``shrink``."""
    n = P.dim
    r = float(np.linalg.norm(u))
    uhat = unit(u)
    level = radius_derived(r).p if variant == "circ" else 2.0 * r
    if n == 2:
        lo, hi = CircTransformed(P, u, variant).zone()
        if not lo <= hi:
            return None
        p = perp(uhat)
        return np.array([p, -p]), np.array([hi - shrink, -lo - shrink])
    # orthonormal basis of the complement of u
    Q, _ = np.linalg.qr(np.column_stack([uhat, np.eye(n)]))
    B = Q[:, 1:n]
    score = _fiber_score(P, uhat, variant)
    V = P.vertices()
    c0 = (V.mean(axis=0) @ B)
    res = optimize.minimize(lambda y: -score(np.atleast_2d(y @ B.T))[0], c0, method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
    ystar = res.x if -res.fun >= score(np.atleast_2d(c0 @ B.T))[0] else c0
    if score(np.atleast_2d(ystar @ B.T))[0] < level:
        return None
    if n != 3:
        raise NotImplementedError("zone polygons are built for n <= 3")
    reach = 2.0 * np.max(np.linalg.norm(V, axis=1)) + 1.0
    ang = np.arange(rays) * 2 * math.pi / rays
    D = np.column_stack([np.cos(ang), np.sin(ang)])
    a = np.zeros(rays)
    b = np.full(rays, reach)
    for _ in range(60):
        mid = 0.5 * (a + b)
        ok = score((ystar + mid[:, None] * D) @ B.T) >= level
        a = np.where(ok, mid, a)
        b = np.where(ok, b, mid)
    pts = ystar + a[:, None] * D
    # polygon edges -> halfplanes in the complement coordinates
    nxt = np.roll(pts, -1, axis=0)
    e = nxt - pts
    nrm = np.column_stack([e[:, 1], -e[:, 0]])
    nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
    off = np.sum(nrm * pts, axis=1)
    flip = (nrm @ ystar) > off
    nrm[flip] *= -1
    off[flip] *= -1
    return nrm @ B.T, off - shrink


def materialized_step(P: HPolytope, u, variant: str = "circ") -> HPolytope | None:
    """An explicit polytope inside ``P o u`` (or ``P * u``).

    ``P + [-u, u]`` is the hull of the shifted vertices; it is cut by the
    (inner approximated) cylinder over the kept zone.  Returns ``None`` when
    no fiber is kept.
    """
    cuts = _zone_cuts(P, u, variant)
    if cuts is None:
        return None
    V = P.vertices()
    hull = from_vertices(np.vstack([V + u, V - u]))
    A = np.vstack([hull.A, cuts[0]])
    b = np.concatenate([hull.b, cuts[1]])
    out = HPolytope(A, b)
    return from_vertices(out.vertices())


@dataclass
class ExtractionTrace:
    points: list = field(default_factory=list)
    both_feasible: list = field(default_factory=list)


def chain_extract_signs(inst: BalancingInstance, variant: str = "circ", method: str = "polytope",
                        trace: ExtractionTrace | None = None) -> SignResult:
    """Signs with ``sum eps_i u_i`` in ``K_0`` from the transform chain.

    ``method="polytope"`` materializes each ``K_i`` as an explicit polytope
    contained in the exact transform; ``method="lazy"`` nests transform
    oracles and is only practical for a few steps.

    Raises
    ------
    ValueError
        Vectors above the norm bound for the variant, or no body.
    ExtractionFailure
        ``0`` outside ``K_t`` or a backward step without a feasible sign.
    """
    if variant not in NORM_BOUND:
        raise ValueError("variant must be 'circ' or 'star'")
    if inst.body is None:
        raise ValueError("the instance has no body")
    U = inst.vectors
    if np.any(np.linalg.norm(U, axis=1) > NORM_BOUND[variant] + 1e-12):
        raise ValueError(f"vectors must have norm at most {NORM_BOUND[variant]:.6g}")
    K0 = inst.body
    chain = [K0]
    if method == "polytope":
        P = K0.as_polytope()
        if P is None:
            raise ValueError("the polytope method needs an explicit polytope")
        for u in U:
            if not np.any(u):
                chain.append(chain[-1])
                continue
            nxt = materialized_step(chain[-1], u, variant)
            if nxt is None:
                raise ExtractionFailure("a transform in the chain kept no fiber")
            chain.append(nxt)
    elif method == "lazy":
        op = circ_transform if variant == "circ" else star_transform
        for u in U:
            chain.append(op(chain[-1], u))
    else:
        raise ValueError("method must be 'polytope' or 'lazy'")

    def inside(body, x, tol):
        if isinstance(body, HPolytope):
            return bool(np.all(body.A @ x <= body.b + tol))
        return bool(body.contains(x[None, :])[0])

    x = np.zeros(inst.dim)
    if not inside(chain[-1], x, WALK_TOL):
        raise ExtractionFailure("0 is not in the last body of the chain")
    eps = np.zeros(inst.t)
    for i in range(inst.t - 1, -1, -1):
        prev = chain[i]
        plus = inside(prev, x + U[i], WALK_TOL)
        minus = inside(prev, x - U[i], WALK_TOL)
        if trace is not None:
            trace.points.append(x.copy())
            trace.both_feasible.append(plus and minus)
        if plus:
            eps[i] = 1.0
        elif minus:
            eps[i] = -1.0
        else:
            raise ExtractionFailure(f"no feasible sign at step {i + 1}")
        x = x + eps[i] * U[i]
    total = eps @ U
    ok = bool(K0.contains(total[None, :])[0])
    if not ok:
        raise ExtractionFailure("the extracted sum is outside K_0")
    val = float(gauge_values(total[None, :], inst.gauge)[0])
    return SignResult(eps, val, ok, f"chain_{variant}")


def extract_scaled(inst: BalancingInstance, factor: float = 7.0, variant: str = "circ",
                   method: str = "polytope") -> SignResult:
    """Vectors of norm up to 1 and the body ``factor * K_0``: run the chain on
    ``u_i / factor`` and ``K_0``; the same signs put the sum in ``factor * K_0``."""
    small = BalancingInstance(inst.vectors / factor, inst.body, inst.gauge)
    res = chain_extract_signs(small, variant, method)
    total = res.eps @ inst.vectors
    P = inst.body.as_polytope()
    ok = bool(P.scale(factor).contains(total[None, :])[0]) if P is not None else res.verified
    val = float(gauge_values(total[None, :], inst.gauge)[0])
    return SignResult(res.eps, val, ok, res.method)


# -- experiments --------------------------------------------------------
def sample_unit_sphere(rng, gauge: str, m: int, n: int) -> np.ndarray:
    """``m`` random points on the unit sphere of the gauge."""
    G = rng.standard_normal((m, n))
    if gauge == "l2":
        return G / np.linalg.norm(G, axis=1, keepdims=True)
    if gauge == "l1":
        E = rng.exponential(size=(m, n))
        return np.sign(G) * E / E.sum(axis=1, keepdims=True)
    if gauge == "linf":
        X = rng.uniform(-1.0, 1.0, (m, n))
        k = rng.integers(n, size=m)
        X[np.arange(m), k] = np.sign(G[np.arange(m), k])
        return X
    raise ValueError(f"unknown gauge {gauge!r}")


@dataclass
class BetaStats:
    max_min: float
    mean_min: float
    witness: np.ndarray
    structured: float
    trials: int


def beta_experiment(U: str, V: str, n: int, trials: int, seed: int = 0) -> BetaStats:
    """Lower estimates of ``beta(U, V)``: for ``n`` vectors in the unit ball of
    ``U`` the best signed sum in the ``V`` gauge, maximized over random sets
    and over the standard basis (scaled onto the ``U`` sphere)."""
    rng = np.random.default_rng(seed)
    E = _sign_block(0, 1 << n, n)
    best, mean, wit = -math.inf, 0.0, None
    for _ in range(trials):
        W = sample_unit_sphere(rng, U, n, n)
        v = float(gauge_values(E @ W, V).min())
        mean += v
        if v > best:
            best, wit = v, W
    basis_set = np.eye(n)
    structured = float(gauge_values(E @ basis_set, V).min())
    if structured >= best:
        best, wit = structured, basis_set
    return BetaStats(best, mean / max(trials, 1), wit, structured, trials)


def vb_report(streams, gauge="linf") -> dict:
    """Brute-force minima over prefixes of each vector stream.

    The ``beta`` estimate uses prefixes of length at most the dimension,
    the ``vb`` estimate all prefixes, so ``vb >= beta`` by construction.
    """
    beta_est, vb_est, rows = 0.0, 0.0, []
    for U in streams:
        U = np.atleast_2d(np.asarray(U, dtype=float))
        n = U.shape[1]
        for t in range(1, len(U) + 1):
            v = brute_force_signs(BalancingInstance(U[:t], gauge=gauge)).value
            rows.append((t, v))
            vb_est = max(vb_est, v)
            if t <= n:
                beta_est = max(beta_est, v)
    spread = float(np.std([v for _, v in rows])) if rows else 0.0
    return {"beta_estimate": beta_est, "vb_estimate": vb_est, "prefix_values": rows,
            "spread": spread}
