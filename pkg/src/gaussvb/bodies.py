"""Convex sets exposed through membership and line-slice oracles.

Every body answers two vectorized queries:

* ``contains(X)`` for points ``X`` of shape ``(m, dim)``;
* ``slice(X, v)`` giving, for each row ``x`` of ``X``, the interval
  ``{t : x + t v in K}`` as two arrays ``(lo, hi)``.  Empty slices have
  ``lo > hi`` (by convention ``lo = +inf``, ``hi = -inf``).

Slices along a body's :meth:`~ConvexBody.fiber_direction` are closed form;
other directions may fall back on bisection over the membership oracle.
Bodies are immutable once built.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import QhullError, ConvexHull, HalfspaceIntersection

from .gauss import interval_mass

WINDOW = 64.0
SEARCH_DEPTH = 20
SLICE_TOL = 1e-10
MAX_DEPTH = 32
_EPS = 1e-15


def as_points(X, dim: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got {X.shape[1]}")
    return X


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero vector has no direction")
    return v / n


def perp(d) -> np.ndarray:
    """Planar direction rotated by +90 degrees; the transverse axis used to
    parametrize fibers along ``d``."""
    return np.array([-d[1], d[0]], dtype=float)


def basis(e: int, dim: int) -> np.ndarray:
    v = np.zeros(dim)
    v[e] = 1.0
    return v


def _same_dir(v, w) -> bool:
    return bool(np.max(np.abs(np.asarray(v) - np.asarray(w))) < 1e-14)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    def gaussian_length(self) -> float:
        return interval_mass(self.lo, self.hi)

    def __contains__(self, t: float) -> bool:
        return self.lo <= t <= self.hi


EMPTY = Interval(math.inf, -math.inf)


class ConvexBody:
    """Base class.  Subclasses implement ``contains`` and usually ``slice``."""

    dim: int
    depth: int = 0

    def contains(self, X) -> np.ndarray:
        raise NotImplementedError

    def slice(self, X, v):
        return bisection_slice(self, X, v)

    def fiber_direction(self) -> np.ndarray:
        return basis(self.dim - 1, self.dim)

    def fiber_breakpoints(self, v) -> np.ndarray:
        """Transverse coordinates (along ``perp(v)``) where the fiber
        endpoints of a planar body may fail to be smooth."""
        return np.empty(0)

    def support(self, u) -> float:
        return _numeric_support(self, u)

    def as_polytope(self) -> "HPolytope | None":
        return None

    def describe(self) -> str:
        return type(self).__name__

    def _set_depth(self, *children: "ConvexBody"):
        self.depth = 1 + max(c.depth for c in children)
        if self.depth > MAX_DEPTH:
            raise RecursionError(f"body nesting depth {self.depth} exceeds {MAX_DEPTH}")


def bisection_slice(body: ConvexBody, X, v, tol: float = SLICE_TOL,
                    window: float = WINDOW, search_depth: int = SEARCH_DEPTH):
    """Slice a convex body along a line using only its membership oracle.

    An interior point is searched on dyadic grids of ``[-window, window]``
    (finest spacing ``window * 2**-search_depth``); lines with no grid point
    inside are reported empty, which can miss slices shorter than the finest
    spacing.  Endpoints are then located by bisection to ``tol``; an endpoint
    beyond ``window`` is reported infinite.
    """
    X = as_points(X, body.dim)
    v = np.asarray(v, dtype=float)
    m = len(X)
    t_in = np.zeros(m)
    found = body.contains(X)
    level = 0
    while not found.all() and level <= search_depth:
        todo = np.flatnonzero(~found)
        if level == 0:
            grid = np.array([-window, window])
        else:
            h = window / 2 ** level
            grid = -window + h * np.arange(1, 2 ** (level + 1), 2)
        chunk = max(1, 2_000_000 // len(grid))
        for start in range(0, len(todo), chunk):
            idx = todo[start:start + chunk]
            pts = X[idx, None, :] + grid[None, :, None] * v
            inside = body.contains(pts.reshape(-1, body.dim)).reshape(len(idx), len(grid))
            hit = inside.any(axis=1)
            first = np.argmax(inside, axis=1)
            t_in[idx[hit]] = grid[first[hit]]
            found[idx[hit]] = True
        level += 1
    lo = np.full(m, math.inf)
    hi = np.full(m, -math.inf)
    ok = np.flatnonzero(found)
    if len(ok) == 0:
        return lo, hi
    Xo, to = X[ok], t_in[ok]
    hi[ok] = _bisect_edge(body, Xo, v, to, window, tol)
    lo[ok] = -_bisect_edge(body, Xo, -v, -to, window, tol)
    return lo, hi


def _bisect_edge(body, X, v, t_in, window, tol):
    edge = np.maximum(t_in, 0.0) + window
    out = body.contains(X + edge[:, None] * v)
    res = np.full(len(X), math.inf)
    todo = ~out
    a = t_in[todo].copy()
    b = edge[todo].copy()
    Xt = X[todo]
    if len(a):
        n_iter = int(math.ceil(math.log2(max(float(np.max(b - a)), tol) / tol))) + 1
        for _ in range(n_iter):
            mid = 0.5 * (a + b)
            inside = body.contains(Xt + mid[:, None] * v)
            a = np.where(inside, mid, a)
            b = np.where(inside, b, mid)
        res[todo] = 0.5 * (a + b)
    return res


def _numeric_support(body: ConvexBody, u, window: float = WINDOW) -> float:
    # h(u) = sup over transverse offsets s of the top of the fiber along u;
    # that top is a concave function of s.
    if body.dim != 2:
        raise NotImplementedError("numeric support functions are planar only")
    u = unit(u)
    p = perp(u)
    s = np.linspace(-window, window, 2049)
    lo, hi = body.slice(s[:, None] * p, u)
    if np.any(hi == math.inf):
        return math.inf
    vals = np.where(lo <= hi, hi, -math.inf)
    k = int(np.argmax(vals))
    if vals[k] == -math.inf:
        return -math.inf
    a, b = s[max(k - 1, 0)], s[min(k + 1, len(s) - 1)]

    def top(x):
        lo_, hi_ = body.slice(np.array([x * p]), u)
        return hi_[0] if lo_[0] <= hi_[0] else -math.inf

    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = top(c), top(d)
    for _ in range(80):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = top(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = top(d)
    return float(max(fc, fd, vals[k]))


class HPolytope(ConvexBody):
    """Intersection of halfspaces ``<a_i, x> <= b_i`` with unit normals.

    Unbounded polyhedra are allowed.  Slices in every direction are exact.
    """

    def __init__(self, normals, offsets, tol: float = 0.0):
        A = np.atleast_2d(np.asarray(normals, dtype=float))
        b = np.atleast_1d(np.asarray(offsets, dtype=float))
        if A.shape[0] == 0:
            raise ValueError("polytope needs at least one constraint")
        if A.shape[0] != b.shape[0]:
            raise ValueError("normals and offsets differ in length")
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero normal vector")
        self.A = A / norms[:, None]
        self.b = b / norms
        self.dim = A.shape[1]
        self.tol = tol
        self.A.setflags(write=False)
        self.b.setflags(write=False)
        self._vertices = None

    def contains(self, X):
        X = as_points(X, self.dim)
        return np.all(X @ self.A.T <= self.b + self.tol, axis=1)

    def slice(self, X, v):
        X = as_points(X, self.dim)
        v = np.asarray(v, dtype=float)
        av = self.A @ v
        slack = self.b + self.tol - X @ self.A.T
        pos = av > _EPS
        neg = av < -_EPS
        zero = ~(pos | neg)
        hi = np.min(slack[:, pos] / av[pos], axis=1, initial=math.inf)
        lo = np.max(slack[:, neg] / av[neg], axis=1, initial=-math.inf)
        bad = np.any(slack[:, zero] < 0, axis=1) | (lo > hi)
        lo = np.where(bad, math.inf, lo)
        hi = np.where(bad, -math.inf, hi)
        return lo, hi

    def as_polytope(self):
        return self

    def translate(self, t) -> "HPolytope":
        t = np.asarray(t, dtype=float)
        return HPolytope(self.A, self.b + self.A @ t, self.tol)

    def scale(self, factor: float) -> "HPolytope":
        return HPolytope(self.A, self.b * factor, self.tol)

    def intersect(self, other: "HPolytope") -> "HPolytope":
        return HPolytope(np.vstack([self.A, other.A]), np.concatenate([self.b, other.b]), self.tol)

    def gauge(self, X) -> np.ndarray:
        """Minkowski gauge; requires the origin in the interior (all b > 0)."""
        if np.any(self.b <= 0):
            raise ValueError("gauge needs the origin in the interior")
        X = as_points(X, self.dim)
        return np.maximum(np.max(X @ self.A.T / self.b, axis=1), 0.0)

    # -- planar geometry -------------------------------------------------
    def vertices(self) -> np.ndarray:
        if self._vertices is None:
            self._vertices = (planar_vertices(self) if self.dim == 2
                              else polytope_vertices(self))
        return self._vertices

    def is_bounded(self) -> bool:
        # bounded iff the recession cone {d : A d <= 0} is trivial
        zeros = np.zeros(len(self.b))
        for i in range(self.dim):
            for sign in (1.0, -1.0):
                c = np.zeros(self.dim)
                c[i] = -sign
                r = linprog(c, A_ub=self.A, b_ub=zeros, bounds=[(-1, 1)] * self.dim,
                            method="highs")
                if r.status == 0 and -r.fun > 1e-9:
                    return False
        return True

    def fiber_breakpoints(self, v):
        if self.dim != 2:
            return np.empty(0)
        V = self.vertices()
        return V @ perp(unit(v)) if len(V) else np.empty(0)

    def support(self, u) -> float:
        u = np.asarray(u, dtype=float)
        if self.dim == 2:
            return _planar_support(self.A, self.b, u)
        r = linprog(-u, A_ub=self.A, b_ub=self.b, bounds=[(None, None)] * self.dim,
                    method="highs")
        if r.status == 3:
            return math.inf
        if r.status != 0:
            raise ValueError("support function: empty polytope")
        return float(-r.fun)

    def chebyshev_center(self):
        """Center and radius of the largest inscribed ball (radius capped at 1e6)."""
        c = np.zeros(self.dim + 1)
        c[-1] = -1.0
        A = np.hstack([self.A, np.ones((len(self.b), 1))])
        r = linprog(c, A_ub=A, b_ub=self.b, bounds=[(None, None)] * self.dim + [(0, 1e6)],
                    method="highs")
        if r.status != 0:
            raise ValueError("polytope is empty")
        return r.x[:-1], float(r.x[-1])

    def describe(self):
        return f"hpolytope(dim={self.dim}, facets={len(self.b)})"

    def to_json(self) -> dict:
        return {"type": "hpolytope", "dim": self.dim, "normals": self.A.tolist(),
                "offsets": self.b.tolist()}


class Halfspace(HPolytope):
    """``{x : <normal, x> <= offset}``."""

    def __init__(self, normal, offset: float):
        super().__init__([normal], [offset])
        if abs(np.linalg.norm(self.A[0]) - 1.0) > 1e-12:
            raise ValueError("normal not unit after normalization")

    @property
    def normal(self):
        return self.A[0]

    @property
    def offset(self) -> float:
        return float(self.b[0])

    def describe(self):
        return f"halfspace(normal={self.normal.tolist()}, offset={self.offset:.12g})"

    def to_json(self):
        return {"type": "halfspace", "normal": self.normal.tolist(), "offset": self.offset}


def _planar_support(A, b, u) -> float:
    # LP duality: h(u) = min{b.y : A^T y = u, y >= 0}; basic solutions use at
    # most two constraints.
    tol = 1e-12
    best = math.inf
    cross = A[:, 0] * u[1] - A[:, 1] * u[0]
    dot = A @ u
    single = (np.abs(cross) <= tol * max(1.0, np.linalg.norm(u))) & (dot > 0)
    if single.any():
        best = min(best, float(np.min(b[single] * dot[single])))
    k = len(b)
    if k >= 2:
        i, j = np.triu_indices(k, 1)
        det = A[i, 0] * A[j, 1] - A[i, 1] * A[j, 0]
        ok = np.abs(det) > 1e-14
        i, j, det = i[ok], j[ok], det[ok]
        li = (u[0] * A[j, 1] - u[1] * A[j, 0]) / det
        lj = (A[i, 0] * u[1] - A[i, 1] * u[0]) / det
        feas = (li >= -tol) & (lj >= -tol)
        if feas.any():
            vals = np.maximum(li[feas], 0) * b[i[feas]] + np.maximum(lj[feas], 0) * b[j[feas]]
            best = min(best, float(np.min(vals)))
    return best


def _facet_segments(A, b, block: int = 256):
    # for each facet line p_i + t d_i, the t-range kept by all other facets
    k = len(b)
    P = A * b[:, None]
    Dv = np.column_stack([-A[:, 1], A[:, 0]])
    lo = np.full(k, -math.inf)
    hi = np.full(k, math.inf)
    for s0 in range(0, k, block):
        sl = slice(s0, min(s0 + block, k))
        rate = Dv[sl] @ A.T                      # (m, k): A_j . d_i
        room = b[None, :] - P[sl] @ A.T          # b_j - A_j . p_i
        idx = np.arange(sl.start, sl.stop)
        rate[idx - s0, idx] = 0.0
        room[idx - s0, idx] = 0.0
        flat = np.abs(rate) <= 1e-14
        with np.errstate(divide="ignore", invalid="ignore"):
            t = room / rate
        up = np.where(~flat & (rate > 0), t, math.inf).min(axis=1)
        down = np.where(~flat & (rate < 0), t, -math.inf).max(axis=1)
        blocked = np.any(flat & (room < -1e-12), axis=1)
        hi[sl] = np.where(blocked, -math.inf, up)
        lo[sl] = np.where(blocked, math.inf, down)
    return P, Dv, lo, hi


def planar_vertices(poly: HPolytope, tol: float = 1e-9) -> np.ndarray:
    """Vertices of a planar polyhedron, sorted counter-clockwise."""
    A, b = poly.A, poly.b
    if len(b) < 2:
        return np.empty((0, 2))
    P, Dv, lo, hi = _facet_segments(A, b)
    live = lo <= hi + tol
    ends = []
    for t in (lo, hi):
        ok = live & np.isfinite(t)
        ends.append(P[ok] + t[ok, None] * Dv[ok])
    V = np.vstack(ends)
    if len(V) == 0:
        return V
    V = np.unique(np.round(V, 11), axis=0)
    c = V.mean(axis=0)
    ang = np.arctan2(V[:, 1] - c[1], V[:, 0] - c[0])
    return V[np.argsort(ang)]


def planar_edges(poly: HPolytope):
    """Boundary pieces of a planar polyhedron as ``(point, direction, t_lo, t_hi)``
    arrays; rays and full lines have infinite parameter bounds."""
    A, b = poly.A, poly.b
    P, Dv, lo, hi = _facet_segments(A, b)
    keep = lo <= hi
    return P[keep], Dv[keep], lo[keep], hi[keep]


def polytope_vertices(poly: HPolytope) -> np.ndarray:
    """Vertices of a bounded polytope in any dimension (qhull)."""
    center, radius = poly.chebyshev_center()
    if radius <= 1e-12:
        raise ValueError("polytope has empty interior")
    hs = np.hstack([poly.A, -poly.b[:, None]])
    try:
        V = HalfspaceIntersection(hs, center).intersections
    except QhullError:
        # nearly coplanar facets: joggle the input (moves vertices ~1e-11)
        V = HalfspaceIntersection(hs, center, qhull_options="QJ").intersections
    return np.unique(np.round(V, 12), axis=0)


def from_vertices(V) -> HPolytope:
    """H-representation of the convex hull of a point cloud (qhull)."""
    V = np.asarray(V, dtype=float)
    hull = ConvexHull(V)
    eq = np.unique(np.round(hull.equations, 13), axis=0)
    return HPolytope(eq[:, :-1], -eq[:, -1])


def box(lo, hi) -> HPolytope:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = len(lo)
    I = np.eye(n)
    return HPolytope(np.vstack([I, -I]), np.concatenate([hi, -lo]))


def regular_polygon(radius: float = 1.0, facets: int = 256, center=(0.0, 0.0)) -> HPolytope:
    """Polygon circumscribed about the disk of the given radius."""
    ang = 2 * np.pi * np.arange(facets) / facets
    A = np.column_stack([np.cos(ang), np.sin(ang)])
    return HPolytope(A, radius + A @ np.asarray(center, dtype=float))


def minkowski_combination(P: HPolytope, Q: HPolytope, lam: float) -> HPolytope:
    """``(1 - lam) P + lam Q`` for bounded polytopes."""
    if lam <= 0:
        return P
    if lam >= 1:
        return Q
    VP, VQ = P.vertices(), Q.vertices()
    S = ((1 - lam) * VP[:, None, :] + lam * VQ[None, :, :]).reshape(-1, P.dim)
    return from_vertices(S)


# ---------------------------------------------------------------------------
# piecewise-linear concave functions

class PiecewiseLinearConcave:
    """Concave piecewise-linear ``theta : R -> R U {-inf}``.

    ``theta`` interpolates the knots ``(z_i, x_i)``, continues left of the
    first knot with ``left_slope`` and right of the last knot with
    ``right_slope`` (default: the last segment's slope), or is ``-inf`` there
    when ``cutoff`` is set.
    """

    def __init__(self, knots, left_slope: float, right_slope: float | None = None,
                 cutoff: bool = False):
        K = np.asarray(knots, dtype=float).reshape(-1, 2)
        order = np.argsort(K[:, 0])
        self.z = K[order, 0]
        self.x = K[order, 1]
        if len(self.z) == 0:
            raise ValueError("at least one knot required")
        if np.any(np.diff(self.z) <= 0):
            raise ValueError("knot abscissae must be distinct")
        seg = np.diff(self.x) / np.diff(self.z)
        if right_slope is None:
            right_slope = seg[-1] if len(seg) else left_slope
        self.left_slope = float(left_slope)
        self.right_slope = float(right_slope)
        self.cutoff = bool(cutoff)
        self.slopes = np.concatenate([[self.left_slope], seg, [] if cutoff else [self.right_slope]])
        if np.any(np.diff(self.slopes) > 1e-12):
            raise ValueError("piecewise-linear function is not concave")
        anchors_z = np.concatenate([[self.z[0]], self.z[:-1], [] if cutoff else [self.z[-1]]])
        anchors_x = np.concatenate([[self.x[0]], self.x[:-1], [] if cutoff else [self.x[-1]]])
        self.intercepts = anchors_x - self.slopes * anchors_z

    @property
    def breakpoints(self):
        return self.z.copy()

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        out = np.min(self.slopes[None, :] * z.reshape(-1, 1) + self.intercepts[None, :], axis=1)
        if self.cutoff:
            out = np.where(z.reshape(-1) > self.z[-1], -math.inf, out)
        out = out.reshape(z.shape)
        return float(out) if out.ndim == 0 else out

    def left_derivative(self, z: float) -> float:
        if z <= self.z[0]:
            return self.left_slope
        k = int(np.searchsorted(self.z, z, side="left"))
        return float(self.slopes[min(k, len(self.slopes) - 1)])

    def is_nonincreasing(self) -> bool:
        return bool(self.left_slope <= 0)

    def hypograph_polytope(self) -> HPolytope:
        # {(x, z) : x <= slope_i z + c_i for all i}
        A = np.column_stack([np.ones_like(self.slopes), -self.slopes])
        b = self.intercepts.copy()
        if self.cutoff:
            A = np.vstack([A, [0.0, 1.0]])
            b = np.concatenate([b, [self.z[-1]]])
        return HPolytope(A, b)

    def to_json(self):
        d = {"kind": "piecewise_linear", "knots": np.column_stack([self.z, self.x]).tolist(),
             "left_slope": self.left_slope}
        if self.cutoff:
            d["right_value"] = "-inf"
        else:
            d["right_slope"] = self.right_slope
        return d


class MinAffine:
    """Concave ``psi(y) = min_k (<g_k, y> + h_k)`` on the polyhedral domain
    ``{D y <= e}`` and ``-inf`` outside it.  With no pieces ``psi = +inf`` on
    the domain."""

    def __init__(self, slopes, intercepts, domain_normals=None, domain_offsets=None):
        self.G = np.asarray(slopes, dtype=float)
        self.h = np.asarray(intercepts, dtype=float).reshape(-1)
        if self.G.ndim == 1:
            self.G = self.G.reshape(len(self.h), -1)
        self.D = None if domain_normals is None else np.atleast_2d(np.asarray(domain_normals, float))
        self.e = None if domain_offsets is None else np.atleast_1d(np.asarray(domain_offsets, float))
        if self.G.size == 0 and self.D is None:
            raise ValueError("need at least one affine piece or a domain")
        self.arg_dim = self.G.shape[1] if self.G.size else self.D.shape[1]

    def __call__(self, Y):
        Y = np.asarray(Y, dtype=float).reshape(-1, self.arg_dim)
        if self.G.size:
            out = np.min(Y @ self.G.T + self.h, axis=1)
        else:
            out = np.full(len(Y), math.inf)
        if self.D is not None:
            out = np.where(np.all(Y @ self.D.T <= self.e, axis=1), out, -math.inf)
        return out

    def hypograph_polytope(self) -> HPolytope:
        rows, offs = [], []
        if self.G.size:
            rows.append(np.hstack([-self.G, np.ones((len(self.h), 1))]))
            offs.append(self.h)
        if self.D is not None:
            rows.append(np.hstack([self.D, np.zeros((len(self.e), 1))]))
            offs.append(self.e)
        return HPolytope(np.vstack(rows), np.concatenate(offs))


class _ConcaveProfile:
    """Superlevel sets of a concave function of one variable.

    The maximizer is located once on a grid of ``[-window, window]`` and
    refined by golden section; superlevel endpoints then follow by
    bisection on either side of it.
    """

    def __init__(self, f, window: float = WINDOW, tol: float = 1e-13):
        self.f = f
        self.window = window
        self.tol = tol
        grid = np.linspace(-window, window, 8193)
        vals = f(grid)
        k = int(np.argmax(vals))
        if vals[k] == math.inf:
            self.arg, self.max = float(grid[k]), math.inf
            return
        a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
        g = (math.sqrt(5) - 1) / 2
        for _ in range(90):
            c, d = b - g * (b - a), a + g * (b - a)
            fc, fd = f(np.array([c, d]))
            if fc >= fd:
                b = d
            else:
                a = c
        cand = np.array([grid[k], 0.5 * (a + b)])
        fv = f(cand)
        j = int(np.argmax(fv))
        self.arg, self.max = float(cand[j]), float(fv[j])

    def superlevel(self, level):
        """Endpoints of ``{s : f(s) >= level}`` for each entry of ``level``."""
        level = np.asarray(level, dtype=float)
        n = len(level)
        lo = np.full(n, math.inf)
        hi = np.full(n, -math.inf)
        ok = level <= self.max
        if not ok.any():
            return lo, hi
        lv = level[ok]
        hi[ok] = self._edge(lv, +1.0)
        lo[ok] = self._edge(lv, -1.0)
        return lo, hi

    def _edge(self, lv, sign):
        far = self.arg + sign * 2 * self.window
        res = np.full(len(lv), sign * math.inf)
        open_ = self.f(np.full(len(lv), far)) >= lv
        todo = ~open_
        a = np.full(todo.sum(), self.arg)
        b = np.full(todo.sum(), far)
        lt = lv[todo]
        n_iter = int(math.ceil(math.log2(2 * self.window / self.tol))) + 1
        for _ in range(n_iter):
            mid = 0.5 * (a + b)
            inside = self.f(mid) >= lt
            a = np.where(inside, mid, a)
            b = np.where(inside, b, mid)
        res[todo] = 0.5 * (a + b)
        return res


class Hypograph(ConvexBody):
    """``{(y, z) in R^(n-1) x R : z <= psi(y)}`` for a concave ``psi``.

    ``psi`` maps arrays of shape ``(m, n-1)`` to ``(m,)`` with values in the
    extended reals.  A :class:`MinAffine` ``psi`` makes the body an exact
    polyhedron.
    """

    def __init__(self, psi, dim: int, breakpoints=None, source: ConvexBody | None = None,
                 label: str = "hypograph"):
        if dim < 2:
            raise ValueError("hypographs live in dimension >= 2")
        self.psi = psi
        self.dim = dim
        self.label = label
        self._poly = psi.hypograph_polytope() if isinstance(psi, MinAffine) else None
        self._bps = None if breakpoints is None else np.asarray(breakpoints, dtype=float)
        self._profile = None
        if source is not None:
            self._set_depth(source)

    def psi_at(self, Y) -> np.ndarray:
        return np.asarray(self.psi(np.asarray(Y, dtype=float).reshape(-1, self.dim - 1)), dtype=float)

    def contains(self, X):
        X = as_points(X, self.dim)
        return X[:, -1] <= self.psi_at(X[:, :-1])

    def profile(self) -> _ConcaveProfile:
        if self._profile is None:
            self._profile = _ConcaveProfile(lambda s: self.psi_at(np.asarray(s).reshape(-1, 1)))
        return self._profile

    def slice(self, X, v):
        if self._poly is not None:
            return self._poly.slice(X, v)
        X = as_points(X, self.dim)
        v = np.asarray(v, dtype=float)
        en = basis(self.dim - 1, self.dim)
        if _same_dir(v, en) or _same_dir(v, -en):
            top = self.psi_at(X[:, :-1]) - X[:, -1]
            empty = top == -math.inf
            lo = np.where(empty, math.inf, -math.inf)
            hi = np.where(empty, -math.inf, top)
            return (lo, hi) if v[-1] > 0 else (-hi, -lo)
        if self.dim == 2 and (_same_dir(v, [1.0, 0.0]) or _same_dir(v, [-1.0, 0.0])):
            lo, hi = self.profile().superlevel(X[:, 1])
            empty = lo > hi
            lo, hi = lo - X[:, 0], hi - X[:, 0]
            if v[0] < 0:
                lo, hi = -hi, -lo
            return np.where(empty, math.inf, lo), np.where(empty, -math.inf, hi)
        return bisection_slice(self, X, v)

    def fiber_breakpoints(self, v):
        if self.dim != 2:
            return np.empty(0)
        if self._poly is not None:
            return self._poly.fiber_breakpoints(v)
        if _same_dir(v, [0.0, 1.0]) and self._bps is not None:
            return self._bps
        if _same_dir(v, [1.0, 0.0]):
            # heights where the superlevel endpoints kink
            pts = [self.profile().max]
            if self._bps is not None and len(self._bps):
                pts.extend(self.psi_at(-self._bps.reshape(-1, 1)))
            pts = np.asarray(pts, dtype=float)
            return pts[np.isfinite(pts)]
        return np.empty(0)

    def as_polytope(self):
        return self._poly

    def support(self, u):
        if self._poly is not None:
            return self._poly.support(u)
        return _numeric_support(self, u)

    def describe(self):
        return f"{self.label}(dim={self.dim})"


class PlanarHypograph(ConvexBody):
    """``L_theta = {(x, z) : x <= theta(z)}`` for concave ``theta``.

    ``monotone`` records that ``theta`` is non-increasing.
    """

    dim = 2

    def __init__(self, theta, monotone: bool = False, breakpoints=None,
                 source: ConvexBody | None = None, label: str = "planar_hypograph"):
        self.theta = theta
        self.monotone = monotone
        self.label = label
        self._poly = theta.hypograph_polytope() if isinstance(theta, PiecewiseLinearConcave) else None
        if breakpoints is None and isinstance(theta, PiecewiseLinearConcave):
            breakpoints = theta.breakpoints
        self._bps = None if breakpoints is None else np.asarray(breakpoints, dtype=float)
        self._profile = None
        if source is not None:
            self._set_depth(source)

    def theta_at(self, z) -> np.ndarray:
        return np.asarray(self.theta(np.asarray(z, dtype=float)), dtype=float)

    def contains(self, X):
        X = as_points(X, 2)
        return X[:, 0] <= self.theta_at(X[:, 1])

    def fiber_direction(self):
        return np.array([1.0, 0.0])

    def profile(self) -> _ConcaveProfile:
        if self._profile is None:
            self._profile = _ConcaveProfile(self.theta_at)
        return self._profile

    def slice(self, X, v):
        if self._poly is not None:
            return self._poly.slice(X, v)
        X = as_points(X, 2)
        v = np.asarray(v, dtype=float)
        if _same_dir(v, [1.0, 0.0]) or _same_dir(v, [-1.0, 0.0]):
            top = self.theta_at(X[:, 1]) - X[:, 0]
            empty = top == -math.inf
            lo = np.where(empty, math.inf, -math.inf)
            hi = np.where(empty, -math.inf, top)
            return (lo, hi) if v[0] > 0 else (-hi, -lo)
        if _same_dir(v, [0.0, 1.0]) or _same_dir(v, [0.0, -1.0]):
            lo, hi = self.profile().superlevel(X[:, 0])
            empty = lo > hi
            lo, hi = lo - X[:, 1], hi - X[:, 1]
            if v[1] < 0:
                lo, hi = -hi, -lo
            return np.where(empty, math.inf, lo), np.where(empty, -math.inf, hi)
        return bisection_slice(self, X, v)

    def left_derivative(self, z: float, h: float = 1e-6) -> float:
        if hasattr(self.theta, "left_derivative"):
            return self.theta.left_derivative(z)
        a, b = self.theta_at(np.array([z - h, z]))
        return float((b - a) / h)

    def fiber_breakpoints(self, v):
        if self._poly is not None:
            return self._poly.fiber_breakpoints(v)
        if _same_dir(v, [1.0, 0.0]) and self._bps is not None:
            return self._bps
        return np.empty(0)

    def as_polytope(self):
        return self._poly

    def support(self, u):
        if self._poly is not None:
            return self._poly.support(u)
        return _numeric_support(self, u)

    def describe(self):
        return self.label


# ---------------------------------------------------------------------------
# wrappers

class Translate(ConvexBody):
    def __init__(self, body: ConvexBody, t):
        self.base = body
        self.t = np.asarray(t, dtype=float)
        self.dim = body.dim
        self._set_depth(body)

    def contains(self, X):
        return self.base.contains(as_points(X, self.dim) - self.t)

    def slice(self, X, v):
        return self.base.slice(as_points(X, self.dim) - self.t, v)

    def fiber_direction(self):
        return self.base.fiber_direction()

    def fiber_breakpoints(self, v):
        bp = self.base.fiber_breakpoints(v)
        return bp + self.t @ perp(unit(v)) if self.dim == 2 else bp

    def support(self, u):
        return self.base.support(u) + float(np.dot(self.t, u))

    def as_polytope(self):
        P = self.base.as_polytope()
        return None if P is None else P.translate(self.t)

    def describe(self):
        return f"({self.base.describe()} + {self.t.tolist()})"


class LinearImage(ConvexBody):
    """Image ``{Q x : x in body}`` under an orthogonal matrix ``Q``."""

    def __init__(self, body: ConvexBody, Q, label: str = "rotate"):
        self.base = body
        self.Q = np.asarray(Q, dtype=float)
        self.dim = body.dim
        self.label = label
        self._det = float(np.sign(np.linalg.det(self.Q)))
        self._set_depth(body)

    def contains(self, X):
        return self.base.contains(as_points(X, self.dim) @ self.Q)

    def slice(self, X, v):
        return self.base.slice(as_points(X, self.dim) @ self.Q, np.asarray(v, float) @ self.Q)

    def fiber_direction(self):
        return self.Q @ self.base.fiber_direction()

    def fiber_breakpoints(self, v):
        bp = self.base.fiber_breakpoints(np.asarray(v, float) @ self.Q)
        return self._det * bp if self.dim == 2 else bp

    def support(self, u):
        return self.base.support(np.asarray(u, float) @ self.Q)

    def as_polytope(self):
        P = self.base.as_polytope()
        return None if P is None else HPolytope(P.A @ self.Q.T, P.b, P.tol)

    def describe(self):
        return f"{self.label}({self.base.describe()})"


class MinkowskiSegment(ConvexBody):
    """``K + [-u, u]``."""

    def __init__(self, body: ConvexBody, u):
        self.base = body
        self.u = np.asarray(u, dtype=float)
        self.r = float(np.linalg.norm(self.u))
        self.uhat = unit(self.u)
        self.dim = body.dim
        self._set_depth(body)

    def contains(self, X):
        lo, hi = self.base.slice(as_points(X, self.dim), self.uhat)
        return (lo <= hi) & (lo <= self.r) & (hi >= -self.r)

    def slice(self, X, v):
        v = np.asarray(v, dtype=float)
        if _same_dir(v, self.uhat) or _same_dir(v, -self.uhat):
            lo, hi = self.base.slice(X, v)
            empty = lo > hi
            return np.where(empty, lo, lo - self.r), np.where(empty, hi, hi + self.r)
        return bisection_slice(self, X, v)

    def fiber_direction(self):
        return self.uhat

    def fiber_breakpoints(self, v):
        if _same_dir(v, self.uhat):
            return self.base.fiber_breakpoints(v)
        return np.empty(0)

    def support(self, u):
        return self.base.support(u) + abs(float(np.dot(self.u, u)))

    def describe(self):
        return f"({self.base.describe()} + [-u,u], u={self.u.tolist()})"


class MinkowskiBall(ConvexBody):
    """``K + eps B_2^2`` for a planar polyhedral ``K``."""

    dim = 2

    def __init__(self, body: ConvexBody, eps: float):
        if body.dim != 2:
            raise ValueError("minkowski_ball is planar")
        if eps <= 0:
            raise ValueError("eps must be positive")
        P = body.as_polytope()
        if P is None:
            raise TypeError("minkowski_ball needs a polyhedral body")
        self.base = body
        self.poly = P
        self.eps = float(eps)
        self._edges = planar_edges(P)
        self._set_depth(body)

    def distance(self, X) -> np.ndarray:
        X = as_points(X, 2)
        inside = self.poly.contains(X)
        p, d, tlo, thi = self._edges
        if len(p) == 0:
            return np.where(inside, 0.0, math.inf)
        rel = X[:, None, :] - p[None, :, :]
        t = np.clip(np.einsum("mkj,kj->mk", rel, d), tlo, thi)
        diff = rel - t[:, :, None] * d[None, :, :]
        dist = np.min(np.linalg.norm(diff, axis=2), axis=1)
        return np.where(inside, 0.0, dist)

    def contains(self, X):
        return self.distance(X) <= self.eps

    def slice(self, X, v):
        # the body is K plus one capsule per edge; being convex, its trace on
        # a line is the hull of the traces of those pieces
        X = as_points(X, 2)
        v = unit(v)
        lo, hi = self.poly.slice(X, v)
        p, d, tlo, thi = self._edges
        if len(p) == 0:
            return lo, hi
        nrm = np.stack([-d[:, 1], d[:, 0]], axis=1)
        rel = p[None, :, :] - X[:, None, :]            # m x k x 2
        # rectangles p + s d + tau n, s in [tlo, thi], |tau| <= eps
        a_lo, a_hi = np.full(rel.shape[:2], -math.inf), np.full(rel.shape[:2], math.inf)
        for axis, (c0, c1) in ((d, (tlo, thi)), (nrm, (-self.eps, self.eps))):
            slope = axis @ v
            off = -np.einsum("mkj,kj->mk", rel, axis)
            with np.errstate(divide="ignore", invalid="ignore"):
                t0 = (c0 - off) / slope
                t1 = (c1 - off) / slope
            flat = np.abs(slope) < 1e-15
            inside = (off >= c0) & (off <= c1)
            a_lo = np.maximum(a_lo, np.where(flat, np.where(inside, -math.inf, math.inf),
                                             np.minimum(t0, t1)))
            a_hi = np.minimum(a_hi, np.where(flat, np.where(inside, math.inf, -math.inf),
                                             np.maximum(t0, t1)))
        empty = a_lo > a_hi
        a_lo[empty], a_hi[empty] = math.inf, -math.inf
        # endpoint disks
        for t_end in (tlo, thi):
            c = rel + (t_end[:, None] * d)[None, :, :]
            tc = c @ v
            h2 = self.eps ** 2 - (np.einsum("mkj,mkj->mk", c, c) - tc ** 2)
            h = np.sqrt(np.maximum(h2, 0.0))
            ok = h2 >= 0
            a_lo = np.minimum(a_lo, np.where(ok, tc - h, math.inf))
            a_hi = np.maximum(a_hi, np.where(ok, tc + h, -math.inf))
        hit = lo <= hi
        lo = np.minimum(np.where(hit, lo, math.inf), a_lo.min(axis=1))
        hi = np.maximum(np.where(hit, hi, -math.inf), a_hi.max(axis=1))
        return lo, hi

    def fiber_direction(self):
        return self.base.fiber_direction()

    def fiber_breakpoints(self, v):
        p = perp(unit(v))
        V = self.poly.vertices()
        if len(V) == 0:
            return np.empty(0)
        A = self.poly.A
        pts = []
        for vert in V:
            act = np.abs(A @ vert - self.poly.b) <= 1e-9 * (1 + np.abs(self.poly.b))
            for a in A[act]:
                pts.append((vert + self.eps * a) @ p)
            pts.extend([vert @ p - self.eps, vert @ p + self.eps])
        return np.asarray(pts)

    def support(self, u):
        return self.base.support(u) + self.eps * float(np.linalg.norm(u))

    def as_polytope(self):
        return None

    def describe(self):
        return f"({self.base.describe()} + {self.eps:.12g} B2)"


# ---------------------------------------------------------------------------
# public operations

def slice_interval(body: ConvexBody, base, direction) -> Interval:
    """Exact (or bisection-resolved) ``{t : base + t * direction in body}``."""
    direction = unit(direction)
    lo, hi = body.slice(np.asarray(base, float).reshape(1, -1), direction)
    if lo[0] > hi[0]:
        return EMPTY
    return Interval(float(lo[0]), float(hi[0]))


def support_function(body: ConvexBody, beta: float) -> float:
    """``h_body(cos beta, sin beta)`` for a planar body (``+inf`` if unbounded)."""
    if body.dim != 2:
        raise ValueError("support_function is planar")
    return float(body.support(np.array([math.cos(beta), math.sin(beta)])))


def inclusion_check(A: ConvexBody, B: ConvexBody, directions, tol: float = 1e-9):
    """Test ``A subset B`` through support functions on a grid of angles.

    Returns ``(True, None)`` or ``(False, beta)`` with the first violating
    angle.
    """
    for beta in np.asarray(directions, dtype=float):
        ha = support_function(A, beta)
        hb = support_function(B, beta)
        if ha == -math.inf or hb == math.inf:
            continue
        if ha == math.inf or ha > hb + tol:
            return False, float(beta)
    return True, None


def minkowski_segment(body: ConvexBody, u) -> ConvexBody:
    u = np.asarray(u, dtype=float)
    if not np.any(u):
        return body
    return MinkowskiSegment(body, u)


def minkowski_ball(body: ConvexBody, eps: float) -> MinkowskiBall:
    return MinkowskiBall(body, eps)


# ---------------------------------------------------------------------------
# JSON

def _ext(x) -> float:
    if isinstance(x, str):
        return float(x.replace("infinity", "inf"))
    if x is None:
        return -math.inf
    return float(x)


def theta_from_json(obj: dict) -> PiecewiseLinearConcave:
    if obj.get("kind") != "piecewise_linear":
        raise ValueError(f"unsupported theta kind {obj.get('kind')!r}")
    knots = obj["knots"]
    left = float(obj.get("left_slope", 0.0))
    if "right_value" in obj:
        rv = _ext(obj["right_value"])
        if rv == -math.inf:
            return PiecewiseLinearConcave(knots, left, cutoff=True)
        K = np.asarray(knots, float).reshape(-1, 2)
        last = float(K[np.argmax(K[:, 0]), 1])
        if abs(rv - last) > 1e-12:
            raise ValueError("a finite right_value must equal the last knot value")
        return PiecewiseLinearConcave(knots, left, right_slope=0.0)
    rs = obj.get("right_slope")
    return PiecewiseLinearConcave(knots, left, right_slope=None if rs is None else float(rs))


def body_from_json(obj: dict) -> ConvexBody:
    """Build a body from its JSON description (normals are normalized)."""
    kind = obj.get("type")
    if kind == "hpolytope":
        P = HPolytope(obj["normals"], obj["offsets"])
        if "dim" in obj and int(obj["dim"]) != P.dim:
            raise ValueError("dim does not match the normals")
        return P
    if kind == "halfspace":
        return Halfspace(obj["normal"], float(obj["offset"]))
    if kind == "planar_hypograph":
        theta = theta_from_json(obj["theta"])
        return PlanarHypograph(theta, monotone=theta.is_nonincreasing())
    if kind == "box":
        return box(obj["lo"], obj["hi"])
    if kind == "regular_polygon":
        return regular_polygon(float(obj.get("radius", 1.0)), int(obj.get("facets", 256)),
                               obj.get("center", (0.0, 0.0)))
    raise ValueError(f"unknown body type {kind!r}")


def load_body(path) -> ConvexBody:
    with open(path) as fh:
        return body_from_json(json.load(fh))
