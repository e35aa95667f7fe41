"""Independent reference computations used to derive frozen test values.

Nothing here imports the package under test.  Everything is standard
library math (erfc, Simpson's rule, bisection, enumeration) except the
hit-or-miss sampler, which draws its points with numpy.
"""
import itertools
import math

import numpy as np


def phi_erfc(t):
    return 0.5 * math.erfc(-t / math.sqrt(2.0))


def phi_simpson(t, lo=-8.5, panels=20000):
    """Gaussian CDF by composite Simpson on [lo, t]."""
    if t <= lo:
        return 0.0
    h = (t - lo) / panels
    s = 0.0
    for k in range(panels + 1):
        x = lo + k * h
        w = 1 if k in (0, panels) else (4 if k % 2 else 2)
        s += w * math.exp(-0.5 * x * x)
    return s * h / 3.0 / math.sqrt(2.0 * math.pi)


def bisect(f, lo, hi, tol=1e-14, iters=200):
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def phi_inv_bisect(p):
    return bisect(lambda t: phi_erfc(t) - p, -40.0, 40.0)


def psi_ref(x):
    return math.erf(x / math.sqrt(2.0))


def w_ref(r):
    p = psi_ref(r)
    return -phi_inv_bisect(p)


def lambda0_ref():
    return bisect(lambda l: 2 + math.exp(-l * l / 2) - l * math.sqrt(2 * math.pi), 0.5, 2.0)


def r0_ref():
    lam = lambda0_ref()
    return bisect(lambda r: w_ref(r) - r - lam, 0.05, 0.3)


def hit_or_miss(contains, dim, n, seed):
    """Plain Monte Carlo: fraction of Gaussian points accepted by ``contains``."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, dim))
    hits = contains(X)
    m = hits.mean()
    return m, 3.0 * math.sqrt(m * (1 - m) / n)


def enumerate_min(U, norm):
    """Exhaustive search over sign vectors, itertools order (+1 first)."""
    best, arg = math.inf, None
    for eps in itertools.product((1, -1), repeat=len(U)):
        s = [sum(e * u[j] for e, u in zip(eps, U)) for j in range(len(U[0]))]
        v = norm(s)
        if v < best - 1e-12:
            best, arg = v, eps
    return best, arg


def _simpson(f, a, b, panels):
    if b <= a:
        return 0.0
    h = (b - a) / panels
    tot = 0.0
    for k in range(panels + 1):
        w = 1 if k in (0, panels) else (4 if k % 2 else 2)
        tot += w * f(a + k * h)
    return tot * h / 3.0


def halfplane_delta_ref(alpha, d, r, panels=4000, span=12.0):
    """gamma(H o r e_2) - gamma(H) by Simpson over the vertical fibers, split
    where the fiber mass crosses p_r (located by bisection)."""
    c, s = math.cos(alpha), math.sin(alpha)
    p = psi_ref(r)
    dens = lambda x: math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    top = lambda x: (d - c * x) / s
    x0 = bisect(lambda x: phi_erfc(top(x)) - p, -60.0, 60.0)
    x0 = min(max(x0, -span), span)
    kept = _simpson(lambda x: (phi_erfc(top(x) + r) - phi_erfc(top(x))) * dens(x), -span, x0, panels)
    lost = _simpson(lambda x: phi_erfc(top(x)) * dens(x), x0, span, panels)
    return kept - lost
