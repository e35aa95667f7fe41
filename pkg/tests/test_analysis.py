import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaussvb.analysis import (
    ConeRegion, appendix_scan_rp, ball_delta, cone_bound, cone_measure, default_grids,
    halfplane_delta, lemma_scan, measure, s_inequality_bound, slab_delta, sufficient_condition,
    verify_step1, verify_step2, verify_step3,
)
from gaussvb.analysis.corpus import random_min_affine, random_pl_concave, random_polytope
from gaussvb.analysis.measure import adaptive_quad
from gaussvb.bodies import (
    Halfspace, Hypograph, PiecewiseLinearConcave, PlanarHypograph, box, regular_polygon,
)
from gaussvb.gauss import phi, psi, psi_inv
from gaussvb.transforms import circ_transform

import oracles

SQUARE = 0.4660649426743922          # Psi(1)^2 from the erf oracle
CUBE = 0.31817763901728086           # Psi(1)^3
CUBE4_T = 0.668164246830736          # Psi(sqrt(2 log 4))^4
DELTA_12 = 0.0528466178565            # halfplane_delta_ref(1.2, 0, 1/7)
DELTA_PI4 = 0.0234895312295           # halfplane_delta_ref(pi/4, 0.5, 0.1)
S_BOUND = 0.4760566955825573          # Psi(2 Psi^{-1}(0.25))


# -- measure ------------------------------------------------------------
def test_measure_halfplane_exact():
    e = measure(Halfspace([1, 0], 0.0))
    assert e.value == 0.5 and e.method == "exact" and e.error == 0.0


def test_measure_square_quadrature():
    e = measure(box([-1, -1], [1, 1]))
    assert e.method == "quadrature"
    assert abs(e.value - SQUARE) <= 1e-12 + e.error


def test_measure_cube_monte_carlo():
    e = measure(box([-1, -1, -1], [1, 1, 1]), samples=400_000)
    assert e.method == "monte_carlo"
    assert abs(e.value - CUBE) <= e.error


def test_measure_scaled_cube_dim4():
    t = math.sqrt(2 * math.log(4))
    e = measure(box([-t] * 4, [t] * 4), samples=400_000)
    assert e.value >= 0.5
    assert abs(e.value - CUBE4_T) <= e.error


def test_measure_matches_hit_or_miss():
    K = random_polytope(np.random.default_rng(3), 2)
    ref, err = oracles.hit_or_miss(K.contains, 2, 1_000_000, seed=9)
    e = measure(K)
    assert abs(e.value - ref) <= err + e.error
    K3 = random_polytope(np.random.default_rng(4), 3)
    ref, err = oracles.hit_or_miss(K3.contains, 3, 1_000_000, seed=9)
    e = measure(K3, samples=200_000)
    assert abs(e.value - ref) <= err + e.error


def test_measure_of_transform_against_oracle():
    K = random_polytope(np.random.default_rng(8), 2)
    T = circ_transform(K, [0.1, 0.1])
    ref, err = oracles.hit_or_miss(T.contains, 2, 1_000_000, seed=3)
    e = measure(T)
    assert abs(e.value - ref) <= err + e.error


def test_measure_errors():
    with pytest.raises(ValueError):
        measure(box([-1] * 3, [1] * 3), method="quadrature")
    with pytest.raises(ValueError):
        measure(box([-1, -1], [1, 1]), method="exact")
    with pytest.raises(ValueError):
        measure(box([-1, -1], [1, 1]), method="simpson")
    with pytest.raises(ValueError):
        measure(box([-1] * 9, [1] * 9))


def test_monte_carlo_reproducible():
    K = box([-1] * 3, [1] * 3)
    a = measure(K, samples=50_000, seed=4)
    assert a == measure(K, samples=50_000, seed=4)
    b = measure(K, samples=50_000, seed=4, workers=3)
    assert b == measure(K, samples=50_000, seed=4, workers=3)
    assert abs(a.value - b.value) <= a.error + b.error


def test_adaptive_quad_handles_jump():
    f = lambda x: np.where(x < 0.3, 1.0, 0.0) * np.exp(-x * x / 2) / math.sqrt(2 * math.pi)
    val, err = adaptive_quad(f, -8.5, 8.5, breaks=[])
    assert val == pytest.approx(phi(0.3), abs=1e-9)
    val2, _ = adaptive_quad(f, -8.5, 8.5, breaks=[0.3])
    assert val2 == pytest.approx(phi(0.3), abs=1e-14)


# -- halfplane and cone -------------------------------------------------
def test_cone_trivial_cases():
    assert cone_measure(ConeRegion(0.7, 0.5, 0.0)) == (0.0, 0.0)
    assert cone_measure(ConeRegion(0.0, 0.5, 0.1)) == (0.0, 0.0)


def test_cone_below_closed_form_bound():
    c = ConeRegion(math.pi / 4, 0.5, 0.1)
    val, err = cone_measure(c)
    assert err < 1e-10
    assert 0 < val <= cone_bound(c)


def test_cone_membership_matches_measure():
    c = ConeRegion(1.0, 0.3, 0.14)
    ref, err = oracles.hit_or_miss(c.contains, 2, 2_000_000, seed=1)
    assert abs(cone_measure(c)[0] - ref) <= err


def test_halfplane_delta_boundary_cases():
    assert halfplane_delta(0.0, 1.3, 0.1)[0] == 0.0
    d, r = 0.7, 0.12
    assert halfplane_delta(math.pi / 2, d, r)[0] == pytest.approx(phi(d + r) - phi(d), abs=1e-15)


def test_halfplane_delta_frozen_values():
    assert halfplane_delta(1.2, 0.0, 1 / 7)[0] == pytest.approx(DELTA_12, abs=1e-11)
    assert halfplane_delta(math.pi / 4, 0.5, 0.1)[0] == pytest.approx(DELTA_PI4, abs=1e-11)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.1, 1.4), st.floats(0.0, 3.0), st.floats(0.01, 0.6))
def test_halfplane_delta_against_simpson_oracle(a, d, r):
    assert halfplane_delta(a, d, r)[0] == pytest.approx(oracles.halfplane_delta_ref(a, d, r), abs=1e-8)


def test_halfplane_delta_against_measured_transform():
    for a, d, r in [(0.4, 0.2, 0.1), (1.1, 1.0, 0.3)]:
        H = Halfspace([math.cos(a), math.sin(a)], d)
        direct = measure(circ_transform(H, [0, r])).value - phi(d)
        assert halfplane_delta(a, d, r)[0] == pytest.approx(direct, abs=1e-10)


def test_extended_scan_finds_negative_delta():
    rows = lemma_scan(np.linspace(0.05, 1.5, 12), np.arange(0, 6, 0.5), np.linspace(0.15, 0.9, 6))
    assert any(r.status == "violation" for r in rows)
    assert {r.status for r in rows} <= {"ok", "within_tolerance", "violation"}


def test_sufficient_condition_window():
    _, _, grid_r = default_grids()
    assert all(sufficient_condition(float(r))[2] for r in grid_r)
    lhs, rhs, ok = sufficient_condition(0.16)
    assert not ok and lhs > rhs


def test_s_inequality_bound():
    assert s_inequality_bound(0.3, 1.0) == pytest.approx(0.3)
    x1 = psi_inv(0.5)
    assert s_inequality_bound(psi(x1), 1.0) == pytest.approx(0.5)
    assert s_inequality_bound(0.25, 2.0) == pytest.approx(S_BOUND, abs=1e-14)
    for bad in [(0.0, 2.0), (1.0, 2.0), (0.5, 0.5)]:
        with pytest.raises(ValueError):
            s_inequality_bound(*bad)


def test_slab_and_ball_deltas():
    a = psi_inv(0.25)
    assert slab_delta(a, 0.9 * a) > 0
    assert slab_delta(a, 1.1 * a) < 0
    R = 1.3
    P = regular_polygon(R, 1024)
    direct = measure(circ_transform(P, [0, 0.3])).value - measure(P).value
    assert ball_delta(2, R, 0.3) == pytest.approx(direct, abs=1e-6)


def test_appendix_scan_examples():
    rows = appendix_scan_rp([0.25, 0.5, 0.999], np.arange(0, 31) * 0.05,
                            ball_dims=(2, 100, 1000))
    by_p = {row.p: row for row in rows}
    assert by_p[0.5].threshold >= 1 / 7
    assert by_p[0.999].threshold <= 1.0 + 0.05
    assert by_p[0.25].r_slab <= psi_inv(0.25)
    assert by_p[0.5].shape_exponent == 0.0


# -- steps --------------------------------------------------------------
def test_step1_equality_for_hypograph():
    Lam = Hypograph(random_min_affine(np.random.default_rng(2), 1), 2)
    c = verify_step1(Lam, 1 / 7)
    assert abs(c.gap) <= c.error + 1e-9


@pytest.mark.parametrize("K,r", [(box([-1, -1], [1, 1]), 0.1), (regular_polygon(1.3, 128), 1 / 7)])
def test_step1_inequality(K, r):
    assert verify_step1(K, r).holds()


def test_step1_three_dimensional():
    K = random_polytope(np.random.default_rng(6), 3)
    c = verify_step1(K, 1 / 7, samples=200_000)
    assert c.holds()


def test_step2_identity_random_hypographs():
    rng = np.random.default_rng(10)
    for _ in range(3):
        res = verify_step2(Hypograph(random_min_affine(rng, 1), 2), 1 / 7)
        assert res.holds()


def test_step3_horizontal_halfplane():
    L = PlanarHypograph(lambda z: np.where(np.asarray(z) <= 0.3, math.inf, -math.inf),
                        monotone=True, breakpoints=[0.3])
    res = verify_step3(L, 1 / 7)
    assert res.case == "horizontal"
    assert res.H.offset == pytest.approx(0.3, abs=1e-8)
    assert res.holds()


def test_step3_slope_minus_one():
    th = PiecewiseLinearConcave([[0.0, 0.5]], left_slope=-1.0, right_slope=-1.0)
    res = verify_step3(PlanarHypograph(th, monotone=True), 1 / 7)
    assert res.case == "tangent"
    assert res.reduction.alpha == pytest.approx(math.pi / 4)
    assert res.reduction.check()
    assert res.holds()


def test_step3_random_profiles_and_cone_comparison():
    rng = np.random.default_rng(12)
    done = 0
    while done < 5:
        th = random_pl_concave(rng, monotone=True)
        L = PlanarHypograph(th, monotone=True)
        if measure(L).value < 0.5:
            continue
        res = verify_step3(L, 1 / 7)
        assert res.holds()
        if res.case == "tangent":
            red = res.reduction
            assert red.check()
            assert red.a1 >= 0
            cL = cone_measure(ConeRegion(red.alpha, red.D, 1 / 7))[0]
            cH = cone_measure(ConeRegion(red.alpha, red.d, 1 / 7))[0]
            assert cL <= cH + 1e-12
        done += 1


def test_step3_excluded_case():
    # theta is -inf from z = -3 on, so the body is light and theta(-w_r) = -inf
    th = PiecewiseLinearConcave([[-3.0, 0.0]], left_slope=0.0, cutoff=True)
    L = PlanarHypograph(th, monotone=True)
    with pytest.raises(ValueError):
        verify_step3(L, 1 / 7)
