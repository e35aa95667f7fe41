import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaussvb.bodies import (
    Halfspace, Hypograph, MinAffine, PiecewiseLinearConcave, PlanarHypograph,
    bisection_slice, body_from_json, box, from_vertices, inclusion_check, load_body,
    minkowski_ball, minkowski_combination, minkowski_segment, planar_vertices, regular_polygon,
    slice_interval, support_function, theta_from_json,
)


def test_square_slice_and_membership():
    K = box([-1, -1], [1, 1])
    I = slice_interval(K, [0.0, 0.0], [1.0, 0.0])
    assert (I.lo, I.hi) == (-1.0, 1.0)
    assert slice_interval(K, [0.0, 2.0], [1.0, 0.0]).empty
    assert list(K.contains([[0.5, 0.5], [1.5, 0]])) == [True, False]


def test_halfplane_slice_is_ray():
    H = Halfspace([1, 0], 0.3)
    I = slice_interval(H, [0, 0], [1, 0])
    assert I.lo == -math.inf and I.hi == pytest.approx(0.3)
    # a line parallel to the boundary is either all in or all out
    I = slice_interval(H, [0, 0], [0, 1])
    assert I.lo == -math.inf and I.hi == math.inf


def test_polygon_slice_close_to_disk():
    D = regular_polygon(1.0, 256)
    I = slice_interval(D, [0.6, 0.0], [0.0, 1.0])
    assert I.hi == pytest.approx(0.8, abs=5e-4)
    assert I.lo == pytest.approx(-I.hi, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(0, 2 * math.pi))
def test_membership_consistent_with_slice(x, y, a):
    K = from_vertices([[-1, -1], [1.3, -0.7], [0.4, 1.2], [-0.9, 0.8]])
    d = np.array([math.cos(a), math.sin(a)])
    lo, hi = K.slice(np.array([[x, y]]), d)
    assert bool(K.contains([[x, y]])[0]) == bool(lo[0] <= 0.0 <= hi[0])


def test_bisection_slice_matches_exact():
    K = from_vertices([[-1, -1], [1.3, -0.7], [0.4, 1.2]])
    rng = np.random.default_rng(0)
    X = rng.uniform(-0.5, 0.5, (50, 2))
    v = np.array([0.6, 0.8])
    lo, hi = K.slice(X, v)
    lo2, hi2 = bisection_slice(K, X, v)
    ok = lo <= hi
    assert np.allclose(lo[ok], lo2[ok], atol=1e-9)
    assert np.allclose(hi[ok], hi2[ok], atol=1e-9)


def test_vertices_and_boundedness():
    V = box([-1, -2], [3, 4]).vertices()
    assert len(V) == 4
    assert set(map(tuple, np.round(V, 12))) == {(-1, -2), (3, -2), (3, 4), (-1, 4)}
    assert box([-1, -1], [1, 1]).is_bounded()
    assert not Halfspace([1, 0], 0).is_bounded()
    assert len(regular_polygon(2.0, 40).vertices()) == 40
    assert len(planar_vertices(Halfspace([1, 1], 0))) == 0


def test_support_functions():
    assert support_function(Halfspace([1, 0], 0.3), 0.0) == pytest.approx(0.3)
    assert support_function(Halfspace([1, 0], 0.3), 1.0) == math.inf
    assert support_function(box([-1, -1], [1, 1]), 0.0) == pytest.approx(1.0)
    assert support_function(box([-1, -1], [1, 1]), math.pi / 4) == pytest.approx(math.sqrt(2))
    th = PiecewiseLinearConcave([[0.0, 0.0]], left_slope=-1.0, right_slope=-1.0)
    L = PlanarHypograph(th)  # x <= -z
    assert support_function(L, math.pi / 4) == pytest.approx(0.0, abs=1e-12)
    assert support_function(L, 0.1) == math.inf


def test_minkowski_segment_and_ball():
    K = box([-1, -1], [1, 1])
    S = minkowski_segment(K, [0.5, 0.0])
    I = slice_interval(S, [0, 0], [1, 0])
    assert (I.lo, I.hi) == pytest.approx((-1.5, 1.5))
    assert minkowski_segment(K, [0, 0]) is K
    B = minkowski_ball(K, 0.1)
    assert list(B.contains([[1.05, 0], [1.15, 0], [1.07, 1.07], [1.08, 1.08]])) == [True, False, True, False]
    assert support_function(B, 0.3) == pytest.approx(support_function(K, 0.3) + 0.1)


def test_inclusion_check_witness():
    A = box([-1, -1], [1, 1])
    B = box([-2, -2], [2, 2])
    grid = np.linspace(0, 2 * math.pi, 64, endpoint=False)
    assert inclusion_check(A, B, grid) == (True, None)
    ok, beta = inclusion_check(B, A, grid)
    assert not ok and beta is not None


def test_pl_concave_rejects_convex_knots():
    with pytest.raises(ValueError):
        PiecewiseLinearConcave([[0, 0], [1, 1], [2, 3]], left_slope=0.0)


def test_pl_concave_evaluation_and_derivative():
    th = PiecewiseLinearConcave([[0, 1], [1, 0.5]], left_slope=0.0, right_slope=-2.0)
    assert th(np.array([-5.0, 0.0, 0.5, 1.0, 2.0])) == pytest.approx([1, 1, 0.75, 0.5, -1.5])
    assert th.left_derivative(0.5) == pytest.approx(-0.5)
    assert th.left_derivative(-3) == 0.0
    assert th.is_nonincreasing()


def test_min_affine_hypograph_is_polytope():
    psi = MinAffine([[1.0], [-1.0]], [0.0, 0.0])  # -|y|
    Lam = Hypograph(psi, 2)
    assert Lam.as_polytope() is not None
    assert list(Lam.contains([[0.5, -0.6], [0.5, -0.4]])) == [True, False]


def test_minkowski_combination_endpoints():
    P = box([-1, -1], [1, 1])
    Q = regular_polygon(1.5, 12, center=(0.5, 0.0))
    M0 = minkowski_combination(P, Q, 0.0)
    M1 = minkowski_combination(P, Q, 1.0)
    assert support_function(M0, 0.4) == pytest.approx(support_function(P, 0.4))
    assert support_function(M1, 0.4) == pytest.approx(support_function(Q, 0.4))
    Mh = minkowski_combination(P, Q, 0.5)
    b = 1.1
    assert support_function(Mh, b) == pytest.approx(
        0.5 * support_function(P, b) + 0.5 * support_function(Q, b))


def test_json_round_trip(tmp_path):
    obj = {"type": "hpolytope", "dim": 2, "normals": [[2, 0], [0, 3], [-1, 0], [0, -1]],
            "offsets": [2, 3, 1, 1]}
    p = tmp_path / "b.json"
    p.write_text(json.dumps(obj))
    K = load_body(p)
    assert np.allclose(np.linalg.norm(K.A, axis=1), 1.0)
    assert list(K.contains([[0.9, 0.9], [1.1, 0]])) == [True, False]
    K2 = body_from_json(K.to_json())
    assert np.allclose(K2.A, K.A) and np.allclose(K2.b, K.b)
    with pytest.raises(ValueError):
        body_from_json({"type": "sphere"})


def test_theta_json_cutoff():
    th = theta_from_json({"kind": "piecewise_linear", "knots": [[0, 1], [1, 0]],
                          "left_slope": 0.0, "right_value": "-inf"})
    assert th(np.array([0.5]))[0] == pytest.approx(0.5)
    assert th(np.array([1.5]))[0] == -math.inf
    H = body_from_json({"type": "planar_hypograph", "theta": {
        "kind": "piecewise_linear", "knots": [[0, 0]], "left_slope": -1.0, "right_slope": -1.0}})
    assert isinstance(H, PlanarHypograph)


def test_minkowski_ball_slice_matches_bisection():
    K = from_vertices([[-1, -1], [1.3, -0.7], [0.4, 1.2]])
    B = minkowski_ball(K, 0.3)
    X = np.random.default_rng(1).uniform(-1.5, 1.5, (40, 2))
    for v in ([1.0, 0.0], [0.6, -0.8]):
        lo, hi = B.slice(X, np.array(v))
        lo2, hi2 = bisection_slice(B, X, np.array(v), search_depth=10)
        ok = (lo <= hi) & (lo2 <= hi2)
        assert np.array_equal(lo <= hi, lo2 <= hi2)
        assert np.allclose(lo[ok], lo2[ok], atol=1e-9)
        assert np.allclose(hi[ok], hi2[ok], atol=1e-9)
