import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaussvb.gauss import (
    GaussianSampler, MeasureEstimate, bisect, interval_mass, interval_quantile, lemma_constants,
    mills_bound, mills_tail, phi, phi_inv, psi, psi_inv, radius_derived,
)

import oracles

# frozen from oracles.phi_erfc / phi_simpson / phi_inv_bisect
PHI_1 = 0.8413447460685429
PHI_INV_0975 = 1.959963984540054
LAMBDA0 = 1.0320924871159098
R0 = 0.14934084352758886
W_SEVENTH = 1.2076186366639563


def test_phi_frozen_values():
    assert phi(1.0) == pytest.approx(PHI_1, abs=1e-15)
    assert phi(0.0) == 0.5
    assert phi(-math.inf) == 0.0 and phi(math.inf) == 1.0


def test_phi_matches_simpson_oracle():
    for t in (-3.0, -1.0, 0.3, 2.5):
        assert phi(t) == pytest.approx(oracles.phi_simpson(t), abs=1e-12)


def test_phi_inv_frozen_and_extremes():
    assert phi_inv(0.975) == pytest.approx(PHI_INV_0975, abs=1e-12)
    assert phi_inv(0.5) == 0.0
    assert phi_inv(0.0) == -math.inf
    assert phi_inv(1.0) == math.inf
    assert phi_inv(1e-17) == -math.inf


@pytest.mark.parametrize("p", [-0.1, 1.5, float("nan")])
def test_phi_inv_rejects_bad_probability(p):
    with pytest.raises(ValueError):
        phi_inv(p)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-8.0, max_value=8.0))
def test_phi_inv_round_trip(t):
    # above 0 the probability is stored next to 1, where doubles are spaced
    # 1.1e-16 apart; that spacing divided by the density bounds the error
    tol = 1e-10 if t <= 0 else 1e-10 + 4 * 1.2e-16 / (math.exp(-t * t / 2) / math.sqrt(2 * math.pi))
    assert phi_inv(phi(t)) == pytest.approx(t, abs=tol)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-8, max_value=8), st.floats(min_value=0, max_value=3))
def test_phi_monotone(t, h):
    assert phi(t + h) >= phi(t)


def test_phi_inv_against_bisection_oracle():
    for p in (1e-10, 0.01, 0.3, 0.77, 0.999999):
        assert phi_inv(p) == pytest.approx(oracles.phi_inv_bisect(p), abs=1e-9)


def test_psi_and_inverse():
    assert psi(0.0) == 0.0
    assert psi(1.0) == pytest.approx(oracles.psi_ref(1.0), abs=1e-15)
    assert psi_inv(psi(0.7)) == pytest.approx(0.7, abs=1e-12)
    assert psi_inv(1.0) == math.inf
    assert psi_inv(0.5) == pytest.approx(0.6744897501960817, abs=1e-12)


def test_interval_mass_tail_precision():
    # far right tail: plain differences of phi would round to 0
    m = interval_mass(9.0, 10.0)
    assert m > 0
    ref = 0.5 * math.erfc(9 / math.sqrt(2)) - 0.5 * math.erfc(10 / math.sqrt(2))
    assert m == pytest.approx(ref, rel=1e-10)
    assert interval_mass(1.0, 0.0) == 0.0


def test_interval_quantile_of_ray_is_endpoint():
    assert interval_quantile(-math.inf, 6.5) == pytest.approx(6.5, abs=1e-8)
    assert interval_quantile(-math.inf, -2.0) == pytest.approx(-2.0, abs=1e-10)
    assert interval_quantile(1.0, 0.0) == -math.inf


def test_mills_tail_and_bound():
    assert mills_tail(1.0) == pytest.approx(0.15865525393145707, abs=1e-15)
    assert mills_bound(1.0) == pytest.approx(0.24197072451914337, abs=1e-15)
    assert mills_tail(0.5) == pytest.approx(0.3085375387259869, abs=1e-15)
    assert mills_bound(0.5) == pytest.approx(0.704130653528599, abs=1e-14)
    with pytest.raises(ValueError):
        mills_tail(0.0)
    with pytest.raises(ValueError):
        mills_bound(-1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=1e-3, max_value=30))
def test_mills_bound_dominates_tail(A):
    assert mills_tail(A) <= mills_bound(A)


def test_radius_derived():
    d = radius_derived(1 / 7)
    assert d.w == pytest.approx(W_SEVENTH, abs=1e-10)
    assert d.p == pytest.approx(oracles.psi_ref(1 / 7), abs=1e-15)
    z = radius_derived(0.0)
    assert z.p == 0.0 and z.w == math.inf
    with pytest.raises(ValueError):
        radius_derived(-0.1)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=1e-4, max_value=3.0), st.floats(min_value=1e-4, max_value=1.0))
def test_w_decreasing_in_r(r, h):
    assert radius_derived(r + h).w <= radius_derived(r).w


def test_lemma_constants_frozen():
    c = lemma_constants()
    assert c.lambda0 == pytest.approx(LAMBDA0, abs=1e-10)
    assert c.r0 == pytest.approx(R0, abs=1e-9)
    assert 1 / 7 < c.r0


def test_bisect_errors_without_sign_change():
    with pytest.raises(ValueError):
        bisect(lambda x: x * x + 1, -1, 1)
    assert bisect(lambda x: x - 0.25, 0, 1) == pytest.approx(0.25, abs=1e-11)


def test_measure_estimate_validation():
    with pytest.raises(ValueError):
        MeasureEstimate(0.5, 0.0, "guess")
    e = MeasureEstimate.from_samples(np.array([0.0, 1.0, 1.0, 0.0]))
    assert e.value == 0.5 and e.method == "monte_carlo" and e.samples == 4


def test_sampler_chunk_invariance_and_seed():
    a = GaussianSampler(5, 3).draw(1000)
    s = GaussianSampler(5, 3)
    b = np.vstack([s.draw(300), s.draw(700)])
    assert np.array_equal(a, b)
    assert not np.array_equal(a, GaussianSampler(6, 3).draw(1000))
    kids = GaussianSampler(5, 3).spawn(2)
    assert not np.array_equal(kids[0].draw(10), kids[1].draw(10))
