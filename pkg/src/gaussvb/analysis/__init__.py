"""Measure estimation, the halfplane inequality, step verifiers and scans."""
from .halfplane import ConeRegion, ScanRow, cone_bound, cone_measure, default_grids, halfplane_delta, lemma_scan
from .measure import DEFAULT_SAMPLES, adaptive_quad, fiber_monte_carlo, measure, planar_quadrature
from .scans import (
    AppendixRow, appendix_scan_rp, ball_delta, s_inequality_bound, slab_delta, sufficient_condition,
)
from .steps import (
    Chain, Comparison, Step2Result, Step3Result, TangentReduction, verify_chain, verify_step1,
    verify_step2, verify_step3,
)
