"""Gaussian measure monotonicity under Banaszczyk-type transforms, with
vector balancing experiments built on top."""
__version__ = "0.1.0"

from .gauss import (
    GaussianSampler, MeasureEstimate, lemma_constants, mills_bound, mills_tail, phi, phi_inv, psi,
    psi_inv, radius_derived,
)
from .bodies import (
    Halfspace, HPolytope, Hypograph, PlanarHypograph, PiecewiseLinearConcave, body_from_json, box,
    inclusion_check, load_body, minkowski_ball, minkowski_segment, regular_polygon, slice_interval,
    support_function,
)
from .transforms import (
    circ_transform, ehrhard_E, ehrhard_E2, hypograph_shift, planar_T_r, rotate_to_axis,
    star_transform,
)
from .analysis import measure
