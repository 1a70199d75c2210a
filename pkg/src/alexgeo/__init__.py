"""Desk-scale checkers for curvature bounded below by -1.

Hyperbolic geometry in the hyperboloid model, metric doubles of strictly
convex plane bodies, singular cone charts, Alexandrov triangle-comparison
checkers, volume-growth-entropy estimation, and sphere-valued kernel
embeddings with their pointwise metric bounds.
"""

from .hyperboloid import (
    HPoint,
    HTangent,
    HIsometry,
    ComparisonTriangle,
    angle,
    ball_volume,
    build_triangle,
    comparison_angle,
    dist,
    exp_map,
    geodesic_point,
    log_map,
    opposite_side,
    reflect_across_geodesic,
    sample_ball,
)
from .spaces import GeodesicOracle, HyperbolicSpace, QuadratureSet
from .double import (
    BallBody,
    ConvexBody,
    DoublePoint,
    DoubledSpace,
    DoubledStrip,
    ReflectedPath,
    TubeBody,
    boundary_angle,
    double_distance,
    double_geodesic,
    make_ball_body,
    make_neighborhood_body,
)
from .cone import (
    ConeChart,
    ConeSurfaceSpec,
    cone_area,
    cone_distance_arr,
    cone_witness_triangle,
)
from .comparison import (
    AngleLimit,
    ComparisonReport,
    QuadConfig,
    alexandrov_lemma_check,
    angle_via_limit,
    check_adjacent_angles,
    check_angle_condition,
    check_point_comparison,
    equivalence_probe,
    sample_triangle,
)
from .entropy import (
    EntropyEstimate,
    entropy_analytic,
    entropy_estimate,
    kernel_norm_closed_form,
)
from .embedding import (
    EmbeddingConfig,
    EmbeddedMetricReport,
    RadialStretch,
    SampledFunction,
    distance_gradient_check,
    embedded_volume,
    induced_metric,
    kernel_map,
    lipschitz_probe,
    pushforward_isometry_check,
    spherical_volume_reference,
)

__version__ = "0.1.0"
