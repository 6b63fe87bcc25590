"""Barycenters, Wasserstein-1 transport, and Fubini-defect inequalities on CAT(0) targets."""

from .spaces import (
    Euclidean,
    Hyperboloid,
    MetricTree,
    ProductSpace,
    Space,
    SpaceMismatchError,
    TangentVector,
    TreePoint,
    UnsupportedSpaceError,
    cat0_midpoint_defect,
    distance,
    exp_map,
    geodesic_point,
    log_map,
    reshetnyak_defect,
    tripod,
)
from .measures import (
    DiscreteMeasure,
    InvalidMeasureError,
    InvalidMetricError,
    MMSpace,
    MapTable,
    ProductMMSpace,
    moment,
    product_mm,
    pushforward,
)
from .barycenter import (
    BarycenterResult,
    NonConvergenceError,
    barycenter,
    distance_jensen_defect,
    frechet_value,
    generic_barycenter_crosscheck,
    tangent_mean_residual,
    variance_defect,
)
from .transport import (
    CertificateError,
    Coupling,
    DualPotential,
    barycenter_contraction_defect,
    dual_certificate,
    w1,
)

__version__ = "0.1.0"
