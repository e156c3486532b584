"""Boolean models with spherical grains and weighted estimators of the radius law."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AssumptionViolatedError,
    BoundsViolationError,
    DivergentWeightError,
    EmptyWindowError,
    InsufficientMarginError,
    SphereGrainsError,
    UnsupportedDimensionError,
    UnsupportedGaugeError,
)
from .geometry import (  # noqa: E402
    AXIS_SEGMENTS,
    GaugeBody,
    LensSpec,
    gauge_distance_to_ball,
    h_B,
    intrinsic_volumes,
    kappa_volume,
    lens_volume,
)
from .model import (  # noqa: E402
    ContactRecord,
    ModelParams,
    RadiusDistribution,
    Realization,
    Window,
    contact,
    contact_field,
    sample_realization,
)
from .emptyspace import (  # noqa: E402
    WeightFunction,
    beta_constant,
    decay_constant_c,
    empty_space_F,
    empty_space_Fbar,
    second_order_F2bar,
)
from .estimators import (  # noqa: E402
    EstimatorConfig,
    Method,
    RadiusSet,
    WeightedRadiusMeasure,
    estimate_edge_corrected,
    estimate_ratio,
    eta_measure,
)
from .arcs import (  # noqa: E402
    ArcDecomposition,
    estimate_limit_linear,
    estimate_limit_linear_combined,
    estimate_limit_spherical,
    visible_arcs,
)
from .distances import cvm_distance, ks_distance  # noqa: E402
from .variance import (  # noqa: E402
    CltReport,
    VarianceResult,
    clt_campaign,
    empirical_variance_curve,
    sigma2,
    sigma_G2,
)

__all__ = [
    "__version__",
    "SphereGrainsError", "UnsupportedDimensionError", "UnsupportedGaugeError", "InsufficientMarginError",
    "EmptyWindowError", "DivergentWeightError", "AssumptionViolatedError", "BoundsViolationError",
    "AXIS_SEGMENTS", "GaugeBody", "LensSpec", "gauge_distance_to_ball", "h_B", "intrinsic_volumes",
    "kappa_volume", "lens_volume",
    "ContactRecord", "ModelParams", "RadiusDistribution", "Realization", "Window", "contact",
    "contact_field", "sample_realization",
    "WeightFunction", "beta_constant", "decay_constant_c", "empty_space_F", "empty_space_Fbar",
    "second_order_F2bar",
    "EstimatorConfig", "Method", "RadiusSet", "WeightedRadiusMeasure", "estimate_edge_corrected",
    "estimate_ratio", "eta_measure",
    "ArcDecomposition", "estimate_limit_linear", "estimate_limit_linear_combined",
    "estimate_limit_spherical", "visible_arcs",
    "cvm_distance", "ks_distance",
    "CltReport", "VarianceResult", "clt_campaign", "empirical_variance_curve", "sigma2", "sigma_G2",
]
