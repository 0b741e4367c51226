"""Elastic shape analysis of Euclidean curves.

Three frameworks are available for comparing curves modulo translation,
scale, rotation and reparametrization:

- the square-root velocity function (SRVF),
- the unparametrized Frenet curvatures (theta),
- the square-root curvature transform (SRC), which pairs the square-root
  speed with ``sqrt(sdot) theta / sqrt(|theta|)``.
"""

from .errors import (
    AntipodalPoints,
    DegenerateCovarianceWarning,
    DegenerateCurve,
    EstimationError,
    GridTooCoarse,
    LogBranch,
    NonMonotoneWarp,
    NotFrenetCurve,
    PositivityViolated,
    RankDeficient,
    ShapeError,
    SingularFit,
    VanishingCurvature,
    WindowTooSmall,
    ZeroSpeed,
)
from .estimation import EstimationConfig, FrenetCurvatures, estimate_pipeline
from .geom_core import ArcLength, DiscreteCurve, FrenetPath, Warping, normalize, uniform_grid
from .registration import dp_warp, register_src, register_srvf
from .representations import src_inverse, src_transform, srvf_inverse, srvf_transform
from .shape_analysis import (
    geodesic,
    pairwise_matrix,
    shape_distance,
    shape_distance_src,
    shape_distance_srvf,
    shape_distance_theta,
)
from .synth import from_curvatures, helix3d, peak_loop, peak_loop_set, spiral2d

__version__ = "0.1.0"

__all__ = [
    "AntipodalPoints",
    "ArcLength",
    "DegenerateCovarianceWarning",
    "DegenerateCurve",
    "DiscreteCurve",
    "EstimationConfig",
    "EstimationError",
    "FrenetCurvatures",
    "FrenetPath",
    "GridTooCoarse",
    "LogBranch",
    "NonMonotoneWarp",
    "NotFrenetCurve",
    "PositivityViolated",
    "RankDeficient",
    "ShapeError",
    "SingularFit",
    "VanishingCurvature",
    "Warping",
    "WindowTooSmall",
    "ZeroSpeed",
    "dp_warp",
    "estimate_pipeline",
    "from_curvatures",
    "geodesic",
    "helix3d",
    "normalize",
    "pairwise_matrix",
    "peak_loop",
    "peak_loop_set",
    "register_src",
    "register_srvf",
    "shape_distance",
    "shape_distance_src",
    "shape_distance_srvf",
    "shape_distance_theta",
    "spiral2d",
    "src_inverse",
    "src_transform",
    "srvf_inverse",
    "srvf_transform",
    "uniform_grid",
]
