"""Chern and Levi-Civita curvature of Hermitian metrics on local holomorphic
charts, with pointwise and integral verification of curvature identities."""

__version__ = "0.1.0"

from .connection import ConnectionCoeffs, lc_coefficients  # noqa: E402
from .curvature import (  # noqa: E402
    CurvatureBundle,
    Form11,
    chern_curvature,
    chern_ricci,
    chern_scalar,
    curvature_bundle,
    lc_curvature,
    line_bundle_ricci,
)
from .fielddsl import FieldExpr, evaluate, parse  # noqa: E402
from .hodge import (  # noqa: E402
    balanced_residual,
    dbar_star_omega_gamma,
    dbar_star_omega_lambda,
    gauduchon_residual,
    lc_ricci_direct,
    lc_ricci_via_identity,
    pointwise_inner_11,
    second_order_form,
    torsion_form,
)
from .linalg import ChartPoint, invert_hermitian, wirtinger_derivative  # noqa: E402
from .metrics import MetricValue, conformal_rescale, evaluate_metric, parse_metric  # noqa: E402

__all__ = [
    "ChartPoint",
    "ConnectionCoeffs",
    "CurvatureBundle",
    "FieldExpr",
    "Form11",
    "MetricValue",
    "balanced_residual",
    "chern_curvature",
    "chern_ricci",
    "chern_scalar",
    "conformal_rescale",
    "curvature_bundle",
    "dbar_star_omega_gamma",
    "dbar_star_omega_lambda",
    "evaluate",
    "evaluate_metric",
    "gauduchon_residual",
    "invert_hermitian",
    "lc_coefficients",
    "lc_curvature",
    "lc_ricci_direct",
    "lc_ricci_via_identity",
    "line_bundle_ricci",
    "parse",
    "parse_metric",
    "pointwise_inner_11",
    "second_order_form",
    "torsion_form",
    "wirtinger_derivative",
]
