"""Conformal prediction ellipsoids for multivariate regression residuals."""

from confellip.conformal import (
    Ball,
    CalibrationSet,
    Ellipsoid,
    EmptyRegion,
    FlooredEllipsoid,
    FullSpace,
    apply_volume_floor,
    ball_region,
    build_score_machinery,
    ccle_region,
    conformal_quantile,
    exact_region_membership,
    fit_ccle,
    region_metrics,
)
from confellip.errors import ConfEllipError
from confellip.kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Ball",
    "CalibrationSet",
    "ConfEllipError",
    "Ellipsoid",
    "EmptyRegion",
    "FlooredEllipsoid",
    "FullSpace",
    "apply_volume_floor",
    "ball_region",
    "build_score_machinery",
    "ccle_region",
    "conformal_quantile",
    "exact_region_membership",
    "fit_ccle",
    "region_metrics",
]
