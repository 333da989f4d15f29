"""Collision probability between polygonal agents with Gaussian pose uncertainty."""

from .checker import (
    CheckerConfig,
    CollisionResult,
    check_all_pairs,
    check_pair,
    check_trajectory,
    ellipse_prefilter,
    radius_prefilter,
)
from .geometry import Polygon2D, Pose2D, collision_indicator, place, point_in_polygon, polygons_intersect
from .scenario import Agent, GeneratorSpec, Scenario, generate, load_scenario, save_scenario
from .sigma import build_sigma_tree, cut_at_orders, gauss_hermite_set, monte_carlo_set, unscented_set
from .uncertainty import GaussianPose, GaussianTrajectory, RelativeGaussian, relative_distribution

__all__ = [
    "Agent",
    "CheckerConfig",
    "CollisionResult",
    "GaussianPose",
    "GaussianTrajectory",
    "GeneratorSpec",
    "Polygon2D",
    "Pose2D",
    "RelativeGaussian",
    "Scenario",
    "build_sigma_tree",
    "check_all_pairs",
    "check_pair",
    "check_trajectory",
    "collision_indicator",
    "cut_at_orders",
    "ellipse_prefilter",
    "gauss_hermite_set",
    "generate",
    "load_scenario",
    "monte_carlo_set",
    "place",
    "point_in_polygon",
    "polygons_intersect",
    "radius_prefilter",
    "relative_distribution",
    "save_scenario",
    "unscented_set",
]
