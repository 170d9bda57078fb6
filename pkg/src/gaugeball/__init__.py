"""Smallest enclosing and intersecting balls under a Minkowski gauge."""
from .errors import ConvergenceError, GeometryError, SceneError
from .gauge import (GaugeBody, gauge_membership, gauge_subgradient, gauge_value, project,
                    support, support_point)
from .oracle import GridSpec, feasibility_radius, grid_minimize
from .scene_io import Scene, emit_scene, emit_solution, parse_scene, parse_solution, render_svg
from .sets import (AxisBox, EuclideanBall, Halfspace, HPolytopeSet, PointCloud, Sphere, VPolytope,
                   WholeSpace, constraint_project, constraint_violation, euclid_project,
                   support_value, vertices)
from .solver import (CertificateReport, Solution, SolverConfig, UniquenessReport, certify,
                     check_degeneracy, solve, uniqueness_probe)
from .timefn import (ObjectiveValue, TimeValue, farthest_projection, max_time, min_time, objective,
                     sib_objective, sib_subgradient, seb_objective, seb_subgradient)

__version__ = "0.1.0"

__all__ = [
    "AxisBox",
    "CertificateReport",
    "ConvergenceError",
    "EuclideanBall",
    "GaugeBody",
    "GeometryError",
    "GridSpec",
    "HPolytopeSet",
    "Halfspace",
    "ObjectiveValue",
    "PointCloud",
    "Scene",
    "SceneError",
    "Solution",
    "SolverConfig",
    "Sphere",
    "TimeValue",
    "UniquenessReport",
    "VPolytope",
    "WholeSpace",
    "certify",
    "check_degeneracy",
    "constraint_project",
    "constraint_violation",
    "emit_scene",
    "emit_solution",
    "euclid_project",
    "farthest_projection",
    "feasibility_radius",
    "gauge_membership",
    "gauge_subgradient",
    "gauge_value",
    "grid_minimize",
    "max_time",
    "min_time",
    "objective",
    "parse_scene",
    "parse_solution",
    "project",
    "render_svg",
    "seb_objective",
    "seb_subgradient",
    "sib_objective",
    "sib_subgradient",
    "solve",
    "support",
    "support_point",
    "support_value",
    "uniqueness_probe",
    "vertices",
]
