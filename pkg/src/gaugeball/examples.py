"""Built-in scenes with known non-unique solution sets."""
from __future__ import annotations

from .gauge import GaugeBody
from .scene_io import Scene
from .sets import EuclideanBall, Halfspace, PointCloud, Sphere

SQUARE_ROWS = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]


def circle_constraint():
    """Enclosing ball of the origin with centers restricted to the unit circle."""
    return Scene(2, "seb", GaugeBody.euclidean(2), [PointCloud([[0.0, 0.0]])],
                 Sphere([0.0, 0.0], 1.0), name="ex26")


def square_two_points():
    """Max-norm enclosing ball of (0, 1) and (0, -1): centers fill a segment."""
    return Scene(2, "seb", GaugeBody.hpolytope(SQUARE_ROWS),
                 [PointCloud([[0.0, 1.0]]), PointCloud([[0.0, -1.0]])], name="ex27")


def parallel_halfplanes():
    """Euclidean intersecting ball of the halfplanes x2 >= 1 and x2 <= -1."""
    return Scene(2, "sib", GaugeBody.euclidean(2),
                 [Halfspace([0.0, -1.0], -1.0), Halfspace([0.0, 1.0], -1.0)], name="ex34")


def square_two_disks():
    """Max-norm intersecting ball of the unit disks at (0, 2) and (0, -2)."""
    return Scene(2, "sib", GaugeBody.hpolytope(SQUARE_ROWS),
                 [EuclideanBall([0.0, 2.0], 1.0), EuclideanBall([0.0, -2.0], 1.0)], name="ex35")


BUILTIN = {"ex26": circle_constraint, "ex27": square_two_points,
           "ex34": parallel_halfplanes, "ex35": square_two_disks}
