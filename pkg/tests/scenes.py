"""Seeded random scene generators shared by the test modules."""
import numpy as np

from gaugeball.gauge import GaugeBody
from gaugeball.scene_io import Scene
from gaugeball.sets import AxisBox, EuclideanBall, Halfspace, PointCloud, VPolytope, WholeSpace


def random_constraint(rng, d, kind=None):
    kind = kind or rng.choice(["whole_space", "box", "ball"])
    if kind == "whole_space":
        return WholeSpace(d)
    if kind == "box":
        lo = rng.uniform(-2.0, 0.0, d)
        return AxisBox(lo, lo + rng.uniform(0.5, 3.0, d))
    return EuclideanBall(rng.uniform(-1.0, 1.0, d), rng.uniform(0.5, 2.0))


def random_seb_scene(rng, d, n_targets=None, constraint=None):
    """Euclidean enclosing-ball scene with point-cloud and ball targets."""
    n = n_targets or int(rng.integers(3, 7))
    targets = []
    for _ in range(n):
        if rng.random() < 0.5:
            targets.append(PointCloud(rng.uniform(-3.0, 3.0, (int(rng.integers(1, 5)), d))))
        else:
            targets.append(EuclideanBall(rng.uniform(-3.0, 3.0, d), rng.uniform(0.1, 1.0)))
    return Scene(d, "seb", GaugeBody.euclidean(d), targets,
                 constraint if constraint is not None else random_constraint(rng, d))


def random_far_balls_scene(rng, d, constraint=None):
    """Euclidean intersecting-ball scene of pairwise far, disjoint balls."""
    n = int(rng.integers(2, 6))
    centers = []
    while len(centers) < n:
        c = rng.uniform(-6.0, 6.0, d)
        if all(np.linalg.norm(c - o) > 3.0 for o in centers):
            centers.append(c)
    targets = [EuclideanBall(c, rng.uniform(0.2, 1.0)) for c in centers]
    return Scene(d, "sib", GaugeBody.euclidean(d), targets,
                 constraint if constraint is not None else random_constraint(rng, d))


def random_gauge(rng, d=2, kind=None):
    kind = kind or rng.choice(["euclidean", "ellipsoid", "hpolytope"])
    if kind == "euclidean":
        return GaugeBody.euclidean(d)
    if kind == "ellipsoid":
        M = rng.normal(size=(d, d))
        return GaugeBody.ellipsoid(M @ M.T + 0.3 * np.eye(d))
    # Random directions plus a simplex frame so the rows positively span.
    frame = np.vstack([np.eye(d), -np.ones((1, d)) / np.sqrt(d)])
    extra = rng.normal(size=(int(rng.integers(0, 5)), d))
    rows = np.vstack([frame, extra])
    rows = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    return GaugeBody.hpolytope(rows * rng.uniform(0.5, 2.0, (len(rows), 1)))


def random_target(rng, d=2, kinds=("points", "ball", "vpolytope", "halfspace")):
    kind = rng.choice(list(kinds))
    if kind == "points":
        return PointCloud(rng.uniform(-3.0, 3.0, (int(rng.integers(1, 4)), d)))
    if kind == "ball":
        return EuclideanBall(rng.uniform(-3.0, 3.0, d), rng.uniform(0.0, 1.5))
    if kind == "vpolytope":
        return VPolytope(rng.uniform(-3.0, 3.0, (int(rng.integers(2, 7)), d)))
    n = rng.normal(size=d)
    return Halfspace(n, rng.uniform(-2.0, 2.0))


BOUNDED = ("points", "ball", "vpolytope")
CONVEX = ("ball", "vpolytope", "halfspace")


def random_mixed_scene(rng, problem, d=2, constraint=None):
    """Random scene with any gauge; SIB targets are convex so T is convex."""
    kinds = BOUNDED if problem == "seb" else CONVEX
    targets = [random_target(rng, d, kinds) for _ in range(int(rng.integers(1, 4)))]
    return Scene(d, problem, random_gauge(rng, d), targets,
                 constraint if constraint is not None else random_constraint(rng, d))
