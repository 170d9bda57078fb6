"""Brute-force ground truth for scenes in dimension <= 3.

Nothing here calls :mod:`gaugeball.timefn`.  The radius at a point is
recovered from the set-inclusion / set-intersection definitions by bisection
on ``t``, and grid minimization evaluates the objective through support
functions on stacked sample directions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar

from .errors import GeometryError
from .gauge import gauge_membership, gauge_value
from .sets import EuclideanBall, Halfspace, PointCloud, VPolytope

BISECTION_WIDTH = 1e-9
MAX_DIM = 3
_CHUNK = 4_000_000


@dataclass
class GridSpec:
    lo: np.ndarray
    hi: np.ndarray
    resolution: int = 201
    refinement_rounds: int = 3

    def __post_init__(self):
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise ValueError("lo and hi must be vectors of the same length")
        if not np.all(self.lo < self.hi):
            raise ValueError("grid box needs lo < hi on every axis")
        if self.resolution < 3:
            raise ValueError("resolution must be >= 3")
        if self.refinement_rounds < 0:
            raise ValueError("refinement_rounds must be >= 0")


def _check_dim(scene):
    if scene.dimension > MAX_DIM:
        raise GeometryError(f"oracle supports dimension <= {MAX_DIM}, got {scene.dimension}")


# -- support functions ---------------------------------------------------------------

def _gauge_support(F, U):
    """``h_F`` on the rows of ``U``."""
    if F.kind == "euclidean":
        return np.linalg.norm(U, axis=-1)
    if F.kind == "ellipsoid":
        W = np.linalg.solve(F.matrix, U.T).T
        return np.sqrt(np.maximum(np.einsum("ij,ij->i", U, W), 0.0))
    return np.max(U @ F.vertices.T, axis=-1)


def _target_support(Q, U):
    if isinstance(Q, EuclideanBall):
        return U @ Q.center + Q.radius * np.linalg.norm(U, axis=-1)
    return np.max(U @ Q.points.T, axis=-1)


# -- sample directions ---------------------------------------------------------------

def _unit_rows(X):
    X = np.asarray(X, dtype=float)
    n = np.linalg.norm(X, axis=-1, keepdims=True)
    return X[n[:, 0] > 0] / n[n[:, 0] > 0]


def _sphere_samples(d, k):
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        a = 2.0 * np.pi * np.arange(k) / k
        return np.column_stack([np.cos(a), np.sin(a)])
    i = np.arange(k) + 0.5
    phi = np.arccos(1.0 - 2.0 * i / k)
    theta = np.pi * (1.0 + math.sqrt(5.0)) * i
    return np.column_stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)])


def _critical_directions(F, Q):
    """Directions where the support functions switch vertex, both signs."""
    dirs = []
    if F.kind == "hpolytope":
        dirs.append(F.rows)
    if isinstance(Q, VPolytope) and Q.dim == 2 and len(Q.points) >= 2:
        H = Q.hull
        E = np.roll(H, -1, axis=0) - H
        dirs.append(np.column_stack([E[:, 1], -E[:, 0]]))
    if not dirs:
        return np.zeros((0, F.dim))
    D = _unit_rows(np.vstack(dirs))
    return np.vstack([D, -D])


# -- set-inclusion radius (enclosing) --------------------------------------------------

def _ellipsoid_ball_sup(A, v, s):
    """``max sqrt((v + s u)^T A (v + s u))`` over unit ``u``, via the secular equation.

    Stationarity gives ``(mu I - s^2 A) w = b`` in the eigenbasis of ``A``
    with ``b = s Q^T A v`` and ``mu >= s^2 lambda_max`` at the global
    maximizer; ``|w| = 1`` fixes ``mu``.  When no such ``mu`` exists (the
    hard case) the top eigen-direction absorbs the remaining norm.
    """
    lam, Q = np.linalg.eigh(A)
    b = s * (Q.T @ (A @ v))
    k = s * s * lam
    top = k[-1]
    gap = top - k
    free = gap <= 1e-12 * max(top, 1e-300)

    def excess(mu):
        return float(np.sum((b / (mu - k)) ** 2)) - 1.0

    partial = np.where(free, 0.0, b / np.where(free, 1.0, gap))
    if np.all(np.abs(b[free]) <= 1e-13 * (1.0 + np.abs(b).max())) and np.sum(partial ** 2) <= 1.0:
        w = partial.copy()
        w[np.argmax(free)] = math.sqrt(max(0.0, 1.0 - float(np.sum(partial ** 2))))
    else:
        lo = top + 1e-15 * max(1.0, top)
        hi = top + float(np.linalg.norm(b)) + 1.0
        mu = brentq(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500) \
            if excess(lo) > 0 else lo
        w = b / (mu - k)
        w /= np.linalg.norm(w)
    z = v + s * (Q @ w)
    return math.sqrt(max(float(z @ A @ z), 0.0))


def _ball_sup(F, B, x):
    """Largest gauge distance from ``x`` to a point of the ball ``B``."""
    v = B.center - x
    if F.kind == "euclidean":
        return float(np.linalg.norm(v)) + B.radius
    if F.kind == "hpolytope":
        norms = np.linalg.norm(F.rows, axis=1)
        return max(0.0, float(np.max(F.rows @ v + B.radius * norms)))
    if B.radius == 0:
        return float(gauge_value(F, v))
    return _ellipsoid_ball_sup(F.matrix, v, B.radius)


def _encloses(scene, x, t):
    F = scene.gauge
    for Q in scene.targets:
        if isinstance(Q, (PointCloud, VPolytope)):
            if not all(gauge_membership(F, w - x, t) for w in Q.points):
                return False
        elif _ball_sup(F, Q, x) > t + 1e-12 * (1.0 + t):
            return False
    return True


# -- set-intersection radius ------------------------------------------------------------

def _separation(F, Q, x, t):
    """``max_u [-h_Q(-u) - <u, x> - t h_F(u)]`` over unit ``u``: the gap between the sets."""
    d = F.dim
    if isinstance(Q, Halfspace):
        a = Q.normal
        na = float(np.linalg.norm(a))
        return (float(a @ x) - Q.offset - t * float(_gauge_support(F, -a[None, :])[0])) / na

    def gap(U):
        return -_target_support(Q, -U) - U @ x - t * _gauge_support(F, U)

    if d == 1:
        return float(gap(np.array([[1.0], [-1.0]])).max())
    U = np.vstack([_sphere_samples(d, 4096 if d == 2 else 6000), _critical_directions(F, Q)])
    g = gap(U)
    best = float(g.max())
    if d == 2:
        ang = np.arctan2(U[:, 1], U[:, 0])
        step = 2.0 * np.pi / 4096
        for i in np.argsort(g)[-3:]:
            res = minimize_scalar(lambda a: -gap(np.array([[math.cos(a), math.sin(a)]]))[0],
                                  bounds=(ang[i] - step, ang[i] + step), method="bounded",
                                  options={"xatol": 1e-13})
            best = max(best, -float(res.fun))
        return best
    for i in np.argsort(g)[-3:]:
        res = minimize(lambda u: -gap(_unit_rows(u[None, :]))[0], U[i], method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
        best = max(best, -float(res.fun))
    return best


def _intersects(scene, x, t):
    F = scene.gauge
    for Q in scene.targets:
        if isinstance(Q, PointCloud):
            if not any(gauge_membership(F, w - x, t) for w in Q.points):
                return False
        elif _separation(F, Q, x, t) > 1e-12 * (1.0 + t):
            return False
    return True


def feasibility_radius(scene, x):
    """Smallest ``t`` for which ``x + tF`` encloses (SEB) or meets (SIB) every target.

    Bisection on the definitional predicate; the bracket is grown from
    ``t = 1`` and the midpoint is returned once its width is below 1e-9.
    """
    _check_dim(scene)
    x = np.asarray(x, dtype=float)
    pred = _encloses if scene.problem == "seb" else _intersects
    if pred(scene, x, 0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while not pred(scene, x, hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise GeometryError("could not bracket the radius")
    while hi - lo > BISECTION_WIDTH:
        mid = 0.5 * (lo + hi)
        if pred(scene, x, mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# -- batched objective -----------------------------------------------------------------

def _chunks(P, per_point):
    size = max(1, _CHUNK // max(1, per_point))
    for i in range(0, len(P), size):
        yield P[i:i + size]


def batch_objective(scene, P):
    """Objective at every row of ``P`` (sampled where no closed form is used)."""
    F, d = scene.gauge, scene.dimension
    P = np.atleast_2d(np.asarray(P, dtype=float))
    out = np.full(len(P), -np.inf)
    for Q in scene.targets:
        vals = np.empty(len(P))
        pos = 0
        if scene.problem == "seb":
            if isinstance(Q, (PointCloud, VPolytope)):
                pts = Q.points
            elif F.kind == "ellipsoid":
                pts = Q.center + Q.radius * _sphere_samples(d, 2048 if d == 2 else 8000)
            else:
                pts = None
            for C in _chunks(P, 1 if pts is None else len(pts)):
                if pts is None:
                    v = _closed_ball_sup(F, Q, C)
                else:
                    v = gauge_value(F, pts[None, :, :] - C[:, None, :]).max(axis=1)
                vals[pos:pos + len(C)] = v
                pos += len(C)
        elif isinstance(Q, PointCloud):
            for C in _chunks(P, len(Q.points)):
                vals[pos:pos + len(C)] = gauge_value(F, Q.points[None, :, :] - C[:, None, :]).min(axis=1)
                pos += len(C)
        elif isinstance(Q, EuclideanBall) and F.kind == "euclidean":
            vals = np.maximum(0.0, np.linalg.norm(P - Q.center, axis=1) - Q.radius)
        elif isinstance(Q, Halfspace):
            h = float(_gauge_support(F, -Q.normal[None, :])[0])
            vals = np.maximum(0.0, P @ Q.normal - Q.offset) / h
        else:
            # T(x) = max over directions v of (<v, x> - h_Q(v)) / h_F(-v).
            U = np.vstack([_sphere_samples(d, 4096 if d == 2 else 6000), -_critical_directions(F, Q)])
            hq = _target_support(Q, U)
            hf = _gauge_support(F, -U)
            for C in _chunks(P, len(U)):
                vals[pos:pos + len(C)] = np.maximum(0.0, ((C @ U.T - hq) / hf).max(axis=1))
                pos += len(C)
        out = np.maximum(out, vals)
    return out


def _closed_ball_sup(F, B, C):
    V = B.center - C
    if F.kind == "euclidean":
        return np.linalg.norm(V, axis=1) + B.radius
    norms = np.linalg.norm(F.rows, axis=1)
    return np.maximum(0.0, (V @ F.rows.T + B.radius * norms).max(axis=1))


def _grid_points(lo, hi, res):
    axes = [np.linspace(a, b, res) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def grid_minimize(scene, grid, exact_final=True):
    """Minimize the objective over grid points projected onto the constraint set.

    Each refinement round re-grids a box 10x smaller around the incumbent.
    With ``exact_final`` the returned value is :func:`feasibility_radius` at
    the best point; otherwise it is the batched (sampled) value.
    """
    _check_dim(scene)
    lo, hi = grid.lo.copy(), grid.hi.copy()
    best_p, best_v = None, math.inf
    for _ in range(grid.refinement_rounds + 1):
        X = _grid_points(lo, hi, grid.resolution)
        P = scene.constraint.project_many(X)
        vals = batch_objective(scene, P)
        ok = np.isfinite(vals)
        if not ok.any():
            if best_p is None:
                raise GeometryError("no feasible grid point")
            break
        i = int(np.argmin(np.where(ok, vals, np.inf)))
        if vals[i] < best_v:
            best_p, best_v = P[i].copy(), float(vals[i])
        half = (hi - lo) / 20.0
        lo, hi = best_p - half, best_p + half
    if exact_final:
        best_v = feasibility_radius(scene, best_p)
    return best_p, best_v
