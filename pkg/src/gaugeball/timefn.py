"""Maximal and minimal time functions and the two minimax objectives.

``max_time(F, Q, x)`` is the smallest ``t`` with ``Q`` inside ``x + tF``;
``min_time(F, Q, x)`` is the smallest ``t`` with ``x + tF`` touching ``Q``.
Both are returned as :class:`TimeValue` records carrying a witness point of
``Q`` and a subgradient of the time function with respect to ``x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import ConvergenceError, GeometryError
from .gauge import gauge_subgradient, gauge_value, project, support, support_point
from .sets import EuclideanBall, Halfspace, PointCloud, VPolytope

ACTIVE_RTOL = 1e-9
ASCENT_TOL = 1e-12
ASCENT_MAX_ITER = 20_000
BISECTION_RTOL = 1e-14
GROWTH_MAX_STEPS = 200
NEWTON_MAX_ITER = 100


@dataclass
class TimeValue:
    """Value of a time function at ``x`` with its witness in ``Q``.

    ``subgradient`` is a subgradient of ``x -> C_F(x; Q)`` (resp.
    ``T_F(x; Q)``) at ``x``; for a point-cloud intersection target it is a
    subgradient of the active piece only, since that function is not convex.
    """

    value: float
    witness: np.ndarray
    attained: bool = True
    subgradient: np.ndarray | None = None


@dataclass
class ObjectiveValue:
    value: float
    active_indices: tuple
    per_target: list = field(default_factory=list)

    @property
    def subgradient(self):
        if not self.active_indices:
            return None
        return self.per_target[self.active_indices[0]].subgradient


def _point(F, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (F.dim,):
        raise GeometryError(f"point of shape {x.shape} does not match dimension {F.dim}")
    return x


def _check_target(F, Q):
    if Q.dim != F.dim:
        raise GeometryError(f"target dimension {Q.dim} does not match gauge dimension {F.dim}")


# -- maximal time -------------------------------------------------------------------

def max_time(F, Q, x):
    """Maximal time function ``C_F(x; Q) = sup{rho_F(w - x) : w in Q}``."""
    x = _point(F, x)
    _check_target(F, Q)
    if not Q.bounded:
        raise GeometryError(f"maximal time is infinite for the unbounded target kind {Q.kind!r}")
    if isinstance(Q, (PointCloud, VPolytope)):
        vals = gauge_value(F, Q.points - x)
        j = int(np.argmax(vals))
        w = Q.points[j].copy()
        value = float(vals[j])
    elif isinstance(Q, EuclideanBall):
        value, w = _ball_max_time(F, Q, x)
    else:
        raise GeometryError(f"unsupported target kind {Q.kind!r}")
    return TimeValue(value, w, True, -gauge_subgradient(F, w - x))


def _unit_e1(d):
    e = np.zeros(d)
    e[0] = 1.0
    return e


def _ball_max_time(F, Q, x):
    c, s = Q.center, Q.radius
    diff = c - x
    if F.kind == "euclidean":
        n = float(np.linalg.norm(diff))
        u = diff / n if n > 0 else _unit_e1(F.dim)
        return n + s, c + s * u
    if F.kind == "hpolytope":
        R = F.rows
        norms = np.linalg.norm(R, axis=1)
        scores = R @ diff + s * norms
        j = int(np.argmax(scores))
        return max(0.0, float(scores[j])), c + s * R[j] / norms[j]
    if s == 0:
        return float(gauge_value(F, diff)), c.copy()
    u = _ellipsoid_ascent(F.matrix, diff, s)
    w = c + s * u
    return float(gauge_value(F, w - x)), w


def _spread_directions(d):
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        ang = 2 * np.pi * np.arange(8) / 8
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if d == 3:
        corners = np.array([[a, b, c] for a in (1, -1) for b in (1, -1) for c in (1, -1)], dtype=float)
        return corners / math.sqrt(3)
    return np.vstack([np.eye(d), -np.eye(d)])


def _ellipsoid_ascent(A, diff, s):
    """Maximize ``(diff + s u)^T A (diff + s u)`` over the unit sphere.

    Projected gradient ascent with an unbounded step, i.e. ``u <- A(diff+su)``
    normalized; this is monotone for a convex quadratic.
    """
    starts = list(_spread_directions(len(diff)))
    Ad = A @ diff
    if np.any(Ad):
        starts.append(Ad / np.linalg.norm(Ad))
    best_u, best_val = None, -np.inf
    for u in starts:
        for _ in range(ASCENT_MAX_ITER):
            g = A @ (diff + s * u)
            n = np.linalg.norm(g)
            if n == 0:
                break
            u_new = g / n
            if np.linalg.norm(u_new - u) < ASCENT_TOL:
                u = u_new
                break
            u = u_new
        z = diff + s * u
        val = float(z @ A @ z)
        if val > best_val:
            best_u, best_val = u, val
    return best_u


def farthest_projection(F, Q, x, tol=1e-9):
    """Vertices of ``Q`` whose gauge distance from ``x`` is within ``tol`` of the maximum."""
    x = _point(F, x)
    if not isinstance(Q, (PointCloud, VPolytope)):
        raise GeometryError(f"unsupported kind {Q.kind!r} for farthest_projection")
    vals = gauge_value(F, Q.points - x)
    return [Q.points[j].copy() for j in np.nonzero(vals >= vals.max() - tol)[0]]


# -- minimal time ---------------------------------------------------------------------

def min_time(F, Q, x):
    """Minimal time function ``T_F(x; Q) = inf{rho_F(q - x) : q in Q}``."""
    x = _point(F, x)
    _check_target(F, Q)
    zero = np.zeros(F.dim)
    if isinstance(Q, PointCloud):
        vals = gauge_value(F, Q.points - x)
        j = int(np.argmin(vals))
        w = Q.points[j].copy()
        return TimeValue(float(vals[j]), w, True, -gauge_subgradient(F, w - x))
    if isinstance(Q, Halfspace):
        a = Q.normal
        excess = float(a @ x) - Q.offset
        if excess <= 0:
            return TimeValue(0.0, x.copy(), True, zero)
        h = support(F, -a)
        t = excess / h
        w = Q.project(x + t * support_point(F, -a))
        return TimeValue(t, w, True, a / h)
    if isinstance(Q, EuclideanBall):
        v = x - Q.center
        n = float(np.linalg.norm(v))
        if n <= Q.radius:
            return TimeValue(0.0, x.copy(), True, zero)
        if F.kind == "euclidean":
            return TimeValue(n - Q.radius, Q.center + v * (Q.radius / n), True, v / n)
        return _ball_min_time(F, Q, x)
    if isinstance(Q, VPolytope):
        return _vpolytope_min_time(F, Q, x)
    raise GeometryError(f"unsupported target kind {Q.kind!r}")


def _ball_min_time(F, Q, x):
    """Smallest ``t`` with ``dist(c, x + tF) <= s``.

    ``D(t) = dist(c, x + tF)`` is convex and decreasing with slope
    ``-h_F(u)`` (``u`` the unit direction from the nearest point to ``c``),
    so Newton steps from ``t = 0`` increase monotonically to the root.  Each
    step lands on a lower bound; bisection takes over if Newton stalls.
    """
    c, s = Q.center, Q.radius
    rel = c - x

    def closest(t):
        return x + project(F, rel, t)

    t = 0.0
    for _ in range(NEWTON_MAX_ITER):
        p = closest(t)
        n = c - p
        dist = float(np.linalg.norm(n))
        if dist <= s * (1.0 + 1e-15):
            break
        u = n / dist
        t_new = (float(u @ rel) - s) / support(F, u)
        if t_new <= t + 1e-15 * (1.0 + t):
            break
        t = t_new
    else:
        return _ball_min_time_bisect(F, Q, x, t)
    p = closest(t)
    if np.linalg.norm(p - c) > s * (1.0 + 1e-12) + 1e-15:
        return _ball_min_time_bisect(F, Q, x, t)
    return _ball_time_value(F, Q, x, p)


def _ball_time_value(F, Q, x, p):
    c = Q.center
    w = Q.project(p)
    n = c - w
    g = -n / support(F, n) if np.linalg.norm(n) > 0 else -gauge_subgradient(F, w - x)
    return TimeValue(float(gauge_value(F, w - x)), w, True, g)


def _ball_min_time_bisect(F, Q, x, lo=0.0):
    """Bisection on ``t`` for the predicate ``dist(c, x + tF) <= s``."""
    c, s = Q.center, Q.radius
    rel = c - x

    def closest(t):
        return x + project(F, rel, t)

    hi = max(1.0, 2.0 * lo)
    p_hi = closest(hi)
    steps = 0
    while np.linalg.norm(p_hi - c) > s:
        lo, hi = hi, 2.0 * hi
        p_hi = closest(hi)
        steps += 1
        if steps > GROWTH_MAX_STEPS:
            raise ConvergenceError("could not bracket the minimal time")
    while hi - lo > BISECTION_RTOL * (1.0 + hi):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        p = closest(mid)
        if np.linalg.norm(p - c) <= s:
            hi, p_hi = mid, p
        else:
            lo = mid
    return _ball_time_value(F, Q, x, p_hi)


def _vpolytope_min_time(F, Q, x):
    V = Q.points
    if F.kind == "ellipsoid":
        # rho_F(z) = |L z| with A = L^T L: a Euclidean distance after the change of variables.
        L = np.linalg.cholesky(F.matrix).T
        y = L @ x
        img = VPolytope(V @ L.T)
        p = img.project(y)
        dist = float(np.linalg.norm(y - p))
        if dist == 0:
            return TimeValue(0.0, x.copy(), True, np.zeros(F.dim))
        w = np.linalg.solve(L, p)
        return TimeValue(float(gauge_value(F, w - x)), w, True, L.T @ (y - p) / dist)
    p = Q.project(x)
    if np.linalg.norm(p - x) <= 1e-15 * (1.0 + np.linalg.norm(x)):
        return TimeValue(0.0, x.copy(), True, np.zeros(F.dim))
    if F.kind == "euclidean":
        dist = float(np.linalg.norm(x - p))
        return TimeValue(dist, p, True, (x - p) / dist)
    # Polytope gauge: min t  s.t.  R (V^T lam - x) <= t,  sum(lam) = 1,  lam >= 0.
    R = F.rows
    k = len(V)
    c = np.zeros(k + 1)
    c[-1] = 1.0
    A_ub = np.hstack([R @ V.T, -np.ones((len(R), 1))])
    A_eq = np.hstack([np.ones((1, k)), np.zeros((1, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=R @ x, A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * k + [(None, None)], method="highs-ds",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise ConvergenceError(f"minimal-time LP failed: {res.message}")
    lam = np.maximum(res.x[:k], 0.0)
    w = V.T @ (lam / lam.sum())
    g = R.T @ res.ineqlin.marginals
    return TimeValue(float(gauge_value(F, w - x)), w, True, g)


# -- objectives --------------------------------------------------------------------

def _objective(per_target):
    if not per_target:
        return ObjectiveValue(0.0, (), [])
    vals = np.array([tv.value for tv in per_target])
    value = float(vals.max())
    tol = ACTIVE_RTOL * (1.0 + value)
    active = tuple(int(i) for i in np.nonzero(vals >= value - tol)[0])
    return ObjectiveValue(value, active, per_target)


def seb_objective(scene, x):
    """``C(x) = max_i C_F(x; Omega_i)`` for an enclosing-ball scene."""
    return _objective([max_time(scene.gauge, Q, x) for Q in scene.targets])


def sib_objective(scene, x):
    """``T(x) = max_i T_F(x; Omega_i)`` for an intersecting-ball scene."""
    return _objective([min_time(scene.gauge, Q, x) for Q in scene.targets])


def objective(scene, x):
    return seb_objective(scene, x) if scene.problem == "seb" else sib_objective(scene, x)


def seb_subgradient(scene, x):
    obj = seb_objective(scene, x)
    return obj.subgradient if obj.active_indices else np.zeros(scene.dimension)


def sib_subgradient(scene, x):
    obj = sib_objective(scene, x)
    if not obj.active_indices or obj.value == 0:
        return np.zeros(scene.dimension)
    return obj.subgradient
