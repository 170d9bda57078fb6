"""Target sets and constraint sets.

Targets (the sets to enclose or intersect):
    PointCloud, EuclideanBall, VPolytope, Halfspace
Constraints (where the center may live):
    WholeSpace, EuclideanBall, AxisBox, HPolytopeSet, Sphere

Every set works in R^d with the Euclidean inner product and exposes the
oracles the time functions and the solver need: support values, Euclidean
projections, vertex lists and bounding boxes.
"""
from __future__ import annotations

import math
from functools import cached_property

import numpy as np
from scipy.optimize import linprog

from .errors import ConvergenceError, GeometryError

DYKSTRA_TOL = 1e-12
DYKSTRA_MAX_SWEEPS = 100_000


def _vec(x, name="x"):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise GeometryError(f"{name} must be a non-empty 1-D vector")
    if not np.all(np.isfinite(x)):
        raise GeometryError(f"{name} has non-finite entries")
    return x


def _mat(X, name):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise GeometryError(f"{name} must be a non-empty list of vectors")
    if not np.all(np.isfinite(X)):
        raise GeometryError(f"{name} has non-finite entries")
    return X


class _Set:
    kind = ""
    bounded = True
    convex = True
    _fields: tuple = ()

    def _check_dim(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dim,):
            raise GeometryError(f"{self.kind}: vector of shape {x.shape} does not match dimension {self.dim}")
        return x

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        return all(np.array_equal(np.asarray(getattr(self, f)), np.asarray(getattr(other, f)))
                   for f in self._fields)

    def __hash__(self):
        return hash((self.kind, self.dim))

    def __repr__(self):
        args = ", ".join(f"{f}={np.asarray(getattr(self, f)).tolist()!r}" for f in self._fields)
        return f"{type(self).__name__}({args})"

    def project_many(self, X):
        X = self._check_dim(X)
        return np.array([self.project(x) for x in X]).reshape(X.shape)

    def distance(self, x):
        x = self._check_dim(x)
        return float(np.linalg.norm(x - self.project(x)))


# -- targets -----------------------------------------------------------------

class PointCloud(_Set):
    """A finite set of points (non-convex when it has two or more points)."""

    kind = "points"
    _fields = ("points",)

    def __init__(self, points):
        self.points = _mat(points, "points")
        self.points.setflags(write=False)
        self.dim = self.points.shape[1]
        self.convex = len(self.points) == 1

    def vertices(self):
        return self.points.copy()

    def support_value(self, a):
        return float(np.max(self.points @ a))

    def project(self, x):
        x = self._check_dim(x)
        d2 = np.sum((self.points - x) ** 2, axis=1)
        return self.points[int(np.argmin(d2))].copy()

    def anchor(self):
        return self.points.mean(axis=0)

    def bbox(self):
        return self.points.min(axis=0), self.points.max(axis=0)

    def scaled(self, shift, scale):
        return PointCloud((self.points - shift) / scale)


class EuclideanBall(_Set):
    """Closed ball ``{x : |x - c| <= s}``; usable as target or constraint."""

    kind = "ball"
    _fields = ("center", "radius")

    def __init__(self, center, radius):
        self.center = _vec(center, "center")
        self.center.setflags(write=False)
        self.radius = float(radius)
        if not (self.radius >= 0 and math.isfinite(self.radius)):
            raise GeometryError(f"ball radius must be finite and >= 0, got {radius}")
        self.dim = self.center.size

    def support_value(self, a):
        return float(a @ self.center + self.radius * np.linalg.norm(a))

    def project(self, x):
        x = self._check_dim(x)
        v = x - self.center
        n = np.linalg.norm(v)
        if n <= self.radius:
            return x.copy()
        return self.center + v * (self.radius / n)

    def project_many(self, X):
        X = self._check_dim(X)
        V = X - self.center
        n = np.linalg.norm(V, axis=-1, keepdims=True)
        f = np.where(n > self.radius, self.radius / np.where(n > 0, n, 1.0), 1.0)
        return self.center + V * f

    def anchor(self):
        return self.center.copy()

    def bbox(self):
        return self.center - self.radius, self.center + self.radius

    def scaled(self, shift, scale):
        return EuclideanBall((self.center - shift) / scale, self.radius / scale)


def _hull_2d(P):
    """Convex hull (counter-clockwise, no collinear points) by monotone chain."""
    pts = sorted(set(map(tuple, np.round(P, 15))))
    if len(pts) <= 2:
        return np.array(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def _segment_project(x, a, b):
    ab = b - a
    den = float(ab @ ab)
    if den == 0:
        return a.copy()
    s = min(1.0, max(0.0, float((x - a) @ ab) / den))
    return a + s * ab


def project_simplex(v):
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1.0), 0.0)


def _affine_min(P):
    """Minimum-norm point of the affine hull of the rows of ``P`` as barycentric weights."""
    k = len(P)
    M = np.zeros((k + 1, k + 1))
    M[0, 1:] = M[1:, 0] = 1.0
    M[1:, 1:] = P @ P.T
    rhs = np.zeros(k + 1)
    rhs[0] = 1.0
    sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    return sol[1:]


def _min_norm_point(V, tol=1e-12, max_iter=10_000):
    """Point of ``conv(V)`` closest to the origin (Wolfe's active-set method)."""
    scale = max(float(np.abs(V).max()), 1e-300)
    P = V / scale
    i0 = int(np.argmin(np.einsum("ij,ij->i", P, P)))
    S = [i0]
    w = np.array([1.0])
    x = P[i0].copy()
    for _ in range(max_iter):
        j = int(np.argmin(P @ x))
        if x @ x - P[j] @ x <= tol * max(1.0, float(x @ x)) or j in S:
            return scale * x
        S.append(j)
        w = np.append(w, 0.0)
        while True:
            v = _affine_min(P[S])
            if np.all(v > tol):
                w = v
                break
            neg = (v <= tol) & (w - v > 0)
            theta = min(1.0, float(np.min(w[neg] / (w[neg] - v[neg])))) if np.any(neg) else 1.0
            w = theta * v + (1 - theta) * w
            keep = w > tol
            S = [s for s, k in zip(S, keep) if k]
            w = w[keep] / w[keep].sum()
        x = w @ P[S]
    raise ConvergenceError("VPolytope projection did not converge")


class VPolytope(_Set):
    """Convex hull of a finite vertex list."""

    kind = "vpolytope"
    _fields = ("points",)

    def __init__(self, vertices):
        self.points = _mat(vertices, "vertices")
        self.points.setflags(write=False)
        self.dim = self.points.shape[1]

    def vertices(self):
        return self.points.copy()

    @cached_property
    def hull(self):
        if self.dim != 2:
            raise GeometryError("hull is only computed in 2-D")
        return _hull_2d(self.points)

    def support_value(self, a):
        return float(np.max(self.points @ a))

    def project(self, x):
        x = self._check_dim(x)
        if self.dim == 1:
            return np.clip(x, self.points.min(), self.points.max())
        if self.dim == 2:
            return self._project_2d(x)
        return self._project_pg(x)

    def _project_2d(self, x):
        H = self.hull
        if len(H) == 1:
            return H[0].copy()
        if len(H) == 2:
            return _segment_project(x, H[0], H[1])
        edges = np.roll(H, -1, axis=0) - H
        rel = x - H
        if np.all(edges[:, 0] * rel[:, 1] - edges[:, 1] * rel[:, 0] >= 0):
            return x.copy()
        best, best_d = None, np.inf
        for a, b in zip(H, np.roll(H, -1, axis=0)):
            p = _segment_project(x, a, b)
            dd = float(np.sum((p - x) ** 2))
            if dd < best_d:
                best, best_d = p, dd
        return best

    def _project_pg(self, x, tol=1e-12, max_iter=10_000):
        return x + _min_norm_point(self.points - x, tol, max_iter)

    def contains(self, x, tol=1e-12):
        return self.distance(x) <= tol

    def anchor(self):
        return self.points.mean(axis=0)

    def bbox(self):
        return self.points.min(axis=0), self.points.max(axis=0)

    def scaled(self, shift, scale):
        return VPolytope((self.points - shift) / scale)


class Halfspace(_Set):
    """``{x : <a, x> <= b}``; unbounded, so only valid as an intersection target."""

    kind = "halfspace"
    bounded = False
    _fields = ("normal", "offset")

    def __init__(self, normal, offset):
        self.normal = _vec(normal, "normal")
        if not np.any(self.normal):
            raise GeometryError("halfspace normal must be non-zero")
        self.normal.setflags(write=False)
        self.offset = float(offset)
        self.dim = self.normal.size

    def support_value(self, a):
        a = np.asarray(a, dtype=float)
        na, nn = np.linalg.norm(a), np.linalg.norm(self.normal)
        lam = float(a @ self.normal) / (nn * nn)
        if lam > 0 and np.linalg.norm(a - lam * self.normal) <= 1e-12 * na:
            return lam * self.offset
        return math.inf

    def project(self, x):
        x = self._check_dim(x)
        a = self.normal
        excess = float(a @ x) - self.offset
        if excess <= 0:
            return x.copy()
        return x - (excess / float(a @ a)) * a

    def project_many(self, X):
        X = self._check_dim(X)
        a = self.normal
        excess = np.maximum(X @ a - self.offset, 0.0)
        return X - np.outer(excess / float(a @ a), a)

    def anchor(self):
        a = self.normal
        return a * (self.offset / float(a @ a))

    def bbox(self):
        return None

    def scaled(self, shift, scale):
        return Halfspace(self.normal, (self.offset - float(self.normal @ shift)) / scale)


TARGET_TYPES = (PointCloud, EuclideanBall, VPolytope, Halfspace)


# -- constraints ---------------------------------------------------------------

class WholeSpace(_Set):
    kind = "whole_space"
    bounded = False
    _fields = ("dim",)

    def __init__(self, dim):
        self.dim = int(dim)

    def project(self, x):
        return self._check_dim(x).copy()

    def project_many(self, X):
        return self._check_dim(X).copy()

    def bbox(self):
        return None

    def scaled(self, shift, scale):
        return WholeSpace(self.dim)


class AxisBox(_Set):
    kind = "box"
    _fields = ("lo", "hi")

    def __init__(self, lo, hi):
        self.lo, self.hi = _vec(lo, "lo"), _vec(hi, "hi")
        if self.lo.shape != self.hi.shape:
            raise GeometryError("box bounds differ in length")
        if np.any(self.lo > self.hi):
            raise GeometryError("box requires lo <= hi componentwise")
        self.lo.setflags(write=False)
        self.hi.setflags(write=False)
        self.dim = self.lo.size

    def project(self, x):
        return np.clip(self._check_dim(x), self.lo, self.hi)

    def project_many(self, X):
        return np.clip(self._check_dim(X), self.lo, self.hi)

    def bbox(self):
        return self.lo.copy(), self.hi.copy()

    def scaled(self, shift, scale):
        return AxisBox((self.lo - shift) / scale, (self.hi - shift) / scale)


class HPolytopeSet(_Set):
    """``{x : <a_j, x> <= b_j for all j}`` with Dykstra projection."""

    kind = "hpolytope"
    _fields = ("rows", "offsets")

    def __init__(self, rows, offsets, check=True):
        self.rows = _mat(rows, "rows")
        self.offsets = _vec(offsets, "offsets")
        if len(self.offsets) != len(self.rows):
            raise GeometryError("hpolytope constraint needs one offset per row")
        norms = np.linalg.norm(self.rows, axis=1)
        if np.any(norms == 0):
            raise GeometryError("hpolytope constraint has a zero row")
        self.rows.setflags(write=False)
        self.offsets.setflags(write=False)
        self.dim = self.rows.shape[1]
        self._sq = norms ** 2
        if check:
            try:
                p = self.project(np.zeros(self.dim))
            except ConvergenceError:
                raise GeometryError("hpolytope constraint set is empty") from None
            if np.any(self.rows @ p - self.offsets > 1e-8 * (1 + np.abs(self.offsets))):
                raise GeometryError("hpolytope constraint set is empty")

    @cached_property
    def bounded(self):
        return self.bbox() is not None

    def project(self, x):
        x = self._check_dim(x)
        return self.project_many(x[None, :])[0]

    def project_many(self, X, tol=DYKSTRA_TOL, max_sweeps=DYKSTRA_MAX_SWEEPS):
        """Dykstra's alternating projections, batched over the rows of ``X``."""
        X = np.array(self._check_dim(X), dtype=float)
        A, b, sq = self.rows, self.offsets, self._sq
        if np.all(X @ A.T <= b):
            return X
        incr = np.zeros((len(A),) + X.shape)
        for _ in range(max_sweeps):
            start, prev = X.copy(), incr.copy()
            for j in range(len(A)):
                Y = X + incr[j]
                excess = np.maximum(Y @ A[j] - b[j], 0.0)
                X = Y - np.outer(excess / sq[j], A[j])
                incr[j] = Y - X
            # the iterate can sit still while the increments are still moving,
            # so both must have settled
            scale = tol * (1.0 + np.max(np.abs(X)))
            if np.max(np.abs(X - start)) < scale and np.max(np.abs(incr - prev)) < scale:
                return X
        raise ConvergenceError("Dykstra projection hit the sweep cap")

    def bbox(self):
        lo, hi = np.empty(self.dim), np.empty(self.dim)
        for i in range(self.dim):
            for sign, out in ((1.0, hi), (-1.0, lo)):
                c = np.zeros(self.dim)
                c[i] = -sign
                res = linprog(c, A_ub=self.rows, b_ub=self.offsets,
                              bounds=[(None, None)] * self.dim, method="highs")
                if res.status != 0:
                    return None
                out[i] = res.x[i]
        return lo, hi

    def scaled(self, shift, scale):
        return HPolytopeSet(self.rows, (self.offsets - self.rows @ shift) / scale, check=False)


class Sphere(_Set):
    """The (non-convex) sphere ``{x : |x - c| = s}``."""

    kind = "sphere"
    convex = False
    _fields = ("center", "radius")

    def __init__(self, center, radius):
        self.center = _vec(center, "center")
        self.center.setflags(write=False)
        self.radius = float(radius)
        if not (self.radius >= 0 and math.isfinite(self.radius)):
            raise GeometryError(f"sphere radius must be finite and >= 0, got {radius}")
        self.dim = self.center.size

    def project(self, x):
        x = self._check_dim(x)
        return self.project_many(x[None, :])[0]

    def project_many(self, X):
        X = self._check_dim(X)
        V = X - self.center
        n = np.linalg.norm(V, axis=-1, keepdims=True)
        e1 = np.zeros(self.dim)
        e1[0] = 1.0
        U = np.where(n > 0, V / np.where(n > 0, n, 1.0), e1)
        return self.center + self.radius * U

    def bbox(self):
        return self.center - self.radius, self.center + self.radius

    def scaled(self, shift, scale):
        return Sphere((self.center - shift) / scale, self.radius / scale)


CONSTRAINT_TYPES = (WholeSpace, EuclideanBall, AxisBox, HPolytopeSet, Sphere)


# -- functional interface --------------------------------------------------------

def support_value(Q, a):
    """``sup{<a, w> : w in Q}``; ``math.inf`` when unbounded along ``a``."""
    a = Q._check_dim(a)
    if not np.any(a):
        raise GeometryError("support direction must be non-zero")
    return Q.support_value(a)


def euclid_project(Q, x):
    """Nearest point of the target ``Q`` to ``x``."""
    return Q.project(x)


def constraint_project(omega, x):
    """A nearest point of the constraint set ``omega`` to ``x``."""
    return omega.project(x)


def vertices(Q):
    """Defining points of a point cloud or V-polytope."""
    if not isinstance(Q, (PointCloud, VPolytope)):
        raise GeometryError(f"unsupported kind {Q.kind!r} for vertices()")
    return Q.vertices()


def constraint_violation(omega, x):
    """Euclidean distance from ``x`` to ``omega`` (0 when feasible)."""
    x = omega._check_dim(x)
    if isinstance(omega, Sphere):
        return abs(float(np.linalg.norm(x - omega.center)) - omega.radius)
    if isinstance(omega, HPolytopeSet):
        # Dykstra has a tolerance of its own; measure the row violation directly.
        excess = np.maximum(omega.rows @ x - omega.offsets, 0.0)
        return float(np.max(excess / np.sqrt(omega._sq))) if excess.size else 0.0
    return float(np.linalg.norm(x - omega.project(x)))
