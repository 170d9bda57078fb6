"""Gauge bodies and their Minkowski functions.

A gauge body ``F`` is a closed, bounded, convex set with the origin in its
interior.  Its Minkowski function ``rho_F(z) = inf{t >= 0 : z in tF}`` plays
the role of a norm: ``x + rF`` is the "ball" of radius ``r`` about ``x``.

Three kinds are supported:

* ``euclidean``  -- the unit ball, ``rho(z) = |z|``
* ``ellipsoid``  -- ``{z : z^T A z <= 1}``, ``rho(z) = sqrt(z^T A z)``
* ``hpolytope``  -- ``{z : <a_j, z> <= 1}``, ``rho(z) = max(0, max_j <a_j, z>)``
"""
from __future__ import annotations

import itertools
import math
from functools import cached_property

import numpy as np
from scipy.optimize import brentq, linprog, lsq_linear

from .errors import GeometryError

KINDS = ("euclidean", "ellipsoid", "hpolytope")


def _as_vector(z, dim, name="z"):
    z = np.asarray(z, dtype=float)
    if z.shape[-1:] != (dim,):
        raise GeometryError(f"{name} has shape {z.shape}, expected trailing dimension {dim}")
    return z


class GaugeBody:
    """Immutable description of a gauge body.

    Use the constructors :meth:`euclidean`, :meth:`ellipsoid` and
    :meth:`hpolytope` rather than calling ``GaugeBody`` directly.
    """

    def __init__(self, kind, dim, matrix=None, rows=None):
        if kind not in KINDS:
            raise GeometryError(f"unknown gauge kind {kind!r}")
        if dim < 1:
            raise GeometryError("dimension must be >= 1")
        self.kind = kind
        self.dim = int(dim)
        self.matrix = matrix
        self.rows = rows
        if matrix is not None:
            matrix.setflags(write=False)
        if rows is not None:
            rows.setflags(write=False)

    @classmethod
    def euclidean(cls, dim):
        return cls("euclidean", dim)

    @classmethod
    def ellipsoid(cls, matrix):
        A = np.array(matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise GeometryError("ellipsoid matrix must be square")
        if not np.allclose(A, A.T, rtol=1e-12, atol=1e-12):
            raise GeometryError("ellipsoid matrix must be symmetric")
        A = 0.5 * (A + A.T)
        if np.linalg.eigvalsh(A).min() <= 0:
            raise GeometryError("ellipsoid matrix must be positive definite")
        return cls("ellipsoid", A.shape[0], matrix=A)

    @classmethod
    def hpolytope(cls, rows):
        """Polytope ``{z : <a_j, z> <= 1 for all j}`` from the rows ``a_j``."""
        R = np.array(rows, dtype=float)
        if R.ndim != 2 or R.shape[0] == 0:
            raise GeometryError("hpolytope rows must be a non-empty 2-D array")
        m, d = R.shape
        if m < d + 1:
            raise GeometryError(f"hpolytope needs at least {d + 1} rows to be bounded, got {m}")
        # Bounded iff the support function is finite along every signed axis.
        for i in range(d):
            for sign in (1.0, -1.0):
                c = np.zeros(d)
                c[i] = -sign
                res = linprog(c, A_ub=R, b_ub=np.ones(m), bounds=[(None, None)] * d, method="highs")
                if res.status == 3:
                    raise GeometryError("hpolytope rows do not positively span the space (unbounded body)")
                if res.status != 0:
                    raise GeometryError(f"hpolytope boundedness check failed: {res.message}")
        return cls("hpolytope", d, rows=R)

    def __repr__(self):
        if self.kind == "euclidean":
            return f"GaugeBody.euclidean({self.dim})"
        if self.kind == "ellipsoid":
            return f"GaugeBody.ellipsoid({self.matrix.tolist()})"
        return f"GaugeBody.hpolytope({self.rows.tolist()})"

    def __eq__(self, other):
        if not isinstance(other, GaugeBody):
            return NotImplemented
        return (self.kind == other.kind and self.dim == other.dim
                and _arr_eq(self.matrix, other.matrix) and _arr_eq(self.rows, other.rows))

    def __hash__(self):
        return hash((self.kind, self.dim))

    @cached_property
    def _inverse(self):
        return np.linalg.inv(self.matrix)

    @cached_property
    def _eigh(self):
        return np.linalg.eigh(self.matrix)

    @cached_property
    def vertices(self):
        """Vertices of an ``hpolytope`` body (counter-clockwise in 2-D)."""
        if self.kind != "hpolytope":
            raise GeometryError("vertices are only defined for hpolytope gauges")
        R, d = self.rows, self.dim
        found = []
        for subset in itertools.combinations(range(len(R)), d):
            sub = R[list(subset)]
            if abs(np.linalg.det(sub)) < 1e-12:
                continue
            v = np.linalg.solve(sub, np.ones(d))
            if np.all(R @ v <= 1 + 1e-9) and not any(np.allclose(v, w, atol=1e-10) for w in found):
                found.append(v)
        V = np.array(found)
        if d == 2:
            V = V[np.argsort(np.arctan2(V[:, 1], V[:, 0]))]
        return V

    @cached_property
    def lipschitz(self):
        """Lipschitz constant of ``rho_F`` w.r.t. the Euclidean norm."""
        axes = np.vstack([np.eye(self.dim), -np.eye(self.dim)])
        return float(np.max(gauge_value(self, axes)) * math.sqrt(self.dim))


def _arr_eq(a, b):
    if a is None or b is None:
        return a is None and b is None
    return a.shape == b.shape and bool(np.array_equal(a, b))


def gauge_value(F, z):
    """Minkowski function ``rho_F(z)``.

    ``z`` may be a single vector of shape ``(d,)`` or a stack ``(..., d)``;
    the result has the matching leading shape.
    """
    z = _as_vector(z, F.dim)
    if F.kind == "euclidean":
        return np.linalg.norm(z, axis=-1)
    if F.kind == "ellipsoid":
        q = np.einsum("...i,ij,...j->...", z, F.matrix, z)
        return np.sqrt(np.maximum(q, 0.0))
    return np.maximum(0.0, np.max(z @ F.rows.T, axis=-1))


def gauge_subgradient(F, z):
    """A subgradient of ``rho_F`` at ``z``.

    At ``z = 0`` the zero vector is returned.  For polytopes the lowest
    attaining row is used.
    """
    z = _as_vector(z, F.dim)
    if F.kind == "euclidean":
        n = np.linalg.norm(z)
        return z / n if n > 0 else np.zeros(F.dim)
    if F.kind == "ellipsoid":
        Az = F.matrix @ z
        q = float(z @ Az)
        return Az / math.sqrt(q) if q > 0 else np.zeros(F.dim)
    scores = F.rows @ z
    j = int(np.argmax(scores))
    return F.rows[j].copy() if scores[j] > 0 else np.zeros(F.dim)


def gauge_membership(F, z, t, tol=1e-12):
    """Whether ``z`` lies in ``tF`` (up to a relative tolerance)."""
    if t < 0:
        raise GeometryError(f"negative scale t={t}")
    return bool(gauge_value(F, z) <= t + tol * (1.0 + t))


def support(F, u):
    """Support function ``h_F(u) = max{<u, f> : f in F}``."""
    u = _as_vector(u, F.dim, "u")
    if F.kind == "euclidean":
        return float(np.linalg.norm(u))
    if F.kind == "ellipsoid":
        return math.sqrt(max(float(u @ F._inverse @ u), 0.0))
    return float(np.max(F.vertices @ u))


def support_point(F, u):
    """A point of ``F`` attaining ``h_F(u)``."""
    u = _as_vector(u, F.dim, "u")
    if F.kind == "euclidean":
        n = np.linalg.norm(u)
        return u / n if n > 0 else np.zeros(F.dim)
    if F.kind == "ellipsoid":
        w = F._inverse @ u
        h = math.sqrt(max(float(u @ w), 0.0))
        return w / h if h > 0 else np.zeros(F.dim)
    return F.vertices[int(np.argmax(F.vertices @ u))].copy()


def project(F, y, t):
    """Euclidean projection of ``y`` onto the scaled body ``tF``."""
    y = _as_vector(y, F.dim, "y")
    if t < 0:
        raise GeometryError(f"negative scale t={t}")
    if t == 0:
        return np.zeros(F.dim)
    if gauge_value(F, y) <= t:
        return y.copy()
    if F.kind == "euclidean":
        return y * (t / np.linalg.norm(y))
    if F.kind == "ellipsoid":
        return _project_ellipsoid(F, y, t)
    if F.dim == 2:
        return _project_polygon(t * F.vertices, y)
    return _project_hpolytope(F.rows, np.full(len(F.rows), t), y)


def _project_ellipsoid(F, y, t):
    lam, Q = F._eigh
    yt = Q.T @ y
    target = t * t

    def excess(mu):
        return float(np.sum(lam * (yt / (1.0 + mu * lam)) ** 2)) - target

    hi = math.sqrt(float(np.sum(yt ** 2 / lam))) / t
    while excess(hi) > 0:
        hi *= 2.0
    mu = brentq(excess, 0.0, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
    z = Q @ (yt / (1.0 + mu * lam))
    # Pull back onto the boundary to remove residual root-finding error.
    return z * (t / gauge_value(F, z))


def _project_polygon(V, y):
    """Projection of an outside point ``y`` onto the convex polygon with CCW vertices ``V``."""
    A = V
    B = np.roll(V, -1, axis=0)
    E = B - A
    lam = np.clip(np.einsum("ij,ij->i", y - A, E) / np.einsum("ij,ij->i", E, E), 0.0, 1.0)
    P = A + lam[:, None] * E
    return P[int(np.argmin(np.sum((P - y) ** 2, axis=1)))].copy()


def _project_hpolytope(R, b, y):
    """Projection onto ``{z : R z <= b}`` as a least-distance program.

    The dual is the bound-constrained least-squares problem
    ``min |E u - f|, u >= 0`` (Lawson and Hanson), solved with BVLS.
    """
    h = R @ y - b
    if np.all(h <= 0):
        return y.copy()
    d = R.shape[1]
    E = np.vstack([-R.T, h[None, :]])
    f = np.zeros(d + 1)
    f[-1] = 1.0
    u = lsq_linear(E, f, bounds=(0.0, np.inf), method="bvls", tol=1e-15).x
    r = E @ u - f
    if abs(r[-1]) < 1e-15:
        raise GeometryError("polytope projection: constraints are infeasible")
    return y - r[:d] / r[-1]
