"""Deterministic SVG 1.1 drawings of planar scenes and their optimal balls."""
from __future__ import annotations

import math

import numpy as np

from .errors import GeometryError
from .sets import AxisBox, EuclideanBall, Halfspace, HPolytopeSet, PointCloud, Sphere, VPolytope, \
    WholeSpace

WIDTH = 640
MARGIN = 20
STYLE = {
    "constraint": 'fill="none" stroke="#555555" stroke-width="1.5" stroke-dasharray="6 4"',
    "target": 'fill="#4a90d9" fill-opacity="0.35" stroke="#1f4e79" stroke-width="1"',
    "ball": 'fill="none" stroke="#c0392b" stroke-width="2"',
    "center": 'fill="#c0392b" stroke="none"',
}


def _fmt(v):
    return f"{v:.4f}"


def _halfplane_polygon(rows, offsets):
    """Vertices of the bounded 2-D polygon ``{x : rows x <= offsets}``, counter-clockwise."""
    pts = []
    m = len(rows)
    for i in range(m):
        for j in range(i + 1, m):
            M = rows[[i, j]]
            if abs(np.linalg.det(M)) < 1e-12:
                continue
            p = np.linalg.solve(M, offsets[[i, j]])
            if np.all(rows @ p <= offsets + 1e-9 * (1.0 + np.abs(offsets))):
                pts.append(p)
    if not pts:
        return np.zeros((0, 2))
    P = np.unique(np.round(np.array(pts), 12), axis=0)
    c = P.mean(axis=0)
    return P[np.argsort(np.arctan2(P[:, 1] - c[1], P[:, 0] - c[0]))]


def _box_rows(lo, hi):
    rows = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    return rows, np.array([hi[0], -lo[0], hi[1], -lo[1]])


def _ball_outline(F, center, r):
    """Drawable outline of ``center + rF``: ('circle', r), ('ellipse', ...) or ('polygon', pts)."""
    if F.kind == "euclidean":
        return ("circle", r)
    if F.kind == "ellipsoid":
        lam, Q = np.linalg.eigh(F.matrix)
        axes = r / np.sqrt(lam)
        angle = math.degrees(math.atan2(Q[1, 0], Q[0, 0]))
        return ("ellipse", axes[0], axes[1], angle)
    return ("polygon", center + r * F.vertices)


def render_svg(scene, sol):
    """SVG drawing of ``scene`` with the ball ``sol.center + sol.radius F``."""
    if scene.dimension != 2:
        raise GeometryError(f"render_svg needs a 2-D scene, got dimension {scene.dimension}")
    F = scene.gauge
    center = np.asarray(sol.center, dtype=float)
    r = float(sol.radius)
    lo, hi = scene.bounding_box()
    ext = np.abs(np.linalg.inv(F.matrix)).diagonal() ** 0.5 if F.kind == "ellipsoid" else None
    if F.kind == "euclidean":
        reach = np.array([r, r])
    elif F.kind == "ellipsoid":
        reach = r * ext
    else:
        reach = r * np.abs(F.vertices).max(axis=0)
    lo = np.minimum(lo, center - reach)
    hi = np.maximum(hi, center + reach)
    span = np.maximum(hi - lo, 1e-9)
    pad = 0.08 * float(span.max()) + 1e-9
    lo, hi = lo - pad, hi + pad
    span = hi - lo
    scale = (WIDTH - 2 * MARGIN) / float(span.max())
    width = WIDTH
    height = int(math.ceil(span[1] * scale + 2 * MARGIN))

    def sx(p):
        return MARGIN + (p[0] - lo[0]) * scale

    def sy(p):
        return MARGIN + (hi[1] - p[1]) * scale

    def poly(P, cls):
        pts = " ".join(f"{_fmt(sx(p))},{_fmt(sy(p))}" for p in P)
        return f'  <polygon class="{cls}" points="{pts}" {STYLE[cls]}/>'

    def circle(c, rad, cls):
        return (f'  <circle class="{cls}" cx="{_fmt(sx(c))}" cy="{_fmt(sy(c))}" '
                f'r="{_fmt(rad * scale)}" {STYLE[cls]}/>')

    view_rows, view_off = _box_rows(lo, hi)
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'  <title>{_escape(scene.name or scene.problem)}</title>',
           f'  <rect class="background" x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>']

    omega = scene.constraint
    if isinstance(omega, (EuclideanBall, Sphere)):
        out.append(circle(omega.center, omega.radius, "constraint"))
    elif isinstance(omega, AxisBox):
        rows, off = _box_rows(omega.lo, omega.hi)
        out.append(poly(_halfplane_polygon(rows, off), "constraint"))
    elif isinstance(omega, HPolytopeSet):
        P = _halfplane_polygon(np.vstack([omega.rows, view_rows]),
                               np.concatenate([omega.offsets, view_off]))
        if len(P):
            out.append(poly(P, "constraint"))
    elif not isinstance(omega, WholeSpace):
        raise GeometryError(f"cannot draw constraint kind {omega.kind!r}")

    dot = 3.0 / scale
    for Q in scene.targets:
        if isinstance(Q, PointCloud):
            out.extend(circle(p, dot, "target") for p in Q.points)
        elif isinstance(Q, EuclideanBall):
            out.append(circle(Q.center, Q.radius, "target"))
        elif isinstance(Q, VPolytope):
            H = Q.hull
            out.append(poly(H, "target") if len(H) >= 3 else
                       '  <polyline class="target" points="'
                       + " ".join(f"{_fmt(sx(p))},{_fmt(sy(p))}" for p in H)
                       + f'" {STYLE["target"]}/>')
        elif isinstance(Q, Halfspace):
            P = _halfplane_polygon(np.vstack([Q.normal[None, :], view_rows]),
                                   np.concatenate([[Q.offset], view_off]))
            if len(P):
                out.append(poly(P, "target"))

    shape = _ball_outline(F, center, r)
    if shape[0] == "circle":
        out.append(circle(center, r, "ball"))
    elif shape[0] == "ellipse":
        _, a, b, angle = shape
        cx, cy = sx(center), sy(center)
        out.append(f'  <ellipse class="ball" cx="{_fmt(cx)}" cy="{_fmt(cy)}" rx="{_fmt(a * scale)}" '
                   f'ry="{_fmt(b * scale)}" transform="rotate({_fmt(-angle)} {_fmt(cx)} {_fmt(cy)})" '
                   f'{STYLE["ball"]}/>')
    else:
        out.append(poly(shape[1], "ball"))
    out.append(circle(center, 4.0 / scale, "center"))
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def _escape(text):
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
