"""Scene and solution serialization.

Scenes are JSON documents with explicit ``"kind"`` discriminators::

    {
      "name": "optional label",
      "dimension": 2,
      "problem": "seb" | "sib",
      "gauge": {"kind": "euclidean"}
             | {"kind": "ellipsoid", "matrix": [[...], ...]}
             | {"kind": "hpolytope", "rows": [[...], ...]},
      "constraint": {"kind": "whole_space"}
                  | {"kind": "ball", "center": [...], "radius": r}
                  | {"kind": "box", "lo": [...], "hi": [...]}
                  | {"kind": "hpolytope", "rows": [[...]], "offsets": [...]}
                  | {"kind": "sphere", "center": [...], "radius": r},
      "targets": [
        {"kind": "points", "points": [[...], ...]}
        | {"kind": "ball", "center": [...], "radius": r}
        | {"kind": "vpolytope", "vertices": [[...], ...]}
        | {"kind": "halfspace", "normal": [...], "offset": b},
        ...
      ]
    }

``constraint`` defaults to the whole space.  Unknown fields are rejected.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, SceneError
from .gauge import GaugeBody
from .sets import (AxisBox, EuclideanBall, Halfspace, HPolytopeSet, PointCloud, Sphere,
                   VPolytope, WholeSpace)
from .svg import render_svg  # noqa: F401  (re-exported)

PROBLEMS = ("seb", "sib")


@dataclass(eq=False)
class Scene:
    """A complete problem instance ``(F, Omega, Omega_1..Omega_n)``."""

    dimension: int
    problem: str
    gauge: GaugeBody
    targets: list
    constraint: object = None
    name: str | None = None

    def __post_init__(self):
        if self.constraint is None:
            self.constraint = WholeSpace(self.dimension)
        self.targets = list(self.targets)

    def validate(self):
        """Check the standing assumptions; raises :class:`SceneError`."""
        if not isinstance(self.dimension, int) or self.dimension < 1:
            raise SceneError(f"dimension must be a positive integer, got {self.dimension!r}")
        if self.problem not in PROBLEMS:
            raise SceneError(f"problem must be one of {PROBLEMS}, got {self.problem!r}")
        if self.gauge.dim != self.dimension:
            raise SceneError(f"gauge dimension {self.gauge.dim} != scene dimension {self.dimension}")
        if self.constraint.dim != self.dimension:
            raise SceneError(f"constraint dimension {self.constraint.dim} != scene dimension {self.dimension}")
        if not self.targets:
            raise SceneError("scene needs at least one target")
        for i, Q in enumerate(self.targets):
            if Q.dim != self.dimension:
                raise SceneError(f"target {i} dimension {Q.dim} != scene dimension {self.dimension}")
            if self.problem == "seb" and not Q.bounded:
                raise SceneError(f"SEB target {i} unbounded: enclosing-ball targets must be bounded")
        return self

    def to_dict(self):
        out = {"dimension": self.dimension, "problem": self.problem,
               "gauge": _gauge_to_dict(self.gauge),
               "constraint": _set_to_dict(self.constraint),
               "targets": [_set_to_dict(Q) for Q in self.targets]}
        if self.name is not None:
            out["name"] = self.name
        return out

    def __eq__(self, other):
        if not isinstance(other, Scene):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def bounding_box(self):
        """Axis box around the targets (and a bounded constraint set)."""
        boxes = []
        for Q in self.targets:
            bb = Q.bbox()
            if bb is None:
                a = Q.anchor()
                bb = (a, a)
            boxes.append(bb)
        cb = self.constraint.bbox()
        if cb is not None:
            boxes.append(cb)
        lo = np.min([b[0] for b in boxes], axis=0)
        hi = np.max([b[1] for b in boxes], axis=0)
        return lo, hi

    @property
    def diameter(self):
        lo, hi = self.bounding_box()
        d = float(np.linalg.norm(hi - lo))
        return d if d > 0 else 1.0

    def scaled(self, factor, shift=None):
        """The scene with every coordinate mapped to ``factor * (x - shift)``."""
        shift = np.zeros(self.dimension) if shift is None else np.asarray(shift, dtype=float)
        inv = 1.0 / factor
        return Scene(self.dimension, self.problem, self.gauge,
                     [Q.scaled(shift, inv) for Q in self.targets],
                     self.constraint.scaled(shift, inv), self.name)


# -- dict conversion ------------------------------------------------------------------

def _gauge_to_dict(F):
    if F.kind == "euclidean":
        return {"kind": "euclidean"}
    if F.kind == "ellipsoid":
        return {"kind": "ellipsoid", "matrix": F.matrix.tolist()}
    return {"kind": "hpolytope", "rows": F.rows.tolist()}


def _set_to_dict(S):
    if isinstance(S, PointCloud):
        return {"kind": "points", "points": S.points.tolist()}
    if isinstance(S, VPolytope):
        return {"kind": "vpolytope", "vertices": S.points.tolist()}
    if isinstance(S, EuclideanBall):
        return {"kind": "ball", "center": S.center.tolist(), "radius": S.radius}
    if isinstance(S, Halfspace):
        return {"kind": "halfspace", "normal": S.normal.tolist(), "offset": S.offset}
    if isinstance(S, WholeSpace):
        return {"kind": "whole_space"}
    if isinstance(S, AxisBox):
        return {"kind": "box", "lo": S.lo.tolist(), "hi": S.hi.tolist()}
    if isinstance(S, HPolytopeSet):
        return {"kind": "hpolytope", "rows": S.rows.tolist(), "offsets": S.offsets.tolist()}
    if isinstance(S, Sphere):
        return {"kind": "sphere", "center": S.center.tolist(), "radius": S.radius}
    raise TypeError(f"cannot serialize {type(S).__name__}")


_GAUGE_FIELDS = {"euclidean": (), "ellipsoid": ("matrix",), "hpolytope": ("rows",)}
_TARGET_FIELDS = {"points": ("points",), "ball": ("center", "radius"),
                  "vpolytope": ("vertices",), "halfspace": ("normal", "offset")}
_CONSTRAINT_FIELDS = {"whole_space": (), "ball": ("center", "radius"), "box": ("lo", "hi"),
                      "hpolytope": ("rows", "offsets"), "sphere": ("center", "radius")}
_SCENE_FIELDS = {"dimension", "problem", "gauge", "targets"}
_SCENE_OPTIONAL = {"constraint", "name"}


def _fields(obj, where, table):
    if not isinstance(obj, dict):
        raise SceneError(f"{where}: expected an object")
    kind = obj.get("kind")
    if kind not in table:
        raise SceneError(f"{where}.kind: expected one of {sorted(table)}, got {kind!r}")
    want = set(table[kind]) | {"kind"}
    extra = set(obj) - want
    if extra:
        raise SceneError(f"{where}: unknown field(s) {sorted(extra)} for kind {kind!r}")
    missing = want - set(obj)
    if missing:
        raise SceneError(f"{where}: missing field(s) {sorted(missing)} for kind {kind!r}")
    return kind


def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise SceneError(f"{where}: expected a finite number, got {v!r}")
    return float(v)


def _vector(v, where, dim):
    if not isinstance(v, list):
        raise SceneError(f"{where}: expected a list of {dim} numbers")
    out = [_number(x, f"{where}[{i}]") for i, x in enumerate(v)]
    if len(out) != dim:
        raise SceneError(f"{where}: expected {dim} entries, got {len(out)}")
    return out


def _matrix(v, where, dim):
    if not isinstance(v, list) or not v:
        raise SceneError(f"{where}: expected a non-empty list of vectors")
    return [_vector(r, f"{where}[{i}]", dim) for i, r in enumerate(v)]


def _build(where, fn, *args):
    try:
        return fn(*args)
    except GeometryError as exc:
        raise SceneError(f"{where}: {exc}") from None


def _parse_gauge(obj, d):
    kind = _fields(obj, "gauge", _GAUGE_FIELDS)
    if kind == "euclidean":
        return GaugeBody.euclidean(d)
    if kind == "ellipsoid":
        M = _matrix(obj["matrix"], "gauge.matrix", d)
        if len(M) != d:
            raise SceneError(f"gauge.matrix: expected {d} rows, got {len(M)}")
        return _build("gauge", GaugeBody.ellipsoid, M)
    return _build("gauge", GaugeBody.hpolytope, _matrix(obj["rows"], "gauge.rows", d))


def _parse_target(obj, d, i):
    where = f"targets[{i}]"
    kind = _fields(obj, where, _TARGET_FIELDS)
    if kind == "points":
        return _build(where, PointCloud, _matrix(obj["points"], f"{where}.points", d))
    if kind == "vpolytope":
        return _build(where, VPolytope, _matrix(obj["vertices"], f"{where}.vertices", d))
    if kind == "ball":
        return _build(where, EuclideanBall, _vector(obj["center"], f"{where}.center", d),
                      _number(obj["radius"], f"{where}.radius"))
    return _build(where, Halfspace, _vector(obj["normal"], f"{where}.normal", d),
                  _number(obj["offset"], f"{where}.offset"))


def _parse_constraint(obj, d):
    kind = _fields(obj, "constraint", _CONSTRAINT_FIELDS)
    if kind == "whole_space":
        return WholeSpace(d)
    if kind in ("ball", "sphere"):
        cls = EuclideanBall if kind == "ball" else Sphere
        return _build("constraint", cls, _vector(obj["center"], "constraint.center", d),
                      _number(obj["radius"], "constraint.radius"))
    if kind == "box":
        return _build("constraint", AxisBox, _vector(obj["lo"], "constraint.lo", d),
                      _vector(obj["hi"], "constraint.hi", d))
    rows = _matrix(obj["rows"], "constraint.rows", d)
    if not isinstance(obj["offsets"], list):
        raise SceneError("constraint.offsets: expected a list of numbers")
    offsets = _vector(obj["offsets"], "constraint.offsets", len(rows))
    return _build("constraint", HPolytopeSet, rows, offsets)


def scene_from_dict(doc):
    if not isinstance(doc, dict):
        raise SceneError("scene: expected a JSON object at top level")
    extra = set(doc) - _SCENE_FIELDS - _SCENE_OPTIONAL
    if extra:
        raise SceneError(f"scene: unknown field(s) {sorted(extra)}")
    missing = _SCENE_FIELDS - set(doc)
    if missing:
        raise SceneError(f"scene: missing field(s) {sorted(missing)}")
    d = doc["dimension"]
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise SceneError(f"dimension: expected a positive integer, got {d!r}")
    problem = doc["problem"]
    if problem not in PROBLEMS:
        raise SceneError(f"problem: expected one of {list(PROBLEMS)}, got {problem!r}")
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise SceneError("name: expected a string")
    targets = doc["targets"]
    if not isinstance(targets, list):
        raise SceneError("targets: expected a list")
    scene = Scene(
        dimension=d,
        problem=problem,
        gauge=_parse_gauge(doc["gauge"], d),
        targets=[_parse_target(t, d, i) for i, t in enumerate(targets)],
        constraint=_parse_constraint(doc["constraint"], d) if "constraint" in doc else None,
        name=name,
    )
    return scene.validate()


def parse_scene(text):
    """Parse and validate a scene from JSON text (``str`` or UTF-8 ``bytes``)."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SceneError(f"scene is not valid UTF-8: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return scene_from_dict(doc)


# -- canonical JSON --------------------------------------------------------------------

def _canon(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            raise ValueError(f"cannot encode non-finite number {v}")
        s = format(v + 0.0, ".17g")
        return s if ("." in s or "e" in s) else s + ".0"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in obj):
            return "[" + ", ".join(_canon(v, indent, level + 1) for v in obj) + "]"
        items = ",\n".join(pad + _canon(v, indent, level + 1) for v in obj)
        return "[\n" + items + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(f"{pad}{json.dumps(str(k))}: {_canon(obj[k], indent, level + 1)}"
                           for k in sorted(obj))
        return "{\n" + items + "\n" + end + "}"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def canonical_json(obj):
    """Sorted-key JSON with 17-significant-digit floats, as UTF-8 bytes."""
    return (_canon(obj, 2, 0) + "\n").encode("utf-8")


def emit_scene(scene):
    return canonical_json(scene.to_dict())


def emit_solution(sol, report=None):
    """Canonical JSON for a :class:`~gaugeball.solver.Solution`."""
    doc = {
        "center": [float(v) for v in sol.center],
        "radius": float(sol.radius),
        "active_indices": [int(i) for i in sol.active_indices],
        "converged": bool(sol.converged),
        "certificate": sol.certificate.to_dict() if sol.certificate is not None else None,
        "uniqueness": report.to_dict() if report is not None else None,
    }
    return canonical_json(doc)


@dataclass
class SolutionRecord:
    """The parts of an emitted solution needed to re-certify it."""

    center: np.ndarray
    radius: float
    active_indices: tuple = ()
    converged: bool = False
    extra: dict = field(default_factory=dict)


def parse_solution(text, dimension=None):
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict) or "center" not in doc or "radius" not in doc:
        raise SceneError("solution: expected an object with 'center' and 'radius'")
    center = doc["center"]
    if not isinstance(center, list):
        raise SceneError("solution.center: expected a list of numbers")
    center = _vector(center, "solution.center", len(center) if dimension is None else dimension)
    radius = _number(doc["radius"], "solution.radius")
    if radius < 0:
        raise SceneError("solution.radius: must be >= 0")
    return SolutionRecord(np.array(center, dtype=float), radius,
                          tuple(doc.get("active_indices") or ()), bool(doc.get("converged", False)),
                          {k: v for k, v in doc.items() if k not in ("center", "radius")})
