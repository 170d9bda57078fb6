import json
import re

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaugeball.errors import GeometryError, SceneError
from gaugeball.examples import BUILTIN, parallel_halfplanes, square_two_disks, square_two_points
from gaugeball.gauge import GaugeBody
from gaugeball.scene_io import (Scene, canonical_json, emit_scene, emit_solution, parse_scene,
                                parse_solution, render_svg)
from gaugeball.sets import EuclideanBall, PointCloud
from gaugeball.solver import Solution, SolverConfig, certify, solve, uniqueness_probe

from scenes import random_constraint, random_mixed_scene

EX27 = {
    "dimension": 2, "problem": "seb",
    "gauge": {"kind": "hpolytope", "rows": [[1, 0], [-1, 0], [0, 1], [0, -1]]},
    "targets": [{"kind": "points", "points": [[0, 1]]}, {"kind": "points", "points": [[0, -1]]}],
}


def _doc(**changes):
    doc = json.loads(json.dumps(EX27))
    doc.update(changes)
    return json.dumps(doc)


class TestParse:
    def test_square_points(self):
        scene = parse_scene(_doc())
        assert len(scene.targets) == 2 and scene.gauge == square_two_points().gauge
        assert scene.constraint.kind == "whole_space"

    def test_bytes(self):
        assert parse_scene(_doc().encode()) == parse_scene(_doc())

    def test_minimal_1d(self):
        scene = parse_scene('{"dimension": 1, "problem": "seb", "gauge": {"kind": "euclidean"},'
                            ' "targets": [{"kind": "points", "points": [[0]]}]}')
        assert scene.dimension == 1

    def test_seb_halfspace_rejected(self):
        text = _doc(targets=[{"kind": "halfspace", "normal": [0, 1], "offset": 0}])
        with pytest.raises(SceneError, match="SEB target 0 unbounded"):
            parse_scene(text)

    def test_sib_halfspace_allowed(self):
        text = _doc(problem="sib", targets=[{"kind": "halfspace", "normal": [0, 1], "offset": 0}])
        assert parse_scene(text).targets[0].kind == "halfspace"

    def test_json_error_has_position(self):
        with pytest.raises(SceneError, match="line 2"):
            parse_scene('{"dimension": 2,\n "problem": }')

    @pytest.mark.parametrize("changes, pattern", [
        ({"extra": 1}, "unknown field"),
        ({"dimension": 0}, "dimension"),
        ({"dimension": True}, "dimension"),
        ({"problem": "mec"}, "problem"),
        ({"gauge": {"kind": "euclidean", "p": 2}}, r"gauge: unknown field"),
        ({"gauge": {"kind": "lp"}}, r"gauge.kind"),
        ({"gauge": {"kind": "hpolytope", "rows": [[1, 0], [0, 1]]}}, "gauge"),
        ({"gauge": {"kind": "ellipsoid", "matrix": [[1, 2], [2, 1]]}}, "gauge"),
        ({"targets": []}, "at least one target"),
        ({"targets": [{"kind": "points", "points": [[0, 1, 2]]}]}, r"targets\[0\].points\[0\]"),
        ({"targets": [{"kind": "ball", "center": [0, 0], "radius": -1}]}, r"targets\[0\]"),
        ({"targets": [{"kind": "ball", "center": [0, 0]}]}, "missing field"),
        ({"targets": [{"kind": "points", "points": [[0, "a"]]}]}, "finite number"),
        ({"constraint": {"kind": "box", "lo": [1, 1], "hi": [0, 0]}}, "constraint"),
        ({"constraint": {"kind": "hpolytope", "rows": [[1, 0], [-1, 0]], "offsets": [-1, -1]}}, "empty"),
        ({"name": 3}, "name"),
    ])
    def test_errors(self, changes, pattern):
        with pytest.raises(SceneError, match=pattern):
            parse_scene(_doc(**changes))

    def test_not_object(self):
        with pytest.raises(SceneError, match="top level"):
            parse_scene("[1, 2]")

    def test_scene_error_is_value_error(self):
        assert issubclass(SceneError, ValueError) and issubclass(GeometryError, ValueError)


class TestRoundTrip:
    @pytest.mark.parametrize("name", sorted(BUILTIN))
    def test_builtin(self, name):
        scene = BUILTIN[name]()
        again = parse_scene(emit_scene(scene))
        assert again == scene
        assert emit_scene(again) == emit_scene(scene)

    def test_random(self):
        rng = np.random.default_rng(41)
        for _ in range(50):
            problem = "seb" if rng.random() < 0.5 else "sib"
            d = int(rng.integers(1, 4))
            scene = random_mixed_scene(rng, problem, d, random_constraint(rng, d))
            text = emit_scene(scene)
            once = parse_scene(text)
            assert once == scene
            assert parse_scene(emit_scene(once)) == once

    @given(st.floats(-1e6, 1e6, allow_nan=False), st.floats(1e-6, 1e3))
    def test_floats_exact(self, c, r):
        scene = Scene(1, "seb", GaugeBody.euclidean(1), [EuclideanBall([c], r)])
        again = parse_scene(emit_scene(scene))
        assert again.targets[0].center[0] == c and again.targets[0].radius == r


class TestCanonicalJson:
    def test_seventeen_digits(self):
        out = canonical_json({"x": 0.1})
        assert b"0.10000000000000001" in out

    def test_integral_float_keeps_point(self):
        assert json.loads(canonical_json({"r": 1.0}))["r"] == 1.0
        assert b"1.0" in canonical_json({"r": 1.0})

    def test_sorted_keys(self):
        out = canonical_json({"b": 1, "a": 2}).decode()
        assert out.index('"a"') < out.index('"b"')

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            canonical_json({"x": float("nan")})


class TestEmitSolution:
    def test_halfplanes(self):
        with pytest.warns(RuntimeWarning):
            sol = solve(parallel_halfplanes(), SolverConfig(starts=4))
        doc = json.loads(emit_solution(sol))
        assert doc["radius"] == pytest.approx(1, abs=1e-6)
        assert doc["certificate"]["passed"] is True and doc["uniqueness"] is None

    def test_zero_radius(self):
        sol = Solution(np.zeros(2), 0.0, (0,))
        doc = json.loads(emit_solution(sol))
        assert doc["radius"] == 0 and doc["certificate"] is None

    def test_with_report(self):
        rep = uniqueness_probe(square_two_points())
        text = emit_solution(rep.solution, rep)
        assert json.loads(text)["uniqueness"]["classification"] == "non_unique"
        assert re.search(rb'"classification": "non_unique"', text)

    def test_parse_back(self):
        scene = square_two_points()
        sol = Solution(np.array([0.25, 0.0]), 1.0, (0, 1))
        sol.certificate = certify(scene, sol)
        rec = parse_solution(emit_solution(sol), dimension=2)
        np.testing.assert_array_equal(rec.center, [0.25, 0.0])
        assert rec.radius == 1.0 and rec.active_indices == (0, 1)
        assert certify(scene, rec).passed

    @pytest.mark.parametrize("text, pattern", [
        ("{}", "center"), ('{"center": [0, 0], "radius": -1}', ">= 0"),
        ('{"center": [0], "radius": 1}', "expected 2"), ('{"center": 3, "radius": 1}', "list"),
        ('{"center": [0, "x"], "radius": 1}', "finite"), ("{", "parse error"),
    ])
    def test_bad_solution(self, text, pattern):
        with pytest.raises(SceneError, match=pattern):
            parse_solution(text, dimension=2)


class TestSvg:
    def test_square_ball_on_axis(self):
        scene = square_two_points()
        svg = render_svg(scene, Solution(np.array([0.5, 0.0]), 1.0, (0, 1))).decode()
        assert svg.startswith("<?xml") and 'version="1.1"' in svg
        ball = re.search(r'<polygon class="ball" points="([^"]+)"', svg).group(1)
        pts = np.array([[float(v) for v in p.split(",")] for p in ball.split()])
        center = re.search(r'<circle class="center" cx="([^"]+)" cy="([^"]+)"', svg)
        cx, cy = float(center.group(1)), float(center.group(2))
        # Square outline: two distinct x and two distinct y values, centered on the center mark.
        assert len(np.unique(pts[:, 0].round(3))) == 2 and len(np.unique(pts[:, 1].round(3))) == 2
        assert pts[:, 0].mean() == pytest.approx(cx, abs=1e-3)
        assert pts[:, 1].mean() == pytest.approx(cy, abs=1e-3)

    def test_square_disks_touching(self):
        scene = square_two_disks()
        svg = render_svg(scene, Solution(np.zeros(2), 1.0, (0, 1))).decode()
        disks = re.findall(r'<circle class="target" cx="([^"]+)" cy="([^"]+)" r="([^"]+)"', svg)
        ball = re.search(r'<polygon class="ball" points="([^"]+)"', svg).group(1)
        ys = sorted({float(p.split(",")[1]) for p in ball.split()})
        # The square's top and bottom edges meet the disks' nearest points.
        near = sorted([float(cy) + float(r) for _, cy, r in disks if float(cy) < ys[0]] +
                      [float(cy) - float(r) for _, cy, r in disks if float(cy) > ys[-1]])
        assert near == pytest.approx(ys, abs=1e-3)

    def test_whole_space_has_no_constraint(self):
        svg = render_svg(square_two_points(), Solution(np.zeros(2), 1.0, (0,)))
        assert b'class="constraint"' not in svg

    def test_constraint_drawn(self):
        svg = render_svg(BUILTIN["ex26"](), Solution(np.array([1.0, 0.0]), 1.0, (0,)))
        assert svg.count(b'class="constraint"') == 1

    def test_deterministic(self):
        scene = square_two_disks()
        sol = Solution(np.array([0.3, 0.0]), 1.0, (0, 1))
        assert render_svg(scene, sol) == render_svg(parse_scene(emit_scene(scene)), sol)

    def test_shapes_by_gauge(self):
        targets = [PointCloud([[0, 1]])]
        for F, tag in [(GaugeBody.euclidean(2), b'<circle class="ball"'),
                       (GaugeBody.ellipsoid([[2, 0.5], [0.5, 1]]), b'<ellipse class="ball"')]:
            svg = render_svg(Scene(2, "seb", F, targets), Solution(np.zeros(2), 1.0, (0,)))
            assert tag in svg

    def test_dimension_error(self):
        scene = Scene(3, "seb", GaugeBody.euclidean(3), [PointCloud([[0, 0, 1]])])
        with pytest.raises(GeometryError):
            render_svg(scene, Solution(np.zeros(3), 1.0, (0,)))
