import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaugeball.errors import GeometryError
from gaugeball.examples import SQUARE_ROWS, parallel_halfplanes, square_two_points
from gaugeball.gauge import GaugeBody, gauge_membership, gauge_value
from gaugeball.oracle import feasibility_radius
from gaugeball.scene_io import Scene
from gaugeball.sets import EuclideanBall, Halfspace, PointCloud, VPolytope
from gaugeball.timefn import (farthest_projection, max_time, min_time, objective, seb_objective,
                              seb_subgradient, sib_objective, sib_subgradient)

from properties import (objective_convexity_violation, objective_lipschitz_violation,
                        objective_subgradient_violation)
from scenes import BOUNDED, CONVEX, random_gauge, random_target

SQUARE = GaugeBody.hpolytope(SQUARE_ROWS)
E2 = GaugeBody.euclidean(2)


def _in_target(Q, w, tol=1e-8):
    if isinstance(Q, PointCloud):
        return np.min(np.linalg.norm(Q.points - w, axis=1)) <= tol
    if isinstance(Q, Halfspace):
        return Q.normal @ w - Q.offset <= tol * (1 + np.linalg.norm(Q.normal))
    return Q.distance(w) <= tol


class TestMaxTime:
    def test_square_singleton(self):
        tv = max_time(SQUARE, PointCloud([[0, 1]]), [0, 0])
        assert tv.value == pytest.approx(1)
        np.testing.assert_allclose(tv.witness, [0, 1])

    @pytest.mark.parametrize("F", [E2, SQUARE, GaugeBody.ellipsoid([[2, 0.3], [0.3, 1]])])
    def test_singleton_at_x(self, F):
        assert max_time(F, PointCloud([[0.3, -0.7]]), [0.3, -0.7]).value == 0

    def test_euclidean_ball(self):
        tv = max_time(E2, EuclideanBall([0, 2], 1), [0, 0])
        assert tv.value == pytest.approx(3)
        np.testing.assert_allclose(tv.witness, [0, 3])

    def test_euclidean_ball_against_boundary_samples(self):
        a = np.linspace(0, 2 * np.pi, 10_000, endpoint=False)
        boundary = np.column_stack([np.cos(a), 2 + np.sin(a)])
        assert np.max(np.linalg.norm(boundary, axis=1)) == pytest.approx(3, abs=1e-6)

    def test_ball_centered_at_x_tie_break(self):
        tv = max_time(E2, EuclideanBall([1, 1], 0.5), [1, 1])
        assert tv.value == pytest.approx(0.5)
        np.testing.assert_allclose(tv.witness, [1.5, 1])

    def test_polytope_gauge_ball(self):
        tv = max_time(SQUARE, EuclideanBall([0, 2], 1), [0, 0])
        assert tv.value == pytest.approx(3)
        np.testing.assert_allclose(tv.witness, [0, 3])

    def test_vertex_tie_lowest_index(self):
        tv = max_time(E2, PointCloud([[0, 1], [0, -1]]), [0, 0])
        np.testing.assert_allclose(tv.witness, [0, 1])

    def test_vpolytope_uses_vertices(self):
        P = VPolytope([[0, 0], [2, 0], [0, 2], [1, 1]])
        assert max_time(SQUARE, P, [0, 0]).value == pytest.approx(2)

    def test_halfspace_rejected(self):
        with pytest.raises(GeometryError):
            max_time(E2, Halfspace([0, 1], 0), [0, 0])

    def test_ellipsoid_ball_against_sampling(self):
        rng = np.random.default_rng(11)
        a = np.linspace(0, 2 * np.pi, 200_000, endpoint=False)
        U = np.column_stack([np.cos(a), np.sin(a)])
        for _ in range(30):
            F = random_gauge(rng, 2, "ellipsoid")
            c, s, x = rng.normal(size=2) * 2, rng.uniform(0.1, 2), rng.normal(size=2) * 2
            tv = max_time(F, EuclideanBall(c, s), x)
            sampled = float(np.max(gauge_value(F, c + s * U - x)))
            assert sampled - 1e-9 <= tv.value <= sampled + 1e-6


class TestMinTime:
    def test_halfspace(self):
        tv = min_time(E2, Halfspace([0, -1], -1), [0, 0])
        assert tv.value == pytest.approx(1)
        np.testing.assert_allclose(tv.witness, [0, 1], atol=1e-12)

    @pytest.mark.parametrize("Q", [EuclideanBall([0, 0], 1), Halfspace([1, 1], 0.5),
                                   VPolytope([[-1, -1], [1, 0], [0, 1]]), PointCloud([[0, 0], [3, 3]])])
    @pytest.mark.parametrize("F", [E2, SQUARE, GaugeBody.ellipsoid([[2, 0.3], [0.3, 1]])])
    def test_inside_is_zero(self, F, Q):
        assert min_time(F, Q, [0, 0]).value == 0

    def test_square_disk(self):
        tv = min_time(SQUARE, EuclideanBall([0, 2], 1), [0, 0])
        assert tv.value == pytest.approx(1, abs=1e-9)
        np.testing.assert_allclose(tv.witness, [0, 1], atol=1e-8)

    def test_square_disk_closed_form(self):
        # Box-to-disk distance is closed form; bisect on it independently.
        def dist(t, c, s):
            return np.linalg.norm(c - np.clip(c, -t, t)) - s

        rng = np.random.default_rng(2)
        for _ in range(50):
            c, s = rng.normal(size=2) * 4, rng.uniform(0.1, 1)
            lo, hi = 0.0, 20.0
            while hi - lo > 1e-13:
                mid = 0.5 * (lo + hi)
                lo, hi = (lo, mid) if dist(mid, c, s) <= 0 else (mid, hi)
            assert min_time(SQUARE, EuclideanBall(c, s), [0, 0]).value == pytest.approx(hi, abs=1e-9)

    def test_euclidean_closed_forms(self):
        x = np.array([3.0, 4.0])
        assert min_time(E2, EuclideanBall([0, 0], 2), x).value == pytest.approx(3)
        assert min_time(E2, PointCloud([[0, 0], [3, 5]]), x).value == pytest.approx(1)
        assert min_time(E2, Halfspace([0, 2], 2), x).value == pytest.approx(3)
        assert min_time(E2, VPolytope([[0, 0], [6, 0]]), x).value == pytest.approx(4)

    def test_agrees_with_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(60):
            F = random_gauge(rng, 2)
            Q = random_target(rng, 2, CONVEX)
            x = rng.normal(size=2) * 3
            scene = Scene(2, "sib", F, [Q])
            assert min_time(F, Q, x).value == pytest.approx(feasibility_radius(scene, x), abs=1e-7)


class TestWitness:
    @pytest.mark.parametrize("seed", range(4))
    def test_membership_and_value(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(50):
            F = random_gauge(rng, 2)
            x = rng.normal(size=2) * 3
            Q = random_target(rng, 2, BOUNDED)
            tv = max_time(F, Q, x)
            assert _in_target(Q, tv.witness)
            assert gauge_value(F, tv.witness - x) == pytest.approx(tv.value, abs=1e-8)
            Q = random_target(rng, 2)
            tv = min_time(F, Q, x)
            assert tv.attained
            assert _in_target(Q, tv.witness)
            assert gauge_value(F, tv.witness - x) == pytest.approx(tv.value, abs=1e-8)
            assert gauge_membership(F, tv.witness - x, tv.value + 1e-9)


class TestFarthestProjection:
    def test_symmetric(self):
        out = farthest_projection(E2, PointCloud([[0, 1], [0, -1]]), [0, 0], tol=1e-9)
        np.testing.assert_allclose(out, [[0, 1], [0, -1]])

    def test_single(self):
        out = farthest_projection(E2, PointCloud([[0, 1], [0, -1]]), [0, 0.5])
        np.testing.assert_allclose(out, [[0, -1]])

    def test_square_vertices(self):
        Q = VPolytope([[1, 1], [-1, 1], [-1, -1], [1, -1]])
        out = farthest_projection(SQUARE, Q, [0.25, 0])
        np.testing.assert_allclose(sorted(map(tuple, out)), [(-1, -1), (-1, 1)])

    def test_ball_unsupported(self):
        with pytest.raises(GeometryError):
            farthest_projection(E2, EuclideanBall([0, 0], 1), [0, 0])


class TestObjectives:
    def test_seb_on_segment(self):
        obj = seb_objective(square_two_points(), [0.5, 0])
        assert obj.value == pytest.approx(1)
        assert obj.active_indices == (0, 1)

    def test_seb_off_segment(self):
        obj = seb_objective(square_two_points(), [0, 0.5])
        assert obj.value == pytest.approx(1.5)
        assert obj.active_indices == (1,)

    def test_seb_singleton_zero(self):
        scene = Scene(2, "seb", E2, [PointCloud([[1, 2]])])
        assert seb_objective(scene, [1, 2]).value == 0

    def test_sib_on_line(self):
        obj = sib_objective(parallel_halfplanes(), [7, 0])
        assert obj.value == pytest.approx(1)
        assert obj.active_indices == (0, 1)

    def test_sib_off_line(self):
        obj = sib_objective(parallel_halfplanes(), [0, 0.5])
        assert obj.value == pytest.approx(1.5)
        assert obj.active_indices == (1,)

    def test_sib_inside_all(self):
        scene = Scene(2, "sib", SQUARE, [EuclideanBall([0, 0], 1), Halfspace([1, 0], 0.5)])
        assert sib_objective(scene, [0, 0]).value == 0

    def test_per_target_and_active_invariant(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            problem = "seb" if rng.random() < 0.5 else "sib"
            kinds = BOUNDED if problem == "seb" else CONVEX
            scene = Scene(2, problem, random_gauge(rng), [random_target(rng, 2, kinds) for _ in range(3)])
            obj = objective(scene, rng.normal(size=2))
            assert obj.value == max(tv.value for tv in obj.per_target)
            assert obj.active_indices and obj.per_target[obj.active_indices[0]].value == obj.value


class TestSubgradients:
    def test_seb_square_direction(self):
        scene = square_two_points()
        g = seb_subgradient(scene, [0, 0.5])
        np.testing.assert_allclose(g, [0, 1])
        assert seb_objective(scene, [0, 0.25]).value == pytest.approx(1.25)

    def test_sib_halfspace(self):
        scene = Scene(2, "sib", E2, [Halfspace([0, -1], -1)])
        np.testing.assert_allclose(sib_subgradient(scene, [0, 0]), [0, -1])

    def test_sib_zero_at_minimum(self):
        scene = Scene(2, "sib", E2, [EuclideanBall([0, 0], 1)])
        np.testing.assert_array_equal(sib_subgradient(scene, [0.2, 0.1]), [0, 0])


class TestProperties:
    @pytest.mark.parametrize("problem", ["seb", "sib"])
    def test_convexity(self, problem):
        assert objective_convexity_violation(np.random.default_rng(20), problem) <= 1e-9

    @pytest.mark.parametrize("problem", ["seb", "sib"])
    def test_lipschitz(self, problem):
        assert objective_lipschitz_violation(np.random.default_rng(21), problem) <= 1e-9

    @pytest.mark.parametrize("problem", ["seb", "sib"])
    def test_subgradient_inequality(self, problem):
        assert objective_subgradient_violation(np.random.default_rng(22), problem) <= 1e-8

    def test_seb_matches_definition(self):
        rng = np.random.default_rng(23)
        for _ in range(40):
            F = random_gauge(rng, 2)
            scene = Scene(2, "seb", F, [random_target(rng, 2, BOUNDED) for _ in range(2)])
            x = rng.normal(size=2) * 3
            assert objective(scene, x).value == pytest.approx(feasibility_radius(scene, x), abs=1e-7)

    @given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.01, 50))
    def test_square_seb_homogeneous(self, a, b, lam):
        scene = square_two_points()
        scaled = Scene(2, "seb", SQUARE, [PointCloud([[0, lam]]), PointCloud([[0, -lam]])])
        v = objective(scene, [a, b]).value
        assert objective(scaled, [lam * a, lam * b]).value == pytest.approx(lam * v, rel=1e-12)
