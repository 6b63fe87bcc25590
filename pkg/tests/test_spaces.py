import math

import numpy as np
import pytest

from cat0kit import (
    Euclidean,
    Hyperboloid,
    MetricTree,
    ProductSpace,
    SpaceMismatchError,
    TangentVector,
    UnsupportedSpaceError,
    cat0_midpoint_defect,
    reshetnyak_defect,
    tripod,
)
from cat0kit.spaces import minkowski_inner

from conftest import tree_distance_oracle


class TestDistances:
    def test_euclidean_pythagoras(self):
        E = Euclidean(2)
        assert E.distance(E.point([0, 0]), E.point([3, 4])) == 5.0

    def test_tripod_cross_leg(self, tripod_space):
        p = tripod_space.point("leg1", 1.0)
        q = tripod_space.point("leg2", 1.0)
        assert tripod_space.distance(p, q) == pytest.approx(2.0, abs=1e-15)

    def test_tripod_origin_to_half_leg(self, tripod_space):
        o = tripod_space.vertex_point("o")
        q = tripod_space.point("leg3", 0.5)
        assert tripod_space.distance(o, q) == pytest.approx(0.5, abs=1e-15)

    def test_tree_distance_matches_subdivision_oracle(self, deep_tree):
        rng = np.random.default_rng(7)
        for _ in range(300):
            p = deep_tree.random_point(rng)
            q = deep_tree.random_point(rng)
            assert deep_tree.distance(p, q) == pytest.approx(
                tree_distance_oracle(deep_tree, p, q), abs=1e-10)

    def test_tree_pairwise_matches_scalar(self, deep_tree):
        rng = np.random.default_rng(8)
        pts = [deep_tree.random_point(rng) for _ in range(12)]
        D = deep_tree.pairwise(pts)
        for i in range(12):
            for j in range(12):
                assert D[i, j] == pytest.approx(deep_tree.distance(pts[i], pts[j]), abs=1e-12)

    def test_hyperboloid_pairwise_matches_scalar(self):
        H = Hyperboloid(3)
        rng = np.random.default_rng(9)
        pts = [H.random_point(rng) for _ in range(10)]
        D = H.pairwise(pts)
        for i in range(10):
            for j in range(10):
                assert D[i, j] == pytest.approx(H.distance(pts[i], pts[j]), abs=1e-12)

    def test_zero_iff_equal(self, space_battery):
        rng = np.random.default_rng(10)
        for space in space_battery.values():
            p = space.random_point(rng)
            assert space.distance(p, p) == 0.0
            q = space.random_point(rng)
            if space.distance(p, q) == 0.0:
                continue  # astronomically unlikely
            assert space.distance(p, q) > 0

    def test_triangle_inequality(self, space_battery):
        for idx, space in enumerate(space_battery.values()):
            rng = np.random.default_rng(100 + idx)
            for _ in range(400):
                p, q, r = (space.random_point(rng) for _ in range(3))
                assert space.distance(p, r) <= space.distance(p, q) + space.distance(q, r) + 1e-9

    def test_mismatched_points_rejected(self, tripod_space):
        E2, E3 = Euclidean(2), Euclidean(3)
        with pytest.raises(SpaceMismatchError):
            E2.distance(E2.point([0, 0]), E3.point([0, 0, 0]))
        with pytest.raises(SpaceMismatchError):
            tripod_space.distance(E2.point([0, 0]), tripod_space.point("leg1", 0.5))


class TestGeodesics:
    def test_euclidean_interpolation(self):
        E = Euclidean(2)
        g = E.geodesic_point(E.point([0, 0]), E.point([2, 0]), 0.25)
        assert np.allclose(g, [0.5, 0.0])

    def test_tripod_midpoint_matches_known_value(self, tripod_space):
        o = tripod_space.vertex_point("o")
        tip = tripod_space.point("leg3", 1.0)
        mid = tripod_space.geodesic_point(o, tip, 0.5)
        assert tripod_space.distance(mid, tripod_space.point("leg3", 0.5)) == 0.0

    def test_endpoints(self, space_battery):
        rng = np.random.default_rng(11)
        for space in space_battery.values():
            p, q = space.random_point(rng), space.random_point(rng)
            assert space.distance(space.geodesic_point(p, q, 0.0), p) == 0.0
            assert space.distance(space.geodesic_point(p, q, 1.0), q) == 0.0

    def test_constant_speed(self, space_battery):
        for idx, space in enumerate(space_battery.values()):
            rng = np.random.default_rng(200 + idx)
            for _ in range(200):
                p, q = space.random_point(rng), space.random_point(rng)
                d = space.distance(p, q)
                s, t = sorted(rng.uniform(size=2))
                gs = space.geodesic_point(p, q, s)
                gt = space.geodesic_point(p, q, t)
                assert space.distance(gs, gt) == pytest.approx((t - s) * d, abs=1e-9 * max(1, d))

    def test_t_out_of_range(self, tripod_space):
        p = tripod_space.point("leg1", 0.5)
        q = tripod_space.point("leg2", 0.5)
        with pytest.raises(ValueError):
            tripod_space.geodesic_point(p, q, 1.5)
        with pytest.raises(ValueError):
            tripod_space.geodesic_point(p, q, -0.1)

    def test_tree_geodesic_stays_on_path(self, deep_tree):
        rng = np.random.default_rng(12)
        for _ in range(200):
            p, q = deep_tree.random_point(rng), deep_tree.random_point(rng)
            d = deep_tree.distance(p, q)
            t = float(rng.uniform())
            g = deep_tree.geodesic_point(p, q, t)
            assert deep_tree.distance(p, g) == pytest.approx(t * d, abs=1e-10)
            assert deep_tree.distance(g, q) == pytest.approx((1 - t) * d, abs=1e-10)


class TestTangentMaps:
    def test_log_at_self_is_zero(self, space_battery):
        rng = np.random.default_rng(13)
        for space in space_battery.values():
            if not space.has_tangent_maps:
                continue
            p = space.random_point(rng)
            assert space.tangent_norm(space.log_map(p, p)) == pytest.approx(0.0, abs=1e-12)

    def test_euclidean_log_is_difference(self):
        E = Euclidean(3)
        b, t = E.point([1, 2, 3]), E.point([4, 6, 3])
        assert np.allclose(E.log_map(b, t).vec, [3, 4, 0])

    def test_roundtrip_and_norm(self):
        spaces = [Euclidean(2), Hyperboloid(1), Hyperboloid(3),
                  ProductSpace([Euclidean(2), Hyperboloid(2)])]
        for idx, space in enumerate(spaces):
            rng = np.random.default_rng(300 + idx)
            for _ in range(200):
                b, t = space.random_point(rng), space.random_point(rng)
                v = space.log_map(b, t)
                assert space.tangent_norm(v) == pytest.approx(space.distance(b, t), abs=1e-10)
                back = space.exp_map(b, v)
                flat_t = np.concatenate([np.ravel(x) for x in (t if isinstance(t, tuple) else (t,))])
                flat_b = np.concatenate([np.ravel(x) for x in (back if isinstance(back, tuple) else (back,))])
                assert np.allclose(flat_b, flat_t, rtol=1e-9, atol=1e-9)

    def test_hyperboloid_one_dim_closed_form(self):
        H = Hyperboloid(1)
        base = H.base_point()
        s = 0.8
        target = H.point([math.cosh(s), math.sinh(s)])
        v = H.log_map(base, target)
        assert H.tangent_norm(v) == pytest.approx(s, abs=1e-12)
        assert minkowski_inner(base, np.asarray(v.vec)) == pytest.approx(0.0, abs=1e-10)

    def test_tree_has_no_tangent_maps(self, tripod_space):
        p = tripod_space.point("leg1", 0.5)
        with pytest.raises(UnsupportedSpaceError):
            tripod_space.log_map(p, p)
        with pytest.raises(UnsupportedSpaceError):
            tripod_space.exp_map(p, TangentVector(p, np.zeros(2)))

    def test_hyperboloid_constraint_preserved(self):
        H = Hyperboloid(2)
        rng = np.random.default_rng(14)
        for _ in range(300):
            p, q = H.random_point(rng), H.random_point(rng)
            g = H.geodesic_point(p, q, float(rng.uniform()))
            assert abs(minkowski_inner(g, g) + 1.0) <= 1e-10 * max(1.0, g[0] ** 2)


class TestComparisonDefects:
    def test_euclidean_midpoint_equality(self):
        E = Euclidean(3)
        rng = np.random.default_rng(15)
        for _ in range(200):
            x, y, z = (E.random_point(rng) for _ in range(3))
            assert abs(cat0_midpoint_defect(E, x, y, z)) <= 1e-10

    def test_tripod_midpoint_value(self, tripod_space):
        x = tripod_space.point("leg1", 1.0)
        y = tripod_space.point("leg2", 1.0)
        z = tripod_space.point("leg3", 1.0)
        # Midpoint of y,z is the branch vertex: 1/2*4 + 1/2*4 - 1/4*4 - 1 = 2.
        assert cat0_midpoint_defect(tripod_space, x, y, z) == pytest.approx(2.0, abs=1e-12)

    def test_degenerate_midpoint(self, space_battery):
        rng = np.random.default_rng(16)
        for space in space_battery.values():
            x, y = space.random_point(rng), space.random_point(rng)
            assert cat0_midpoint_defect(space, x, y, y) == pytest.approx(0.0, abs=1e-9)

    def test_euclidean_square_reshetnyak(self):
        E = Euclidean(2)
        c = [E.point(v) for v in ([0, 0], [1, 0], [1, 1], [0, 1])]
        assert reshetnyak_defect(E, *c) == pytest.approx(0.0, abs=1e-12)

    def test_tripod_reshetnyak_value(self, tripod_space):
        pts = [tripod_space.point(f"leg{i}", 1.0) for i in (1, 2, 3)]
        pts.append(tripod_space.vertex_point("o"))
        assert reshetnyak_defect(tripod_space, *pts) == pytest.approx(5.0, abs=1e-12)

    def test_coincident_reshetnyak(self, space_battery):
        rng = np.random.default_rng(17)
        for space in space_battery.values():
            x = space.random_point(rng)
            assert reshetnyak_defect(space, x, x, x, x) == 0.0

    def test_nonnegative_on_random_tuples(self, space_battery):
        for idx, space in enumerate(space_battery.values()):
            rng = np.random.default_rng(400 + idx)
            for _ in range(300):
                x, y, z, u = (space.random_point(rng) for _ in range(4))
                assert cat0_midpoint_defect(space, x, y, z) >= -1e-9
                assert reshetnyak_defect(space, x, y, z, u) >= -1e-9


class TestTreeStructure:
    def test_vertex_points_compare_equal(self, tripod_space):
        a = tripod_space.point("leg1", 0.0)
        b = tripod_space.point("leg2", 0.0)
        c = tripod_space.vertex_point("o")
        assert a == b == c

    def test_offset_snapping(self, tripod_space):
        tip = tripod_space.point("leg1", 1.0 - 1e-14)
        assert tip == tripod_space.vertex_point("t1")

    def test_offset_bounds(self, tripod_space):
        with pytest.raises(SpaceMismatchError):
            tripod_space.point("leg1", 1.5)
        with pytest.raises(SpaceMismatchError):
            tripod_space.point("nope", 0.5)

    def test_rejects_cycle_and_disconnected(self):
        with pytest.raises(ValueError):
            MetricTree(["a", "b", "c"], [("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)])
        with pytest.raises(ValueError):
            MetricTree(["a", "b", "c", "d"], [("a", "b", 1.0), ("c", "d", 1.0), ("a", "b", 2.0)])

    def test_rejects_bad_lengths(self):
        with pytest.raises(ValueError):
            MetricTree(["a", "b"], [("a", "b", 0.0)])

    def test_product_metric_recomputed(self, space_battery):
        space = space_battery["plane_x_tripod"]
        rng = np.random.default_rng(18)
        for _ in range(200):
            p, q = space.random_point(rng), space.random_point(rng)
            expect = math.sqrt(sum(
                c.distance(a, b) ** 2 for c, a, b in zip(space.components, p, q)))
            assert space.distance(p, q) == pytest.approx(expect, abs=1e-12)

    def test_product_needs_two_components(self):
        with pytest.raises(ValueError):
            ProductSpace([Euclidean(2)])

    def test_single_vertex_tree(self):
        T = MetricTree(["only"], [])
        p = T.vertex_point("only")
        assert T.distance(p, p) == 0.0
        rng = np.random.default_rng(19)
        assert T.random_point(rng) == p
        assert T.geodesic_point(p, p, 0.5) == p
        assert T.pairwise([p, p]).max() == 0.0
