import math

import numpy as np
import pytest

from cat0kit import Euclidean, Hyperboloid, MMSpace, MapTable, product_mm, tripod
from cat0kit.cli import build_tripod_instance
from cat0kit.obsvar import (
    GraphMM,
    LipschitzWitness,
    NotLipschitzError,
    TREE_LINE_FACTOR,
    certify_lipschitz,
    complete_graph,
    cycle_graph,
    graph_gap,
    hypercube_graph,
    obsvar_lower_bound,
    path_graph,
    product_split_defect,
    product_split_defect_sharp,
    random_connected_graph,
    random_lipschitz_map,
    spectral_obsvar_check,
    tree_comparison_check,
)
from cat0kit.suites import random_mm_space


class TestCertifyLipschitz:
    def test_constant_map(self, tripod_space):
        dom = product_mm(MMSpace.uniform_two_point(), MMSpace.uniform_two_point())
        f = MapTable(dom, tripod_space, [tripod_space.point("leg1", 0.5)] * 4)
        w = certify_lipschitz(f)
        assert w.lipschitz_constant == 0.0
        assert w.variation == 0.0

    def test_identity_on_two_points(self):
        E = Euclidean(1)
        X = MMSpace.uniform_two_point()
        f = MapTable(X, E, [E.point([0.0]), E.point([1.0])])
        w = certify_lipschitz(f)
        assert w.lipschitz_constant == pytest.approx(1.0, abs=1e-12)

    def test_tripod_benchmark_rejected_as_unit(self):
        f, _ = build_tripod_instance()
        with pytest.raises(NotLipschitzError) as info:
            certify_lipschitz(f, require_unit=True)
        assert info.value.ratio == pytest.approx(2.0, abs=1e-12)

    def test_witness_revalidates(self, space_battery):
        rng = np.random.default_rng(50)
        for space in space_battery.values():
            dom = product_mm(random_mm_space(rng, 4), random_mm_space(rng, 4))
            f = random_lipschitz_map(dom, space, rng)
            w = certify_lipschitz(f)
            assert w.lipschitz_constant <= 1 + 1e-9
            again = certify_lipschitz(w.map, w.p)
            assert again.lipschitz_constant == w.lipschitz_constant


class TestRandomLipschitzMaps:
    def test_always_feasible(self, space_battery):
        for idx, space in enumerate(space_battery.values()):
            rng = np.random.default_rng(1400 + idx)
            for _ in range(20):
                dom = product_mm(random_mm_space(rng, 5), random_mm_space(rng, 5))
                f = random_lipschitz_map(dom, space, rng)
                assert certify_lipschitz(f).lipschitz_constant <= 1 + 1e-9


class TestObsvarLowerBound:
    def test_two_point_euclidean_optimum(self):
        X = MMSpace.uniform_two_point()
        bound, witness = obsvar_lower_bound(X, Euclidean(1), 2.0, budget=8, seed=42)
        assert bound == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-9)
        assert witness.lipschitz_constant <= 1 + 1e-9

    def test_singleton_domain(self):
        X = MMSpace(["only"], [[0.0]], [1.0])
        bound, _ = obsvar_lower_bound(X, Euclidean(2), 2.0, budget=3, seed=1)
        assert bound == 0.0

    def test_one_point_tree_target(self):
        from cat0kit import MetricTree
        T = MetricTree(["only"], [])
        X = MMSpace.uniform_two_point()
        bound, _ = obsvar_lower_bound(X, T, 2.0, budget=3, seed=2)
        assert bound == 0.0

    def test_monotone_in_budget(self):
        rng_mm = np.random.default_rng(51)
        X = random_mm_space(rng_mm, 4)
        prev = -1.0
        for budget in range(1, 7):
            bound, _ = obsvar_lower_bound(X, Euclidean(2), 2.0, budget=budget, seed=9)
            assert bound >= prev - 1e-15
            prev = bound


class TestProductSplit:
    def test_constant_map_zero(self, tripod_space):
        dom = product_mm(MMSpace.uniform_two_point(), MMSpace.uniform_two_point())
        f = MapTable(dom, tripod_space, [tripod_space.point("leg1", 0.5)] * 4)
        assert product_split_defect(f, 1.0) == pytest.approx(0.0, abs=1e-15)
        assert product_split_defect_sharp(f) == pytest.approx(0.0, abs=1e-15)

    def test_slice_constant_equality_case(self):
        E = Euclidean(1)
        dom = product_mm(MMSpace.uniform_two_point(), MMSpace.uniform_two_point())
        values = [None] * 4
        for j in range(2):
            values[dom.index(0, j)] = E.point([0.0])
            values[dom.index(1, j)] = E.point([1.0])
        f = MapTable(dom, E, values)
        assert product_split_defect(f, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_tripod_benchmark_sharp_value(self):
        # E_x V2(f^x)^2 = 2, E_y V2(f^y)^2 = 1, V2(f)^2 = 5/2: defect 1/2.
        f, _ = build_tripod_instance()
        assert product_split_defect_sharp(f) == pytest.approx(0.5, abs=1e-9)
        assert product_split_defect(f, 2.0) == pytest.approx(3.5, abs=1e-9)

    def test_nonnegative_on_lipschitz_maps(self, space_battery):
        for idx, space in enumerate(space_battery.values()):
            rng = np.random.default_rng(1500 + idx)
            for _ in range(15):
                dom = product_mm(random_mm_space(rng, 4), random_mm_space(rng, 4))
                f = random_lipschitz_map(dom, space, rng)
                for p in (1.0, 2.0, 3.0):
                    assert product_split_defect(f, p) >= -1e-9
                assert product_split_defect_sharp(f) >= -1e-9


class TestGraphGap:
    def test_complete_graph_closed_form(self):
        for n in range(2, 11):
            assert graph_gap(complete_graph(n)) == pytest.approx(2 * n / (n - 1), abs=1e-8)

    def test_cycle_four(self):
        assert graph_gap(cycle_graph(4)) == pytest.approx(2.0, abs=1e-8)

    def test_single_edge_path(self):
        assert graph_gap(path_graph(2)) == pytest.approx(4.0, abs=1e-8)

    def test_rayleigh_probes_never_below_gap(self):
        rng = np.random.default_rng(52)
        for G in (complete_graph(5), cycle_graph(7), hypercube_graph(3),
                  random_connected_graph(9, rng)):
            lam = graph_gap(G)
            g = rng.standard_normal((2000, G.n))
            g -= g.mean(axis=1, keepdims=True)
            edges = np.array(G.edges)
            energy = ((g[:, edges[:, 0]] - g[:, edges[:, 1]]) ** 2).mean(axis=1)
            norms = (g**2).mean(axis=1)
            assert float((energy / norms).min()) >= lam - 1e-8

    def test_disconnected_rejected(self):
        with pytest.raises(Exception):
            GraphMM(4, [(0, 1), (2, 3)])

    def test_invalid_edges_rejected(self):
        with pytest.raises(Exception):
            GraphMM(3, [(0, 0), (0, 1), (1, 2)])
        with pytest.raises(Exception):
            GraphMM(3, [(0, 1), (1, 0), (1, 2)])


class TestSpectralCheck:
    def test_k2_bound_and_slack(self):
        G = complete_graph(2)
        assert graph_gap(G) == pytest.approx(4.0, abs=1e-12)
        slack = spectral_obsvar_check(G, Euclidean(1), trials=60, seed=7)
        # Bound is 1; the best unit-Lipschitz map reaches V2 = 1/sqrt(2).
        assert slack >= 1 - 1 / math.sqrt(2) - 1e-9

    def test_dimension_monotonicity(self):
        G = cycle_graph(5)
        s1 = spectral_obsvar_check(G, Euclidean(1), trials=25, seed=3)
        s2 = spectral_obsvar_check(G, Euclidean(2), trials=25, seed=3)
        lam = graph_gap(G)
        assert 2 * math.sqrt(2 / lam) > 2 * math.sqrt(1 / lam)
        assert s1 >= -1e-9 and s2 >= -1e-9

    def test_family_nonnegative(self):
        rng = np.random.default_rng(53)
        graphs = [complete_graph(4), cycle_graph(6), hypercube_graph(2),
                  random_connected_graph(7, rng)]
        for g_idx, G in enumerate(graphs):
            for dim in (1, 2):
                for target in (Euclidean(dim), Hyperboloid(dim)):
                    slack = spectral_obsvar_check(G, target, trials=10, seed=100 + g_idx)
                    assert slack >= -1e-9

    def test_rejects_tree_target(self, tripod_space):
        with pytest.raises(TypeError):
            spectral_obsvar_check(complete_graph(3), tripod_space, trials=1, seed=0)


class TestTreeComparison:
    def test_two_point_domain_huge_slack(self):
        X = MMSpace.uniform_two_point()
        slack = tree_comparison_check(X, tripod(), budget=6, seed=11)
        # Both estimates coincide, so the slack is about (factor - 1) * bound^2.
        assert slack >= (TREE_LINE_FACTOR - 1.5) * 0.5

    def test_three_cycle_domain_consistent(self):
        X = MMSpace(["u", "v", "w"],
                    [[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]],
                    [1 / 3, 1 / 3, 1 / 3])
        slack = tree_comparison_check(X, tripod(), budget=6, seed=12)
        assert slack >= -1e-6
