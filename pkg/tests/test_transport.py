import numpy as np
import pytest

from cat0kit import (
    CertificateError,
    DiscreteMeasure,
    Euclidean,
    SpaceMismatchError,
    barycenter_contraction_defect,
    dual_certificate,
    w1,
)
from cat0kit.suites import permutation_oracle_w1

from conftest import random_measure_on, uniform_measure_on


class TestW1:
    def test_point_masses(self, tripod_space):
        mu = DiscreteMeasure(tripod_space, [tripod_space.point("leg1", 1.0)], [1.0])
        nu = DiscreteMeasure(tripod_space, [tripod_space.point("leg2", 0.5)], [1.0])
        value, plan = w1(mu, nu)
        assert value == pytest.approx(1.5, abs=1e-12)
        assert plan.matrix.shape == (1, 1)
        assert plan.matrix[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_identical_measures(self, tripod_space):
        rng = np.random.default_rng(30)
        mu = random_measure_on(tripod_space, rng)
        value, plan = w1(mu, mu)
        assert value == 0.0
        assert plan.check_marginals()

    def test_interval_shift(self):
        E = Euclidean(1)
        mu = uniform_measure_on(E, [E.point([0.0]), E.point([1.0])])
        nu = uniform_measure_on(E, [E.point([2.0]), E.point([3.0])])
        value, _ = w1(mu, nu)
        assert value == pytest.approx(2.0, abs=1e-12)

    def test_matches_permutation_oracle(self, space_battery):
        for idx, space in enumerate(space_battery.values()):
            rng = np.random.default_rng(900 + idx)
            for _ in range(25):
                n = int(rng.integers(2, 8))
                mu = uniform_measure_on(space, [space.random_point(rng) for _ in range(n)])
                nu = uniform_measure_on(space, [space.random_point(rng) for _ in range(n)])
                if len(mu) != n or len(nu) != n:
                    continue
                value, _ = w1(mu, nu)
                assert value == pytest.approx(permutation_oracle_w1(mu, nu), abs=1e-12)

    def test_mismatched_spaces_rejected(self, tripod_space):
        E = Euclidean(1)
        mu = DiscreteMeasure(E, [E.point([0.0])], [1.0])
        nu = DiscreteMeasure(tripod_space, [tripod_space.point("leg1", 1.0)], [1.0])
        with pytest.raises(SpaceMismatchError):
            w1(mu, nu)

    def test_metric_properties(self, tripod_space):
        rng = np.random.default_rng(31)
        for _ in range(30):
            mu = random_measure_on(tripod_space, rng)
            nu = random_measure_on(tripod_space, rng)
            rho = random_measure_on(tripod_space, rng)
            ab, _ = w1(mu, nu)
            ba, _ = w1(nu, mu)
            assert abs(ab - ba) <= 1e-9
            ac, _ = w1(mu, rho)
            cb, _ = w1(rho, nu)
            assert ab <= ac + cb + 1e-8


class TestDualCertificate:
    def test_point_mass_certificate(self, tripod_space):
        mu = DiscreteMeasure(tripod_space, [tripod_space.point("leg1", 1.0)], [1.0])
        nu = DiscreteMeasure(tripod_space, [tripod_space.point("leg3", 1.0)], [1.0])
        value, plan = w1(mu, nu)
        psi = dual_certificate(mu, nu, plan)
        assert psi.pairing(mu, nu) == pytest.approx(value, abs=1e-10)

    def test_identical_measures_zero(self, tripod_space):
        rng = np.random.default_rng(32)
        mu = random_measure_on(tripod_space, rng)
        value, plan = w1(mu, mu)
        psi = dual_certificate(mu, mu, plan)
        assert psi.pairing(mu, mu) == pytest.approx(0.0, abs=1e-12)

    def test_interval_case_duality(self):
        E = Euclidean(1)
        mu = uniform_measure_on(E, [E.point([0.0]), E.point([1.0])])
        nu = uniform_measure_on(E, [E.point([2.0]), E.point([3.0])])
        value, plan = w1(mu, nu)
        psi = dual_certificate(mu, nu, plan)
        assert psi.pairing(mu, nu) >= value - 1e-7
        # On this instance psi behaves like u -> -u on the support (up to a constant).
        vals = dict(zip((float(p[0]) for p in psi.points), psi.values))
        diffs = {round(a - b, 9) for a, b in zip(sorted(vals), sorted(vals)[1:])}
        assert len(diffs) == 1

    def test_lipschitz_and_gap_random(self, space_battery):
        for idx, space in enumerate(space_battery.values()):
            rng = np.random.default_rng(1000 + idx)
            for _ in range(40):
                mu = random_measure_on(space, rng)
                nu = random_measure_on(space, rng)
                value, plan = w1(mu, nu)
                psi = dual_certificate(mu, nu, plan)
                assert psi.lipschitz_constant(space) <= 1.0 + 1e-10
                assert value - psi.pairing(mu, nu) <= 1e-7

    def test_infeasible_plan_rejected(self, tripod_space):
        rng = np.random.default_rng(33)
        mu = random_measure_on(tripod_space, rng, n_atoms=3)
        nu = random_measure_on(tripod_space, rng, n_atoms=3)
        _, plan = w1(mu, nu)
        broken = type(plan)(mu, nu, plan.matrix * 0.5, plan.col_potentials)
        with pytest.raises(CertificateError):
            dual_certificate(mu, nu, broken)


class TestBarycenterContraction:
    def test_point_masses_exact_zero(self, tripod_space):
        mu = DiscreteMeasure(tripod_space, [tripod_space.point("leg1", 0.7)], [1.0])
        nu = DiscreteMeasure(tripod_space, [tripod_space.point("leg2", 0.2)], [1.0])
        assert barycenter_contraction_defect(mu, nu) == pytest.approx(0.0, abs=1e-12)

    def test_tripod_known_value(self, tripod_space):
        mu = uniform_measure_on(
            tripod_space,
            [tripod_space.point("leg1", 1.0), tripod_space.point("leg2", 1.0)])
        nu = DiscreteMeasure(tripod_space, [tripod_space.point("leg3", 1.0)], [1.0])
        assert barycenter_contraction_defect(mu, nu) == pytest.approx(1.0, abs=1e-12)

    def test_translation_equivariance(self):
        E = Euclidean(2)
        rng = np.random.default_rng(34)
        shift = np.array([0.6, -0.3])
        atoms = [E.random_point(rng) for _ in range(5)]
        w = rng.random(5) + 0.1
        w /= w.sum()
        mu = DiscreteMeasure(E, atoms, w)
        nu = DiscreteMeasure(E, [E.point(a + shift) for a in atoms], w)
        assert barycenter_contraction_defect(mu, nu) == pytest.approx(0.0, abs=1e-9)

    def test_nonnegative_random(self, space_battery):
        for idx, space in enumerate(space_battery.values()):
            rng = np.random.default_rng(1100 + idx)
            for _ in range(40):
                mu = random_measure_on(space, rng)
                nu = random_measure_on(space, rng)
                assert barycenter_contraction_defect(mu, nu) >= -1e-9
