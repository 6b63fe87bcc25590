"""Wasserstein-1 distance on discrete measures with optimal plan and dual certificate."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .barycenter import barycenter
from .measures import DiscreteMeasure
from .spaces import SpaceMismatchError

MARGINAL_TOL = 1e-10
LIPSCHITZ_TOL = 1e-10
GAP_TOL = 1e-7


class CertificateError(RuntimeError):
    """The dual potential failed validation; indicates a solver bug."""


@dataclass
class Coupling:
    mu: DiscreteMeasure
    nu: DiscreteMeasure
    matrix: np.ndarray
    col_potentials: np.ndarray | None = field(default=None, repr=False)

    def cost(self) -> float:
        d = self.mu.space.pairwise(self.mu.atoms, self.nu.atoms)
        return float(np.sum(self.matrix * d))

    def check_marginals(self, tol: float = MARGINAL_TOL) -> bool:
        return bool(
            np.abs(self.matrix.sum(axis=1) - self.mu.weights).max() <= tol
            and np.abs(self.matrix.sum(axis=0) - self.nu.weights).max() <= tol
            and self.matrix.min() >= -tol
        )


@dataclass
class DualPotential:
    """1-Lipschitz test function sampled on the joint support (mu atoms then nu atoms)."""
    points: list
    values: np.ndarray
    n_mu: int

    def pairing(self, mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
        vmu = self.values[: self.n_mu]
        vnu = self.values[self.n_mu:]
        return float(np.dot(mu.weights, vmu) - np.dot(nu.weights, vnu))

    def lipschitz_constant(self, space) -> float:
        d = space.pairwise(self.points)
        diff = np.abs(self.values[:, None] - self.values[None, :])
        # Coincident support points: equal values give ratio 0, unequal ones
        # are a genuine violation.
        pos = d > 0
        ratios = np.where(pos, diff / np.where(pos, d, 1.0),
                          np.where(diff <= 1e-12, 0.0, np.inf))
        return float(np.max(ratios))


def _check_same_space(mu: DiscreteMeasure, nu: DiscreteMeasure) -> None:
    if mu.space is not nu.space and repr(mu.space) != repr(nu.space):
        raise SpaceMismatchError(f"measures live on different spaces: {mu.space!r} vs {nu.space!r}")


def _identical(mu: DiscreteMeasure, nu: DiscreteMeasure) -> bool:
    if mu is nu:
        return True
    if len(mu) != len(nu) or not np.array_equal(mu.weights, nu.weights):
        return False
    return all(mu.space.distance(a, b) == 0.0 for a, b in zip(mu.atoms, nu.atoms))


def _solve_lp(mu: DiscreteMeasure, nu: DiscreteMeasure, cost: np.ndarray):
    """Transportation LP via HiGHS; returns (plan, row potentials, col potentials).

    The last column constraint is dropped (it is redundant), which pins the
    corresponding dual potential to zero — the usual normalization.
    """
    m, n = cost.shape
    c = cost.reshape(-1)
    rows = []
    data_cols = []
    for i in range(m):
        row = np.zeros((m, n))
        row[i, :] = 1.0
        rows.append(row.reshape(-1))
    for j in range(n - 1):
        col = np.zeros((m, n))
        col[:, j] = 1.0
        rows.append(col.reshape(-1))
    A_eq = np.array(rows)
    b_eq = np.concatenate([mu.weights, nu.weights[:-1]])
    res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if not res.success:
        raise CertificateError(f"transport LP failed: {res.message}")
    plan = res.x.reshape(m, n)
    duals = np.asarray(res.eqlin.marginals, dtype=float)
    u = duals[:m]
    v = np.concatenate([duals[m:], [0.0]])
    return plan, u, v


def w1(mu: DiscreteMeasure, nu: DiscreteMeasure) -> tuple[float, Coupling]:
    """Minimal expected transport distance and an optimal coupling."""
    _check_same_space(mu, nu)
    if _identical(mu, nu):
        plan = np.diag(mu.weights)
        return 0.0, Coupling(mu, nu, plan, col_potentials=np.zeros(len(nu)))
    cost = mu.space.pairwise(mu.atoms, nu.atoms)
    plan, _, v = _solve_lp(mu, nu, cost)
    coupling = Coupling(mu, nu, plan, col_potentials=v)
    return float(np.sum(plan * cost)), coupling


def dual_certificate(mu: DiscreteMeasure, nu: DiscreteMeasure, plan: Coupling) -> DualPotential:
    """1-Lipschitz potential proving near-optimality of the given plan.

    Built from the LP column potentials v by the distance transform
    psi(z) = min_j (d(z, y_j) - v_j), which is 1-Lipschitz by construction and
    matches the plan's cost on the dual side at optimality.
    """
    _check_same_space(mu, nu)
    if not plan.check_marginals():
        raise CertificateError("coupling is not feasible for the given marginals")
    v = plan.col_potentials
    if v is None:
        cost = mu.space.pairwise(mu.atoms, nu.atoms)
        _, _, v = _solve_lp(mu, nu, cost)
    points = list(mu.atoms) + list(nu.atoms)
    d_to_nu = mu.space.pairwise(points, nu.atoms)
    values = np.min(d_to_nu - v[None, :], axis=1)
    psi = DualPotential(points, values, n_mu=len(mu))

    if psi.lipschitz_constant(mu.space) > 1.0 + LIPSCHITZ_TOL:
        raise CertificateError("dual potential is not 1-Lipschitz on the support")
    if psi.pairing(mu, nu) < plan.cost() - GAP_TOL:
        raise CertificateError(
            f"dual value {psi.pairing(mu, nu)!r} below plan cost {plan.cost()!r}"
        )
    return psi


def barycenter_contraction_defect(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Transport cost minus the distance between the two barycenters (nonnegative)."""
    value, _ = w1(mu, nu)
    cmu = barycenter(mu).point
    cnu = barycenter(nu).point
    return value - mu.space.distance(cmu, cnu)
