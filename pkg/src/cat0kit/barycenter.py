"""Center-of-mass solvers per space kind, plus the variance and distance-Jensen defects."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import DiscreteMeasure
from .spaces import (
    Euclidean,
    Hyperboloid,
    MetricTree,
    ProductSpace,
    TangentVector,
    TreePoint,
)

# Stop below the documented 1e-10 contract: downstream defect checks compare
# the optimum against competitors at 1e-9 slack, and their sensitivity to the
# barycenter position is of order diameter * position error.
KARCHER_TOL = 1e-11
KARCHER_MAX_ITER = 10_000


class NonConvergenceError(RuntimeError):
    """Fixed-point iteration hit its cap; carries the best iterate found."""

    def __init__(self, message: str, best: "BarycenterResult"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class BarycenterResult:
    point: object
    frechet_value: float
    certificate: str
    iterations: int | None = None
    residual: float | None = None


def frechet_value(nu: DiscreteMeasure, x) -> float:
    """Weighted sum of squared distances from x to the atoms."""
    d = nu.space.pairwise([x], nu.atoms)[0]
    return float(np.dot(nu.weights, d * d))


def tangent_mean(nu: DiscreteMeasure, x) -> TangentVector:
    space = nu.space
    logs = [space.log_map(x, a) for a in nu.atoms]
    return space.tangent_sum(x, logs, nu.weights)


def tangent_mean_residual(nu: DiscreteMeasure, x) -> float:
    """Norm of the weighted log-map mean; zero exactly at the barycenter."""
    space = nu.space
    return space.tangent_norm(tangent_mean(nu, x))


def _euclidean_barycenter(nu: DiscreteMeasure) -> BarycenterResult:
    mean = np.einsum("i,ij->j", nu.weights, np.asarray(nu.atoms, dtype=float))
    point = nu.space.point(mean)
    return BarycenterResult(point, frechet_value(nu, point), "closed-form")


def _tree_barycenter(nu: DiscreteMeasure) -> BarycenterResult:
    """Exact minimizer by closed-form quadratic minimization on every edge.

    Restricted to an edge, each atom distance is an affine function of the
    offset (or |s - t| for atoms on that edge), so the objective is exactly
    s^2 + 2Bs + C; the global optimum is the best of the per-edge minima.
    """
    tree: MetricTree = nu.space
    w = nu.weights
    vertex_pts = [tree._vertex_rep[i] for i in range(len(tree.vertices))]
    atom_to_vertex = tree.pairwise(nu.atoms, vertex_pts)
    atom_edges = np.array([a.edge for a in nu.atoms], dtype=int)
    atom_offsets = np.array([a.offset for a in nu.atoms], dtype=float)

    best_val = np.inf
    best_point = None
    for k in range(tree.n_edges):
        u, v = int(tree.edge_u[k]), int(tree.edge_v[k])
        ln = float(tree.edge_len[k])
        du = atom_to_vertex[:, u]
        dv = atom_to_vertex[:, v]
        on_edge = atom_edges == k
        # d(x(s), a) = sigma*s + c with sigma = +1 on u's side, -1 on v's side.
        sigma = np.where(du <= dv, 1.0, -1.0)
        c = np.where(du <= dv, du, ln + dv)
        sigma = np.where(on_edge, 1.0, sigma)
        c = np.where(on_edge, -atom_offsets, c)
        B = float(np.dot(w, sigma * c))
        C = float(np.dot(w, c * c))
        s = min(max(-B, 0.0), ln)
        val = s * s + 2.0 * B * s + C
        if val < best_val:
            best_val = val
            best_point = tree.canonical(TreePoint(k, s))
    point = best_point
    return BarycenterResult(point, frechet_value(nu, point), "convex-descent")


def _karcher_barycenter(nu: DiscreteMeasure) -> BarycenterResult:
    """Damped fixed-point iteration x <- exp_x(t * mean of log_x(atoms)).

    The unit step is not always stable: in curvature -1 the squared-distance
    objective's Hessian grows like d*coth(d), so spread-out atoms make the
    full step oscillate. Capping the step at 1/max_i(d_i coth d_i) keeps every
    local linearization a nonnegative contraction, which converges to the
    gradient-norm target without needing objective decreases resolvable in
    floating point.
    """
    space = nu.space
    x = nu.atoms[int(np.argmax(nu.weights))]
    best_x, best_res = x, np.inf
    for it in range(1, KARCHER_MAX_ITER + 1):
        g = tangent_mean(nu, x)
        res = space.tangent_norm(g)
        if res < best_res:
            best_x, best_res = x, res
        if res <= KARCHER_TOL:
            return BarycenterResult(x, frechet_value(nu, x), "fixed-point", it, res)
        d = space.pairwise([x], nu.atoms)[0]
        hess_bound = float(np.max(np.where(d < 1e-12, 1.0, d / np.tanh(np.maximum(d, 1e-300)))))
        t = min(1.0, 1.0 / hess_bound)
        x = space.exp_map(x, g.scaled(t))
    best = BarycenterResult(best_x, frechet_value(nu, best_x), "fixed-point",
                            KARCHER_MAX_ITER, best_res)
    raise NonConvergenceError(
        f"iteration stalled at residual {best_res:.3e} "
        f"(target {KARCHER_TOL}, cap {KARCHER_MAX_ITER})", best)


def _product_barycenter(nu: DiscreteMeasure) -> BarycenterResult:
    """The squared-distance objective splits under the l2 product metric."""
    space: ProductSpace = nu.space
    parts = []
    certs = []
    iterations = None
    residual = None
    for i, comp in enumerate(space.components):
        comp_nu = DiscreteMeasure(comp, [a[i] for a in nu.atoms], nu.weights)
        r = barycenter(comp_nu)
        parts.append(r.point)
        certs.append(r.certificate)
        if r.iterations is not None:
            iterations = max(iterations or 0, r.iterations)
        if r.residual is not None:
            residual = max(residual or 0.0, r.residual)
    point = tuple(parts)
    if "fixed-point" in certs:
        cert = "fixed-point"
    elif "convex-descent" in certs:
        cert = "convex-descent"
    else:
        cert = "closed-form"
    return BarycenterResult(point, frechet_value(nu, point), cert, iterations, residual)


def barycenter(nu: DiscreteMeasure) -> BarycenterResult:
    """Unique minimizer of the weighted squared-distance objective over the space."""
    if nu.is_point_mass():
        a = nu.atoms[0]
        return BarycenterResult(a, 0.0, "closed-form")
    space = nu.space
    if isinstance(space, Euclidean):
        return _euclidean_barycenter(nu)
    if isinstance(space, MetricTree):
        return _tree_barycenter(nu)
    if isinstance(space, Hyperboloid):
        return _karcher_barycenter(nu)
    if isinstance(space, ProductSpace):
        return _product_barycenter(nu)
    raise TypeError(f"no barycenter solver for {space!r}")


def generic_barycenter_crosscheck(nu: DiscreteMeasure, seed: int, draws: int = 100_000):
    """Stochastic inductive-mean iteration, independent of the exact solvers.

    Draws atoms by weight and contracts the running point toward each draw with
    step 1/(k+1); test-only validation tool with O(1/sqrt(draws)) error.
    """
    rng = np.random.default_rng(seed)
    space = nu.space
    idx = rng.choice(len(nu.atoms), size=draws, p=nu.weights / nu.weights.sum())
    point = nu.atoms[idx[0]]
    for k in range(1, draws):
        point = space.geodesic_point(point, nu.atoms[idx[k]], 1.0 / (k + 1))
    return point


def variance_defect(nu: DiscreteMeasure, z) -> float:
    """Strengthened optimality slack of the barycenter against a competitor z.

    Nonnegative everywhere; identically zero when the space is Euclidean.
    """
    nu.space.validate(z)
    c = barycenter(nu).point
    dz = nu.space.pairwise([z], nu.atoms)[0]
    dc = nu.space.pairwise([c], nu.atoms)[0]
    lhs = float(np.dot(nu.weights, dz * dz - dc * dc))
    return lhs - nu.space.distance(z, c) ** 2


def distance_jensen_defect(nu: DiscreteMeasure, p0) -> float:
    """Mean distance to p0 minus the distance from p0 to the barycenter."""
    nu.space.validate(p0)
    c = barycenter(nu).point
    d = nu.space.pairwise([p0], nu.atoms)[0]
    return float(np.dot(nu.weights, d)) - nu.space.distance(p0, c)
