"""Observable variation estimation, product-splitting defects, and graph spectral bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .barycenter import barycenter
from .fubini import variation
from .measures import DiscreteMeasure, InvalidMeasureError, MapTable, MMSpace, pushforward
from .spaces import Euclidean, Hyperboloid, MetricTree, Space

UNIT_LIPSCHITZ_TOL = 1e-9
TREE_LINE_FACTOR = 38.0 + 16.0 * math.sqrt(2.0)
LOCAL_SEARCH_SWEEPS = 50


class NotLipschitzError(ValueError):
    """Raised when a unit-Lipschitz witness is demanded but the scan fails."""

    def __init__(self, message: str, pair: tuple[int, int], ratio: float):
        super().__init__(message)
        self.pair = pair
        self.ratio = ratio


@dataclass(frozen=True)
class LipschitzWitness:
    map: MapTable
    lipschitz_constant: float
    variation: float
    p: float


def _lipschitz_scan(f: MapTable) -> tuple[float, tuple[int, int]]:
    d_img = f.target.pairwise(f.values)
    d_dom = np.array(f.domain.metric)
    np.fill_diagonal(d_dom, 1.0)
    ratios = d_img / d_dom
    np.fill_diagonal(ratios, 0.0)
    i, j = np.unravel_index(int(np.argmax(ratios)), ratios.shape)
    return float(ratios[i, j]), (int(i), int(j))


def certify_lipschitz(f: MapTable, p: float = 2.0, require_unit: bool = False) -> LipschitzWitness:
    """Exact Lipschitz constant by full pairwise scan, with the achieved variation."""
    constant, pair = _lipschitz_scan(f)
    if require_unit and constant > 1.0 + UNIT_LIPSCHITZ_TOL:
        raise NotLipschitzError(
            f"map has Lipschitz constant {constant:.6g} > 1 at sample pair {pair}",
            pair, constant,
        )
    return LipschitzWitness(f, constant, variation(f, p), p)


def random_lipschitz_map(domain, target: Space, rng: np.random.Generator,
                         scale: float | None = None) -> MapTable:
    """Random map contracted onto the unit-Lipschitz constraint set.

    Images start as independent random points; while the pairwise scan fails,
    every image is pulled toward the pushforward barycenter along geodesics
    with the exact factor needed, which contracts all image distances at least
    proportionally (convexity of distance from a common basepoint).
    """
    if scale is None:
        scale = max(float(np.max(domain.metric)), 1.0)
    f = MapTable(domain, target, [target.random_point(rng, scale) for _ in range(domain.n)])
    for _ in range(64):
        constant, _ = _lipschitz_scan(f)
        if constant <= 1.0:
            return f
        center = barycenter(pushforward(f)).point
        t = (1.0 - 1e-12) / constant
        values = [target.geodesic_point(center, v, t) for v in f.values]
        f = MapTable(domain, target, values)
    return certify_lipschitz(f, require_unit=True).map


def _local_search(f: MapTable, p: float, rng: np.random.Generator,
                  sweeps: int = LOCAL_SEARCH_SWEEPS) -> MapTable:
    """Boundary-following coordinate ascent maximizing V_p under the pairwise constraints."""
    domain, target = f.domain, f.target
    n = domain.n
    w = domain.prob
    scale = max(float(np.max(domain.metric)), 1.0)
    d_dom = np.array(domain.metric) * (1.0 + 1e-12)
    values = list(f.values)
    d_img = target.pairwise(values)
    vp = float(w @ d_img**p @ w)
    for _ in range(sweeps):
        improved = False
        for i in rng.permutation(n):
            probe = target.random_point(rng, scale)
            for t in (1.0, 0.5, 0.25, 0.125):
                cand = target.geodesic_point(values[i], probe, t)
                row = target.pairwise([cand], values)[0]
                row[i] = 0.0
                if (row > d_dom[i]).any():
                    continue
                gain = 2.0 * w[i] * float(np.dot(w, row**p - d_img[i] ** p))
                if gain > 1e-15:
                    values[i] = cand
                    d_img[i, :] = row
                    d_img[:, i] = row
                    vp += gain
                    improved = True
                    break
        if not improved:
            break
    return MapTable(domain, target, values)


def obsvar_lower_bound(X: MMSpace, target: Space, p: float, budget: int,
                       seed: int) -> tuple[float, LipschitzWitness]:
    """Certified lower bound on the observable L^p-variation of X into the target.

    Best V_p over `budget` restarts of (random unit-Lipschitz map + local
    search); monotone in budget for a fixed seed since restart k draws its
    randomness from (seed, k).
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    best: LipschitzWitness | None = None
    for k in range(budget):
        rng = np.random.default_rng([seed, k])
        f = random_lipschitz_map(X, target, rng)
        f = _local_search(f, p, rng)
        witness = certify_lipschitz(f, p, require_unit=True)
        if best is None or witness.variation > best.variation:
            best = witness
    return best.variation, best


def product_split_defect(f: MapTable, p: float) -> float:
    """Slack of the power-mean splitting bound for maps on a product domain.

    Returns 2^(p-1) * (E_x V_p(f^x)^p + E_y V_p(f^y)^p) - V_p(f)^p, which is
    nonnegative for every target space.
    """
    if not f.is_product:
        raise InvalidMeasureError("product_split_defect needs a product domain")
    dom = f.domain
    ex = _mean_slice_variation_pow(f, p, fix="x")
    ey = _mean_slice_variation_pow(f, p, fix="y")
    return 2.0 ** (p - 1.0) * (ex + ey) - variation(f, p) ** p


def product_split_defect_sharp(f: MapTable) -> float:
    """Slack of the sharper p=2 splitting bound available on CAT(0) targets.

    Returns E_x V_2(f^x)^2 + E_y V_2(f^y)^2 - V_2(f)^2.
    """
    if not f.is_product:
        raise InvalidMeasureError("product_split_defect_sharp needs a product domain")
    ex = _mean_slice_variation_pow(f, 2.0, fix="x")
    ey = _mean_slice_variation_pow(f, 2.0, fix="y")
    return ex + ey - variation(f, 2.0) ** 2


def _mean_slice_variation_pow(f: MapTable, p: float, fix: str) -> float:
    dom = f.domain
    total = 0.0
    if fix == "x":
        for i in range(dom.X.n):
            pts = f.slice_fixed_x(i)
            d = f.target.pairwise(pts)
            total += dom.X.prob[i] * float(dom.Y.prob @ d**p @ dom.Y.prob)
    else:
        for j in range(dom.Y.n):
            pts = f.slice_fixed_y(j)
            d = f.target.pairwise(pts)
            total += dom.Y.prob[j] * float(dom.X.prob @ d**p @ dom.X.prob)
    return total


class GraphMM:
    """Finite connected simple graph with unit edges, shortest-path metric, uniform measure."""

    def __init__(self, n_vertices: int, edges):
        self.n = int(n_vertices)
        seen = set()
        for u, v in edges:
            if u == v:
                raise InvalidMeasureError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidMeasureError(f"edge ({u},{v}) out of range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InvalidMeasureError(f"duplicate edge {key}")
            seen.add(key)
        self.edges = sorted(seen)
        self.m = len(self.edges)
        rows = [u for u, v in self.edges] + [v for u, v in self.edges]
        cols = [v for u, v in self.edges] + [u for u, v in self.edges]
        adj = csr_matrix((np.ones(2 * self.m), (rows, cols)), shape=(self.n, self.n))
        self._dist = shortest_path(adj, method="D", unweighted=True)
        if np.isinf(self._dist).any():
            raise InvalidMeasureError("graph is not connected")

    def __repr__(self):
        return f"GraphMM({self.n} vertices, {self.m} edges)"

    def to_mm_space(self, scale: float = 1.0) -> MMSpace:
        labels = [str(i) for i in range(self.n)]
        return MMSpace(labels, scale * self._dist, np.full(self.n, 1.0 / self.n))

    def laplacian(self) -> np.ndarray:
        L = np.zeros((self.n, self.n))
        for u, v in self.edges:
            L[u, u] += 1.0
            L[v, v] += 1.0
            L[u, v] -= 1.0
            L[v, u] -= 1.0
        return L


def graph_gap(G: GraphMM) -> float:
    """Smallest nonzero eigenvalue of the edge-averaged Rayleigh quotient.

    The quotient (mean edge energy)/(mean vertex square) over mean-zero
    vectors equals (|V|/|E|) times the second Laplacian eigenvalue.
    """
    eig = np.linalg.eigvalsh(G.laplacian())
    mu2 = float(eig[1])
    return (G.n / G.m) * mu2


def spectral_obsvar_check(G: GraphMM, target: Space, trials: int, seed: int) -> float:
    """Worst slack of V_2(f) <= 2 sqrt(dim/lambda1) over random unit-Lipschitz maps."""
    if isinstance(target, Euclidean):
        dim = target.dim
    elif isinstance(target, Hyperboloid):
        dim = target.dim
    else:
        raise TypeError("spectral check targets are Euclidean or Hyperboloid")
    lam = graph_gap(G)
    bound = 2.0 * math.sqrt(dim / lam)
    X = G.to_mm_space()
    worst = math.inf
    for k in range(trials):
        rng = np.random.default_rng([seed, k])
        f = random_lipschitz_map(X, target, rng)
        worst = min(worst, bound - variation(f, 2.0))
    return worst


def tree_comparison_check(X: MMSpace, tree: MetricTree, budget: int, seed: int) -> float:
    """Slack of (38+16*sqrt2) * (line estimate)^2 - (tree estimate)^2.

    Both sides are lower-bound estimates, so a deficit beyond the estimation
    slack flags a solver bug rather than a counterexample.
    """
    line_bound, _ = obsvar_lower_bound(X, Euclidean(1), 2.0, budget, seed)
    tree_bound, _ = obsvar_lower_bound(X, tree, 2.0, budget, seed)
    return TREE_LINE_FACTOR * line_bound**2 - tree_bound**2


def complete_graph(n: int) -> GraphMM:
    return GraphMM(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def cycle_graph(n: int) -> GraphMM:
    return GraphMM(n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> GraphMM:
    return GraphMM(n, [(i, i + 1) for i in range(n - 1)])


def hypercube_graph(n: int) -> GraphMM:
    verts = 1 << n
    edges = []
    for u in range(verts):
        for b in range(n):
            v = u ^ (1 << b)
            if u < v:
                edges.append((u, v))
    return GraphMM(verts, edges)


def random_connected_graph(n: int, rng: np.random.Generator, extra: float = 0.3) -> GraphMM:
    """Random spanning tree plus a Bernoulli sprinkling of extra edges."""
    edges = set()
    for v in range(1, n):
        u = int(rng.integers(v))
        edges.add((u, v))
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in edges and rng.random() < extra:
                edges.add((u, v))
    return GraphMM(n, sorted(edges))
