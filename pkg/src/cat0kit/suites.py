"""Randomized property suites over a scenario, with deterministic per-instance seeds.

Every instance draws its randomness from a generator keyed by
``[master_seed, suite_id, group_index, instance_index]`` so any failing
instance can be replayed in isolation from the report alone.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .barycenter import barycenter, distance_jensen_defect, frechet_value, tangent_mean_residual, variance_defect
from .fubini import INV_SQRT3, fubini_report, random_map_table, variation
from .measures import DiscreteMeasure, MMSpace, MapTable, product_mm
from .obsvar import (
    GraphMM,
    graph_gap,
    product_split_defect,
    product_split_defect_sharp,
    random_lipschitz_map,
    spectral_obsvar_check,
    tree_comparison_check,
)
from .scenario import Scenario
from .spaces import Euclidean, Hyperboloid, MetricTree, ProductSpace, Space, TreePoint, minkowski_inner
from .transport import barycenter_contraction_defect, dual_certificate, w1

SUITE_IDS = {
    "spaces": 1,
    "barycenter": 2,
    "transport": 3,
    "fubini": 4,
    "product": 5,
    "spectral": 6,
}
SUITE_ORDER = ["spaces", "barycenter", "transport", "fubini", "product", "spectral"]

DEFAULT_TOLERANCES = {
    "slack": 1e-9,
    "gap": 1e-7,
    "probe": 1e-8,
    "tangent_residual": 1e-9,
    "euclidean_variance": 1e-10,
    "barycenter_split": 1e-10,
    "metric_recompute": 1e-12,
    "hyperboloid_constraint": 1e-10,
    "geodesic_rel": 1e-9,
    "permutation_oracle": 1e-12,
    "w1_symmetry": 1e-9,
    "w1_triangle": 1e-8,
    "classical_fubini": 1e-9,
    "tree_comparison": 1e-6,
    "rayleigh": 1e-8,
    "grid_oracle": 1e-8,
}

DEFAULT_COUNTS = {
    "triangle_triples": 10_000,
    "geodesic_samples": 2_000,
    "comparison_tuples": 10_000,
    "measures_per_space": 1_000,
    "probes_per_measure": 100,
    "transport_pairs": 1_000,
    "fubini_instances": 1_000,
    "product_maps": 1_000,
    "spectral_trials": 1_000,
    "rayleigh_probes": 10_000,
    "obsvar_budget": 8,
}


@dataclass
class CheckResult:
    suite: str
    check: str
    instances: int
    min_slack: float
    tolerance: float
    passed: bool
    worst_key: str = ""
    extra: dict = field(default_factory=dict)


class _Tracker:
    """Accumulates the worst slack of one named check over many instances."""

    def __init__(self, suite: str, check: str, tolerance: float):
        self.suite = suite
        self.check = check
        self.tolerance = tolerance
        self.instances = 0
        self.min_slack = math.inf
        self.worst_key = ""
        self.extra: dict = {}

    def add(self, slack: float, key: str = "") -> None:
        self.instances += 1
        if slack < self.min_slack:
            self.min_slack = float(slack)
            self.worst_key = key

    def result(self) -> CheckResult:
        ok = bool(self.instances > 0 and self.min_slack >= -self.tolerance)
        slack = float(self.min_slack) if self.instances else math.nan
        return CheckResult(self.suite, self.check, self.instances, slack,
                           self.tolerance, ok, self.worst_key,
                           {k: float(v) for k, v in self.extra.items()})


def _rng(master: int, suite: str, group: int, k: int) -> np.random.Generator:
    return np.random.default_rng([master, SUITE_IDS[suite], group, k])


def _key(master: int, suite: str, group: int, k: int) -> str:
    return f"{master}.{SUITE_IDS[suite]}.{group}.{k}"


def random_measure(space: Space, rng: np.random.Generator, max_atoms: int = 8,
                   scale: float = 1.0) -> DiscreteMeasure:
    k = int(rng.integers(2, max_atoms + 1))
    atoms = [space.random_point(rng, scale) for _ in range(k)]
    w = rng.random(k) + 0.05
    return DiscreteMeasure(space, atoms, w / w.sum())


def random_mm_space(rng: np.random.Generator, max_n: int = 6) -> MMSpace:
    """Metric guaranteed by embedding random points in R^3."""
    n = int(rng.integers(2, max_n + 1))
    pts = rng.standard_normal((n, 3))
    metric = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    np.fill_diagonal(metric, 0.0)
    metric = (metric + metric.T) / 2.0
    w = rng.random(n) + 0.1
    return MMSpace([f"s{i}" for i in range(n)], metric, w / w.sum())


def _sorted_spaces(sc: Scenario) -> list[tuple[str, Space]]:
    return sorted(sc.spaces.items())


def _hyperboloid_parts(space: Space) -> list[Hyperboloid]:
    if isinstance(space, Hyperboloid):
        return [space]
    if isinstance(space, ProductSpace):
        return [c for c in space.components if isinstance(c, Hyperboloid)]
    return []


def _constraint_violation(space: Space, point) -> float:
    if isinstance(space, Hyperboloid):
        scale = max(1.0, float(point[0]) ** 2)
        return abs(minkowski_inner(point, point) + 1.0) / scale
    if isinstance(space, ProductSpace):
        worst = 0.0
        for comp, part in zip(space.components, point):
            if isinstance(comp, (Hyperboloid, ProductSpace)):
                worst = max(worst, _constraint_violation(comp, part))
        return worst
    return 0.0


def suite_spaces(sc: Scenario, counts: dict, tols: dict) -> list[CheckResult]:
    from .spaces import cat0_midpoint_defect, reshetnyak_defect

    results = []
    seed = sc.seed
    spaces = _sorted_spaces(sc)
    n_spaces = max(len(spaces), 1)
    for g, (name, space) in enumerate(spaces):
        tri = _Tracker("spaces", f"triangle[{name}]", tols["slack"])
        for k in range(counts["triangle_triples"]):
            rng = _rng(seed, "spaces", g, k)
            p, q, r = (space.random_point(rng) for _ in range(3))
            tri.add(space.distance(p, q) + space.distance(q, r) - space.distance(p, r),
                    _key(seed, "spaces", g, k))
        results.append(tri.result())

        geo = _Tracker("spaces", f"geodesic-consistency[{name}]", tols["geodesic_rel"])
        con = _Tracker("spaces", f"hyperboloid-constraint[{name}]",
                       tols["hyperboloid_constraint"])
        has_hyp = bool(_hyperboloid_parts(space)) or isinstance(space, Hyperboloid)
        for k in range(counts["geodesic_samples"]):
            rng = _rng(seed, "spaces", 100 + g, k)
            p, q = space.random_point(rng), space.random_point(rng)
            s, t = sorted(rng.uniform(size=2))
            gs = space.geodesic_point(p, q, s)
            gt = space.geodesic_point(p, q, t)
            d = space.distance(p, q)
            err = abs(space.distance(gs, gt) - (t - s) * d) / max(d, 1.0)
            geo.add(-err, _key(seed, "spaces", 100 + g, k))
            if has_hyp:
                v = max(_constraint_violation(space, gs), _constraint_violation(space, gt))
                con.add(-v, _key(seed, "spaces", 100 + g, k))
        results.append(geo.result())
        if has_hyp:
            results.append(con.result())

        if isinstance(space, ProductSpace):
            rec = _Tracker("spaces", f"product-metric[{name}]", tols["metric_recompute"])
            for k in range(counts["geodesic_samples"]):
                rng = _rng(seed, "spaces", 200 + g, k)
                p, q = space.random_point(rng), space.random_point(rng)
                direct = space.distance(p, q)
                recomputed = math.sqrt(sum(
                    c.distance(a, b) ** 2
                    for c, a, b in zip(space.components, p, q)))
                rec.add(-abs(direct - recomputed), _key(seed, "spaces", 200 + g, k))
            results.append(rec.result())

    mid = _Tracker("spaces", "cat0-midpoint-defect", tols["slack"])
    resh = _Tracker("spaces", "reshetnyak-defect", tols["slack"])
    per_space = max(1, counts["comparison_tuples"] // n_spaces)
    for g, (name, space) in enumerate(spaces):
        for k in range(per_space):
            rng = _rng(seed, "spaces", 300 + g, k)
            x, y, z, u = (space.random_point(rng) for _ in range(4))
            mid.add(cat0_midpoint_defect(space, x, y, z), _key(seed, "spaces", 300 + g, k))
            resh.add(reshetnyak_defect(space, x, y, z, u), _key(seed, "spaces", 300 + g, k))
    results.append(mid.result())
    results.append(resh.result())
    return results


def _tree_grid_minimum(tree: MetricTree, nu: DiscreteMeasure, step: float = 1e-3) -> float:
    """Brute-force objective scan over every edge at the given offset step."""
    best = math.inf
    for k in range(tree.n_edges):
        ln = float(tree.edge_len[k])
        offs = np.arange(0.0, ln + step / 2, step)
        offs[-1] = min(offs[-1], ln)
        grid = [tree.canonical(TreePoint(k, float(s))) for s in offs]
        d = tree.pairwise(grid, nu.atoms)
        vals = (d * d) @ nu.weights
        best = min(best, float(vals.min()))
    return best


def suite_barycenter(sc: Scenario, counts: dict, tols: dict) -> list[CheckResult]:
    results = []
    seed = sc.seed
    for g, (name, space) in enumerate(_sorted_spaces(sc)):
        probe = _Tracker("barycenter", f"probe-optimality[{name}]", tols["probe"])
        grid = _Tracker("barycenter", f"grid-oracle[{name}]", tols["grid_oracle"])
        tangent = _Tracker("barycenter", f"tangent-mean[{name}]", tols["tangent_residual"])
        vdef = _Tracker("barycenter", f"variance-defect[{name}]", tols["slack"])
        veq = _Tracker("barycenter", f"variance-equality[{name}]", tols["euclidean_variance"])
        jensen = _Tracker("barycenter", f"distance-jensen[{name}]", tols["slack"])
        split = _Tracker("barycenter", f"component-split[{name}]", tols["barycenter_split"])
        is_tree = isinstance(space, MetricTree)
        is_product = isinstance(space, ProductSpace)
        for k in range(counts["measures_per_space"]):
            key = _key(seed, "barycenter", g, k)
            rng = _rng(seed, "barycenter", g, k)
            nu = random_measure(space, rng)
            res = barycenter(nu)
            probes = [space.random_point(rng, 2.0) for _ in range(counts["probes_per_measure"])]
            d = space.pairwise(probes, nu.atoms)
            fvals = (d * d) @ nu.weights
            probe.add(float(fvals.min()) - res.frechet_value, key)
            if is_tree:
                grid.add(_tree_grid_minimum(space, nu) - res.frechet_value, key)
            if space.has_tangent_maps:
                tangent.add(-tangent_mean_residual(nu, res.point), key)
            z = space.random_point(rng, 2.0)
            vd = variance_defect(nu, z)
            vdef.add(vd, key)
            if isinstance(space, Euclidean):
                veq.add(-abs(vd), key)
            jensen.add(distance_jensen_defect(nu, z), key)
            if is_product:
                parts = tuple(
                    barycenter(DiscreteMeasure(comp, [a[i] for a in nu.atoms], nu.weights)).point
                    for i, comp in enumerate(space.components)
                )
                split.add(-space.distance(res.point, parts), key)
        results.append(probe.result())
        if is_tree:
            results.append(grid.result())
        if space.has_tangent_maps:
            results.append(tangent.result())
        results.append(vdef.result())
        if isinstance(space, Euclidean):
            results.append(veq.result())
        results.append(jensen.result())
        if is_product:
            results.append(split.result())
    return results


def permutation_oracle_w1(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Equal-weight uniform W1 by brute force over assignments (n <= 7)."""
    n = len(mu)
    if n != len(nu) or n > 7:
        raise ValueError("oracle needs equal uniform supports with n <= 7")
    cost = mu.space.pairwise(mu.atoms, nu.atoms)
    rows = np.arange(n)
    best = math.inf
    for perm in itertools.permutations(range(n)):
        best = min(best, float(cost[rows, perm].sum()) / n)
    return best


def suite_transport(sc: Scenario, counts: dict, tols: dict) -> list[CheckResult]:
    results = []
    seed = sc.seed
    for g, (name, space) in enumerate(_sorted_spaces(sc)):
        gap = _Tracker("transport", f"primal-dual-gap[{name}]", tols["gap"])
        sym = _Tracker("transport", f"symmetry[{name}]", tols["w1_symmetry"])
        tri = _Tracker("transport", f"triangle[{name}]", tols["w1_triangle"])
        perm = _Tracker("transport", f"permutation-oracle[{name}]", tols["permutation_oracle"])
        contr = _Tracker("transport", f"barycenter-contraction[{name}]", tols["slack"])
        for k in range(counts["transport_pairs"]):
            key = _key(seed, "transport", g, k)
            rng = _rng(seed, "transport", g, k)
            mu = random_measure(space, rng, max_atoms=12)
            nu = random_measure(space, rng, max_atoms=12)
            value, plan = w1(mu, nu)
            psi = dual_certificate(mu, nu, plan)
            gap.add(-(value - psi.pairing(mu, nu)), key)
            sym.add(-abs(value - w1(nu, mu)[0]), key)
            contr.add(barycenter_contraction_defect(mu, nu), key)
            if k % 4 == 0:
                rho = random_measure(space, rng, max_atoms=12)
                tri.add(w1(mu, rho)[0] + w1(rho, nu)[0] - value, key)
            if k % 4 == 1:
                n = int(rng.integers(2, 8))
                mu_u = DiscreteMeasure(space, [space.random_point(rng) for _ in range(n)],
                                       np.full(n, 1.0 / n))
                nu_u = DiscreteMeasure(space, [space.random_point(rng) for _ in range(n)],
                                       np.full(n, 1.0 / n))
                if len(mu_u) == n and len(nu_u) == n:
                    v, _ = w1(mu_u, nu_u)
                    perm.add(-abs(v - permutation_oracle_w1(mu_u, nu_u)), key)
        results.extend([gap.result(), sym.result(), tri.result(), perm.result(),
                        contr.result()])
    return results


def slice_contraction_defects(f: MapTable, slices=None) -> np.ndarray:
    """Matrix of slice-contraction slacks over all Y-sample pairs."""
    dom = f.domain
    if slices is None:
        from .fubini import slice_expectations
        slices = slice_expectations(f)
    ny = dom.Y.n
    out = np.zeros((ny, ny))
    slice_pts = [f.slice_fixed_y(j) for j in range(ny)]
    g_dist = f.target.pairwise(list(slices))
    for j in range(ny):
        for j2 in range(j + 1, ny):
            d = f.target.pairwise(slice_pts[j], slice_pts[j2])
            mean_dist = float(np.dot(dom.X.prob, np.diag(d)))
            out[j, j2] = out[j2, j] = mean_dist - g_dist[j, j2]
    return out


def _fubini_instance_checks(f: MapTable, trackers: dict, key: str):
    rep = fubini_report(f)
    trackers["slack1"].add(rep.slack1, key)
    trackers["slack2"].add(rep.slack2, key)
    trackers["chain-half"].add(rep.chain_half_slack, key)
    trackers["chain-twothirds"].add(rep.chain_twothirds_slack, key)
    trackers["ratio-bound"].add(INV_SQRT3 - rep.defect_ratio, key)
    sc_def = slice_contraction_defects(f, rep.slices)
    trackers["slice-contraction"].add(float(sc_def.min()), key)
    if isinstance(f.target, Euclidean):
        trackers["classical-euclidean"].add(-rep.defect, key)
    swapped = fubini_report(f.swapped())
    trackers["swap-slack1"].add(swapped.slack1, key)
    trackers["swap-slack2"].add(swapped.slack2, key)
    return rep


def suite_fubini(sc: Scenario, counts: dict, tols: dict) -> list[CheckResult]:
    seed = sc.seed
    trackers = {
        "slack1": _Tracker("fubini", "defect-vs-v1", tols["slack"]),
        "slack2": _Tracker("fubini", "defect-vs-v2", tols["slack"]),
        "chain-half": _Tracker("fubini", "chain-half", tols["slack"]),
        "chain-twothirds": _Tracker("fubini", "chain-twothirds", tols["slack"]),
        "ratio-bound": _Tracker("fubini", "ratio-bound", tols["slack"]),
        "slice-contraction": _Tracker("fubini", "slice-contraction", tols["slack"]),
        "classical-euclidean": _Tracker("fubini", "classical-euclidean",
                                        tols["classical_fubini"]),
        "swap-slack1": _Tracker("fubini", "swapped-defect-vs-v1", tols["slack"]),
        "swap-slack2": _Tracker("fubini", "swapped-defect-vs-v2", tols["slack"]),
    }
    max_ratio = 0.0
    declared = _Tracker("fubini", "declared-maps", tols["slack"])
    for name, f in sorted(sc.maps.items()):
        if not f.is_product:
            continue
        rep = _fubini_instance_checks(f, trackers, f"map:{name}")
        max_ratio = max(max_ratio, rep.defect_ratio)
        declared.add(min(rep.slack1, rep.slack2), f"map:{name}")
        declared.extra[f"{name}.defect"] = rep.defect
        declared.extra[f"{name}.v1"] = rep.v1
        declared.extra[f"{name}.v2"] = rep.v2
        declared.extra[f"{name}.defect_ratio"] = rep.defect_ratio

    spaces = _sorted_spaces(sc)
    total = counts["fubini_instances"]
    for k in range(total):
        g = k % max(len(spaces), 1)
        _, target = spaces[g]
        key = _key(seed, "fubini", g, k)
        rng = _rng(seed, "fubini", g, k)
        dom = product_mm(random_mm_space(rng), random_mm_space(rng))
        f = random_map_table(dom, target, rng)
        rep = _fubini_instance_checks(f, trackers, key)
        max_ratio = max(max_ratio, rep.defect_ratio)

    witness = _Tracker("fubini", "nonlinearity-witnessed", 0.0)
    witness.add(max_ratio - 0.1, "max-ratio")
    witness.extra["max_defect_ratio"] = max_ratio

    results = [t.result() for t in trackers.values()]
    if declared.instances:
        results.append(declared.result())
    results.append(witness.result())
    return results


def suite_product(sc: Scenario, counts: dict, tols: dict) -> list[CheckResult]:
    seed = sc.seed
    spaces = _sorted_spaces(sc)
    trackers = {
        p: _Tracker("product", f"split-defect-p{p:g}", tols["slack"]) for p in (1.0, 2.0, 3.0)
    }
    sharp = _Tracker("product", "split-defect-sharp", tols["slack"])
    for k in range(counts["product_maps"]):
        g = k % max(len(spaces), 1)
        _, target = spaces[g]
        key = _key(seed, "product", g, k)
        rng = _rng(seed, "product", g, k)
        dom = product_mm(random_mm_space(rng), random_mm_space(rng))
        f = random_lipschitz_map(dom, target, rng)
        for p, tr in trackers.items():
            tr.add(product_split_defect(f, p), key)
        sharp.add(product_split_defect_sharp(f), key)
    return [t.result() for t in trackers.values()] + [sharp.result()]


def _rayleigh_slack(G: GraphMM, probes: int, rng: np.random.Generator) -> float:
    """Sampled Rayleigh quotients can only sit above the eigenvalue."""
    lam = graph_gap(G)
    g = rng.standard_normal((probes, G.n))
    g -= g.mean(axis=1, keepdims=True)
    edges = np.array(G.edges)
    diff = g[:, edges[:, 0]] - g[:, edges[:, 1]]
    energy = (diff**2).mean(axis=1)
    norms = (g**2).mean(axis=1)
    valid = norms > 1e-12
    quotients = energy[valid] / norms[valid]
    return float(quotients.min()) - lam


def suite_spectral(sc: Scenario, counts: dict, tols: dict) -> list[CheckResult]:
    seed = sc.seed
    results = []
    graphs = sorted(sc.graphs.items())
    if not graphs:
        return results
    ray = _Tracker("spectral", "rayleigh-lower-bound", tols["rayleigh"])
    spec = _Tracker("spectral", "spectral-variation-bound", tols["slack"])
    per_combo = max(1, counts["spectral_trials"] // (len(graphs) * 6))
    for g, (name, G) in enumerate(graphs):
        rng = _rng(seed, "spectral", g, 0)
        ray.add(_rayleigh_slack(G, counts["rayleigh_probes"], rng), _key(seed, "spectral", g, 0))
        for dim in (1, 2, 3):
            for t_idx, target in enumerate((Euclidean(dim), Hyperboloid(dim))):
                sub = int(np.random.default_rng(
                    [seed, SUITE_IDS["spectral"], g, dim, t_idx]).integers(2**31))
                slack = spectral_obsvar_check(G, target, per_combo, sub)
                spec.add(slack, f"{name}:dim{dim}:t{t_idx}")
    results.append(ray.result())
    results.append(spec.result())

    trees = [s for _, s in _sorted_spaces(sc) if isinstance(s, MetricTree)]
    plain_mm = sorted(sc.mm_spaces.items())
    if trees and plain_mm:
        cmp_tr = _Tracker("spectral", "tree-vs-line", tols["tree_comparison"])
        tree = trees[0]
        for g, (name, X) in enumerate(plain_mm):
            if X.n > 8:
                continue
            sub = int(np.random.default_rng(
                [seed, SUITE_IDS["spectral"], 500, g]).integers(2**31))
            cmp_tr.add(tree_comparison_check(X, tree, counts["obsvar_budget"], sub),
                       f"mm:{name}")
        if cmp_tr.instances:
            results.append(cmp_tr.result())
    return results


SUITE_FUNCS = {
    "spaces": suite_spaces,
    "barycenter": suite_barycenter,
    "transport": suite_transport,
    "fubini": suite_fubini,
    "product": suite_product,
    "spectral": suite_spectral,
}


def run_suites(sc: Scenario, only: str | None = None) -> list[CheckResult]:
    counts = dict(DEFAULT_COUNTS)
    counts.update(sc.counts)
    tols = dict(DEFAULT_TOLERANCES)
    tols.update(sc.tolerances)
    selected = sc.suites if sc.suites else list(SUITE_ORDER)
    if only is not None:
        if only not in SUITE_FUNCS:
            raise ValueError(f"unknown suite {only!r}; choose from {SUITE_ORDER}")
        selected = [s for s in selected if s == only]
    results: list[CheckResult] = []
    for suite in SUITE_ORDER:
        if suite in selected:
            results.extend(SUITE_FUNCS[suite](sc, counts, tols))
    return results
