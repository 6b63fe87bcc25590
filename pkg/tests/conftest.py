import networkx as nx
import numpy as np
import pytest

from cat0kit import Euclidean, Hyperboloid, MetricTree, ProductSpace, tripod
from cat0kit.measures import DiscreteMeasure, MMSpace


@pytest.fixture(scope="session")
def tripod_space():
    return tripod()


@pytest.fixture(scope="session")
def deep_tree():
    return MetricTree(
        list("abcdefg"),
        [("a", "b", 1.5), ("b", "c", 0.7), ("b", "d", 2.0),
         ("a", "e", 1.0), ("e", "f", 0.3), ("e", "g", 2.2)],
    )


@pytest.fixture(scope="session")
def space_battery(tripod_space, deep_tree):
    """One space of every kind, plus mixed products."""
    return {
        "euclidean2": Euclidean(2),
        "euclidean3": Euclidean(3),
        "hyperboloid2": Hyperboloid(2),
        "tripod": tripod_space,
        "deep_tree": deep_tree,
        "plane_x_tripod": ProductSpace([Euclidean(2), tripod_space]),
        "hyp_x_tree": ProductSpace([Hyperboloid(1), deep_tree]),
    }


def tree_distance_oracle(tree: MetricTree, p, q) -> float:
    """Path length through a subdivision graph; independent of the production path code."""
    g = nx.Graph()
    cuts = {k: [(0.0, tree.vertices[int(tree.edge_u[k])]),
                (float(tree.edge_len[k]), tree.vertices[int(tree.edge_v[k])])]
            for k in range(tree.n_edges)}
    cuts[p.edge].append((float(p.offset), "__P__"))
    cuts[q.edge].append((float(q.offset), "__Q__"))
    for k, items in cuts.items():
        items.sort(key=lambda t: t[0])
        for (o1, n1), (o2, n2) in zip(items, items[1:]):
            w = o2 - o1
            if g.has_edge(n1, n2):
                w = min(w, g[n1][n2]["weight"])
            g.add_edge(n1, n2, weight=w)
    return float(nx.dijkstra_path_length(g, "__P__", "__Q__"))


def random_measure_on(space, rng, n_atoms=None, scale=1.0):
    k = int(rng.integers(2, 7)) if n_atoms is None else n_atoms
    atoms = [space.random_point(rng, scale) for _ in range(k)]
    w = rng.random(k) + 0.1
    return DiscreteMeasure(space, atoms, w / w.sum())


def uniform_measure_on(space, atoms):
    n = len(atoms)
    return DiscreteMeasure(space, atoms, np.full(n, 1.0 / n))
