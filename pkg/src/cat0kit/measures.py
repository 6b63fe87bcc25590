"""Finite discrete measures, metric-measure spaces, their products, and map tables."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .spaces import Space

ATOM_MERGE_TOL = 1e-12
WEIGHT_SUM_TOL = 1e-12
TRIANGLE_TOL = 1e-12


class InvalidMeasureError(ValueError):
    pass


class InvalidMetricError(ValueError):
    pass


class DiscreteMeasure:
    """Finitely supported probability measure on a Space.

    Atoms closer than ``ATOM_MERGE_TOL`` are merged with their weights summed,
    so dyadic-rational inputs aggregate exactly in floating point.
    """

    def __init__(self, space: Space, atoms: Sequence, weights):
        w = np.asarray(weights, dtype=float)
        if len(atoms) != w.shape[0] or w.ndim != 1 or w.shape[0] == 0:
            raise InvalidMeasureError("atoms and weights must be equal-length and non-empty")
        if (w <= 0).any():
            raise InvalidMeasureError("weights must be strictly positive")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidMeasureError(f"weights sum to {w.sum()!r}, not 1")
        atoms = [space.canonical(a) for a in atoms]

        dist = space.pairwise(atoms)
        np.fill_diagonal(dist, 0.0)
        merged_atoms: list = []
        merged_w: list = []
        owner = np.full(len(atoms), -1, dtype=int)
        for i in range(len(atoms)):
            if owner[i] >= 0:
                continue
            group = np.flatnonzero(dist[i] < ATOM_MERGE_TOL)
            group = group[group >= i]
            owner[group] = len(merged_atoms)
            merged_atoms.append(atoms[i])
            merged_w.append(float(w[group].sum()))
        self.space = space
        self.atoms = merged_atoms
        self.weights = np.array(merged_w, dtype=float)
        self.weights.setflags(write=False)

    def __len__(self):
        return len(self.atoms)

    def __repr__(self):
        return f"DiscreteMeasure({len(self)} atoms on {self.space!r})"

    def is_point_mass(self) -> bool:
        return len(self.atoms) == 1


def moment(nu: DiscreteMeasure, p: float, base) -> float:
    """p-th moment of nu around a base point: sum_i w_i d(base, atom_i)^p."""
    if p < 1:
        raise ValueError("moment order must be >= 1")
    nu.space.validate(base)
    d = nu.space.pairwise([base], nu.atoms)[0]
    return float(np.dot(nu.weights, d**p))


def _validate_metric(metric: np.ndarray, tol: float = TRIANGLE_TOL) -> None:
    n = metric.shape[0]
    if metric.shape != (n, n):
        raise InvalidMetricError("metric matrix must be square")
    if (metric < 0).any():
        raise InvalidMetricError("metric entries must be nonnegative")
    if not np.allclose(metric, metric.T, rtol=0, atol=tol):
        raise InvalidMetricError("metric matrix must be symmetric")
    if (np.abs(np.diag(metric)) > tol).any():
        raise InvalidMetricError("metric diagonal must be zero")
    off = metric.copy()
    np.fill_diagonal(off, np.inf)
    if (off <= 0).any():
        raise InvalidMetricError("distinct samples must be at positive distance")
    # Full ordered-triple scan, chunked over the middle index.
    for k in range(n):
        via = metric[:, k][:, None] + metric[k, :][None, :]
        if (via < metric - tol).any():
            i, j = np.unravel_index(np.argmin(via - metric), metric.shape)
            raise InvalidMetricError(
                f"triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})"
            )


class MMSpace:
    """Finite metric-measure space: labels, metric matrix, full-support probability."""

    def __init__(self, labels: Sequence[str], metric, prob):
        self.labels = [str(x) for x in labels]
        n = len(self.labels)
        if len(set(self.labels)) != n or n == 0:
            raise InvalidMetricError("labels must be non-empty and unique")
        m = np.asarray(metric, dtype=float)
        if m.shape != (n, n):
            raise InvalidMetricError(f"metric must be {n}x{n}")
        _validate_metric(m)
        p = np.asarray(prob, dtype=float)
        if p.shape != (n,):
            raise InvalidMeasureError(f"prob must have length {n}")
        if (p <= 0).any():
            raise InvalidMeasureError("mm-space measures must have full support")
        if abs(p.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidMeasureError(f"probabilities sum to {p.sum()!r}, not 1")
        self.metric = m
        self.metric.setflags(write=False)
        self.prob = p
        self.prob.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.labels)

    def __repr__(self):
        return f"MMSpace({self.n} samples)"

    @classmethod
    def uniform_two_point(cls, d: float = 1.0, labels=("a", "b")) -> "MMSpace":
        return cls(labels, [[0.0, d], [d, 0.0]], [0.5, 0.5])

    def diameter(self) -> float:
        return float(self.metric.max())


class ProductMMSpace:
    """Product of two mm-spaces with the l2 metric and product weights.

    Samples are ordered x-major: the pair (i, j) sits at flat index i * |Y| + j.
    """

    def __init__(self, X: MMSpace, Y: MMSpace):
        self.X = X
        self.Y = Y
        dx = X.metric[:, None, :, None]
        dy = Y.metric[None, :, None, :]
        n = X.n * Y.n
        self.metric = np.sqrt(dx**2 + dy**2).reshape(n, n)
        self.metric.setflags(write=False)
        self.prob = np.outer(X.prob, Y.prob).reshape(n)
        self.prob.setflags(write=False)
        self.labels = [f"{a},{b}" for a in X.labels for b in Y.labels]

    @property
    def n(self) -> int:
        return self.X.n * self.Y.n

    def index(self, i: int, j: int) -> int:
        return i * self.Y.n + j

    def __repr__(self):
        return f"ProductMMSpace({self.X.n}x{self.Y.n} samples)"

    def swapped(self) -> "ProductMMSpace":
        return ProductMMSpace(self.Y, self.X)


def product_mm(X: MMSpace, Y: MMSpace) -> ProductMMSpace:
    return ProductMMSpace(X, Y)


class MapTable:
    """Total assignment of one target point to every sample of an mm-space."""

    def __init__(self, domain, target: Space, values: Sequence):
        if len(values) != domain.n:
            raise InvalidMeasureError(
                f"map table has {len(values)} values for {domain.n} samples"
            )
        self.domain = domain
        self.target = target
        self.values = [target.canonical(v) for v in values]
        for v in self.values:
            target.validate(v)

    def __repr__(self):
        return f"MapTable({self.domain!r} -> {self.target!r})"

    @property
    def is_product(self) -> bool:
        return isinstance(self.domain, ProductMMSpace)

    def value_pair(self, i: int, j: int):
        return self.values[self.domain.index(i, j)]

    def slice_fixed_y(self, j: int) -> list:
        """Images of x -> f(x, y_j)."""
        dom = self.domain
        return [self.values[dom.index(i, j)] for i in range(dom.X.n)]

    def slice_fixed_x(self, i: int) -> list:
        """Images of y -> f(x_i, y)."""
        dom = self.domain
        return [self.values[dom.index(i, j)] for j in range(dom.Y.n)]

    def swapped(self) -> "MapTable":
        """Same map with the roles of the two factors exchanged."""
        if not self.is_product:
            raise InvalidMeasureError("swapped() needs a product domain")
        dom = self.domain
        values = [
            self.values[dom.index(i, j)]
            for j in range(dom.Y.n)
            for i in range(dom.X.n)
        ]
        return MapTable(dom.swapped(), self.target, values)


def pushforward(f: MapTable) -> DiscreteMeasure:
    """Image measure of the domain weights under the map table."""
    return DiscreteMeasure(f.target, f.values, f.domain.prob)
