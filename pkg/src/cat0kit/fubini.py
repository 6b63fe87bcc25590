"""Variation, expectation, slice means, repeated integral, and the defect inequalities.

The expectation of a map is the barycenter of its pushforward measure. On a
nonlinear target the repeated (slice-then-average) integral can differ from it;
the defect between the two is bounded by the L1-variation and by 1/sqrt(3)
times the L2-variation, which is what `fubini_report` exposes for checking.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .barycenter import barycenter
from .measures import DiscreteMeasure, InvalidMeasureError, MapTable, ProductMMSpace, pushforward

INV_SQRT3 = 1.0 / math.sqrt(3.0)


@dataclass(frozen=True)
class FubiniReport:
    e_f: object                    # expectation of the map
    repeated: object               # expectation of the slice means
    defect: float                  # distance between the two
    v1: float
    v2: float
    slack1: float                  # V1 - defect
    slack2: float                  # V2/sqrt(3) - defect
    slices: tuple                  # slice means, indexed like the Y factor
    mean_sq_to_repeated: float     # integral of d(f, repeated)^2 over the product

    @property
    def chain_half_slack(self) -> float:
        """Slack of defect^2 <= (1/2) * mean squared distance to the repeated point."""
        return 0.5 * self.mean_sq_to_repeated - self.defect**2

    @property
    def chain_twothirds_slack(self) -> float:
        """Slack of mean squared distance to the repeated point <= (2/3) V2^2."""
        return (2.0 / 3.0) * self.v2**2 - self.mean_sq_to_repeated

    @property
    def defect_ratio(self) -> float:
        """defect / V2, or 0 for constant maps; at most 1/sqrt(3)."""
        return self.defect / self.v2 if self.v2 > 0 else 0.0


def variation(f: MapTable, p: float) -> float:
    """p-th root of the mean p-th power distance over independent sample pairs."""
    if p < 1:
        raise ValueError("variation order must be >= 1")
    d = f.target.pairwise(f.values)
    w = f.domain.prob
    total = float(w @ (d**p) @ w)
    return total ** (1.0 / p)


def expectation(f: MapTable):
    return barycenter(pushforward(f)).point


def _require_product(f: MapTable) -> ProductMMSpace:
    if not f.is_product:
        raise InvalidMeasureError("operation needs a map on a product mm-space")
    return f.domain


def slice_expectations(f: MapTable) -> list:
    """Barycenter of each slice x -> f(x, y), one point per sample of the Y factor."""
    dom = _require_product(f)
    out = []
    for j in range(dom.Y.n):
        nu = DiscreteMeasure(f.target, f.slice_fixed_y(j), dom.X.prob)
        out.append(barycenter(nu).point)
    return out


def repeated_integral(f: MapTable):
    dom = _require_product(f)
    g = slice_expectations(f)
    return barycenter(DiscreteMeasure(f.target, g, dom.Y.prob)).point


def fubini_report(f: MapTable) -> FubiniReport:
    dom = _require_product(f)
    e_f = expectation(f)
    g = slice_expectations(f)
    repeated = barycenter(DiscreteMeasure(f.target, g, dom.Y.prob)).point
    defect = f.target.distance(e_f, repeated)
    v1 = variation(f, 1.0)
    v2 = variation(f, 2.0)
    d_rep = f.target.pairwise([repeated], f.values)[0]
    mean_sq = float(np.dot(dom.prob, d_rep * d_rep))
    return FubiniReport(
        e_f=e_f,
        repeated=repeated,
        defect=defect,
        v1=v1,
        v2=v2,
        slack1=v1 - defect,
        slack2=INV_SQRT3 * v2 - defect,
        slices=tuple(g),
        mean_sq_to_repeated=mean_sq,
    )


def slice_contraction_defect(f: MapTable, j: int, j2: int) -> float:
    """Mean distance between the y_j and y_j2 slices minus the slice-mean distance."""
    dom = _require_product(f)
    a = f.slice_fixed_y(j)
    b = f.slice_fixed_y(j2)
    d = f.target.pairwise(a, b)
    mean_slice_dist = float(np.dot(dom.X.prob, np.diag(d)))
    nu_a = DiscreteMeasure(f.target, a, dom.X.prob)
    nu_b = DiscreteMeasure(f.target, b, dom.X.prob)
    g_dist = f.target.distance(barycenter(nu_a).point, barycenter(nu_b).point)
    return mean_slice_dist - g_dist


def random_map_table(domain, target, rng: np.random.Generator, scale: float = 1.0) -> MapTable:
    """Map table with independent random target points per sample."""
    values = [target.random_point(rng, scale) for _ in range(domain.n)]
    return MapTable(domain, target, values)
