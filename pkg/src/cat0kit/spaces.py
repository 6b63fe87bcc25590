"""Concrete CAT(0) target spaces: metrics, geodesics, tangent maps, comparison defects.

Four space kinds are implemented: flat Euclidean space, finite metric trees
(weighted, with the intrinsic path metric), the hyperboloid model of hyperbolic
space (curvature -1), and l2 products of the above. All points and spaces are
immutable values; every operation is a pure function.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

VERTEX_SNAP = 1e-12          # tree offsets this close to an endpoint become the vertex
HYPERBOLOID_ATOL = 1e-9      # accepted constraint violation on raw input coordinates
TANGENT_ORTHO_TOL = 1e-10


class SpaceMismatchError(ValueError):
    """A point does not belong to the space it was used with."""


class UnsupportedSpaceError(TypeError):
    """Tangent-space operation requested on a space without exp/log maps."""


@dataclass(frozen=True)
class TreePoint:
    """Location on a metric tree: canonical (edge index, offset from first endpoint)."""
    edge: int
    offset: float


@dataclass(frozen=True)
class TangentVector:
    """Tangent vector at ``base``; ``vec`` is an ndarray, or a tuple of them for products."""
    base: object
    vec: object

    def scaled(self, a: float) -> "TangentVector":
        if isinstance(self.vec, tuple):
            return TangentVector(self.base, tuple(a * v for v in self.vec))
        return TangentVector(self.base, a * self.vec)


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


class Space:
    """Base interface: distance, geodesics, point validation, random sampling."""

    def validate(self, p) -> None:
        raise NotImplementedError

    def distance(self, p, q) -> float:
        raise NotImplementedError

    def pairwise(self, pts: Sequence, qts: Sequence | None = None) -> np.ndarray:
        """Distance matrix between two point lists (qts defaults to pts)."""
        raise NotImplementedError

    def geodesic_point(self, p, q, t: float):
        raise NotImplementedError

    def canonical(self, p):
        """Normalized representation; equal points get equal representations."""
        return p

    def random_point(self, rng: np.random.Generator, scale: float = 1.0):
        raise NotImplementedError

    @property
    def has_tangent_maps(self) -> bool:
        return False

    # Tangent operations: only Hadamard-type kinds override these.
    def log_map(self, base, target) -> TangentVector:
        raise UnsupportedSpaceError(f"{type(self).__name__} has no tangent maps")

    def exp_map(self, base, v: TangentVector):
        raise UnsupportedSpaceError(f"{type(self).__name__} has no tangent maps")

    def tangent_norm(self, v: TangentVector) -> float:
        raise UnsupportedSpaceError(f"{type(self).__name__} has no tangent maps")

    def tangent_sum(self, base, vecs: Sequence[TangentVector], weights: np.ndarray) -> TangentVector:
        raise UnsupportedSpaceError(f"{type(self).__name__} has no tangent maps")

    def _check_t(self, t: float) -> None:
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"geodesic parameter t={t} outside [0, 1]")


class Euclidean(Space):
    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("Euclidean dimension must be >= 1")
        self.dim = int(dim)

    def __repr__(self):
        return f"Euclidean(dim={self.dim})"

    def point(self, coords) -> np.ndarray:
        p = _frozen(coords)
        self.validate(p)
        return p

    def validate(self, p) -> None:
        if not isinstance(p, np.ndarray) or p.shape != (self.dim,):
            raise SpaceMismatchError(f"expected vector of length {self.dim}, got {p!r}")

    def distance(self, p, q) -> float:
        self.validate(p)
        self.validate(q)
        return float(np.linalg.norm(p - q))

    def pairwise(self, pts, qts=None) -> np.ndarray:
        A = np.asarray(pts, dtype=float)
        B = A if qts is None else np.asarray(qts, dtype=float)
        diff = A[:, None, :] - B[None, :, :]
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    def geodesic_point(self, p, q, t: float):
        self._check_t(t)
        self.validate(p)
        self.validate(q)
        return _frozen((1.0 - t) * p + t * q)

    def random_point(self, rng, scale: float = 1.0):
        return _frozen(scale * rng.standard_normal(self.dim))

    @property
    def has_tangent_maps(self) -> bool:
        return True

    def log_map(self, base, target) -> TangentVector:
        self.validate(base)
        self.validate(target)
        return TangentVector(base, target - base)

    def exp_map(self, base, v: TangentVector):
        self.validate(base)
        return _frozen(base + v.vec)

    def tangent_norm(self, v: TangentVector) -> float:
        return float(np.linalg.norm(v.vec))

    def tangent_sum(self, base, vecs, weights) -> TangentVector:
        acc = np.zeros(self.dim)
        for w, tv in zip(weights, vecs):
            acc += w * tv.vec
        return TangentVector(base, acc)


def minkowski_inner(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.dot(x[1:], y[1:]) - x[0] * y[0])


class Hyperboloid(Space):
    """Upper sheet of <x,x>_M = -1 in R^{d+1}, curvature -1."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("Hyperboloid dimension must be >= 1")
        self.dim = int(dim)

    def __repr__(self):
        return f"Hyperboloid(dim={self.dim})"

    def base_point(self) -> np.ndarray:
        coords = np.zeros(self.dim + 1)
        coords[0] = 1.0
        return _frozen(coords)

    def _renormalize(self, x: np.ndarray) -> np.ndarray:
        # Recomputing x0 from the spatial part enforces <x,x>_M = -1 to machine precision.
        out = np.array(x, dtype=float)
        out[0] = np.sqrt(1.0 + np.dot(out[1:], out[1:]))
        out.setflags(write=False)
        return out

    def point(self, coords) -> np.ndarray:
        p = np.asarray(coords, dtype=float)
        if p.shape != (self.dim + 1,):
            raise SpaceMismatchError(f"expected vector of length {self.dim + 1}, got {p!r}")
        if abs(minkowski_inner(p, p) + 1.0) > 1e-6 or p[0] <= 0:
            raise SpaceMismatchError(f"not on the hyperboloid: {p!r}")
        return self._renormalize(p)

    def from_spatial(self, spatial) -> np.ndarray:
        s = np.asarray(spatial, dtype=float)
        if s.shape != (self.dim,):
            raise SpaceMismatchError(f"expected spatial vector of length {self.dim}")
        return self._renormalize(np.concatenate([[0.0], s]))

    def validate(self, p) -> None:
        if not isinstance(p, np.ndarray) or p.shape != (self.dim + 1,):
            raise SpaceMismatchError(f"expected vector of length {self.dim + 1}, got {p!r}")
        # Relative tolerance: recomputing <x,x>_M cancels terms of size x0^2.
        tol = HYPERBOLOID_ATOL * max(1.0, p[0] * p[0])
        if p[0] <= 0 or abs(minkowski_inner(p, p) + 1.0) > tol:
            raise SpaceMismatchError(f"point violates the hyperboloid constraint: {p!r}")

    def distance(self, p, q) -> float:
        self.validate(p)
        self.validate(q)
        # d = 2 arcsinh(||p-q||_M / 2): equivalent to arccosh(-<p,q>_M) on the
        # sheet but exact at 0 and stable for nearby points.
        diff = p - q
        chord_sq = max(minkowski_inner(diff, diff), 0.0)
        return float(2.0 * np.arcsinh(0.5 * np.sqrt(chord_sq)))

    def pairwise(self, pts, qts=None) -> np.ndarray:
        A = np.asarray(pts, dtype=float)
        B = A if qts is None else np.asarray(qts, dtype=float)
        diff = A[:, None, :] - B[None, :, :]
        chord_sq = np.einsum("ijk,ijk->ij", diff[:, :, 1:], diff[:, :, 1:]) - diff[:, :, 0] ** 2
        return 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(chord_sq, 0.0)))

    def geodesic_point(self, p, q, t: float):
        self._check_t(t)
        if t == 0.0:
            return p
        if t == 1.0:
            return q
        return self.exp_map(p, self.log_map(p, q).scaled(t))

    def random_point(self, rng, scale: float = 1.0):
        # Cap the radius: past ~8 the coordinates grow like cosh(r) and double
        # precision stops resolving distances sharply.
        base = self.base_point()
        spatial = scale * rng.standard_normal(self.dim)
        nrm = np.linalg.norm(spatial)
        if nrm > 8.0:
            spatial *= 8.0 / nrm
        vec = np.concatenate([[0.0], spatial])
        return self.exp_map(base, TangentVector(base, vec))

    @property
    def has_tangent_maps(self) -> bool:
        return True

    def log_map(self, base, target) -> TangentVector:
        self.validate(base)
        self.validate(target)
        d = self.distance(base, target)
        raw = target + minkowski_inner(base, target) * base
        nrm = np.sqrt(max(minkowski_inner(raw, raw), 0.0))
        if nrm < 1e-14 or d == 0.0:
            return TangentVector(base, np.zeros(self.dim + 1))
        return TangentVector(base, (d / nrm) * raw)

    def exp_map(self, base, v: TangentVector):
        self.validate(base)
        vec = np.asarray(v.vec, dtype=float)
        # Project out any roundoff component along the base point.
        vec = vec + minkowski_inner(base, vec) * base
        nrm = np.sqrt(max(minkowski_inner(vec, vec), 0.0))
        if nrm < 1e-300:
            return _frozen(base)
        out = np.cosh(nrm) * base + np.sinh(nrm) * (vec / nrm)
        return self._renormalize(out)

    def tangent_norm(self, v: TangentVector) -> float:
        return float(np.sqrt(max(minkowski_inner(v.vec, v.vec), 0.0)))

    def tangent_sum(self, base, vecs, weights) -> TangentVector:
        acc = np.zeros(self.dim + 1)
        for w, tv in zip(weights, vecs):
            acc += w * tv.vec
        return TangentVector(base, acc)


class MetricTree(Space):
    """Finite weighted tree with the intrinsic path metric.

    Points live on edges: ``TreePoint(edge_index, offset)`` with the offset
    measured from the edge's first endpoint. Vertex points are canonicalized
    onto the lowest-index incident edge so equality is decidable.
    """

    def __init__(self, vertices: Sequence[str], edges: Sequence[tuple]):
        self.vertices = [str(v) for v in vertices]
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex labels")
        self._vidx = {v: i for i, v in enumerate(self.vertices)}
        n = len(self.vertices)

        self.edge_names: list[str] = []
        us, vs, lengths = [], [], []
        self._eidx: dict[str, int] = {}
        for k, e in enumerate(edges):
            if len(e) == 4:
                u, v, length, name = e
            else:
                u, v, length = e
                name = f"e{k}"
            length = float(length)
            if length <= 0:
                raise ValueError(f"edge {name} has non-positive length {length}")
            if u not in self._vidx or v not in self._vidx:
                raise ValueError(f"edge {name} references unknown vertex")
            us.append(self._vidx[u])
            vs.append(self._vidx[v])
            lengths.append(length)
            if name in self._eidx:
                raise ValueError(f"duplicate edge name {name!r}")
            self._eidx[name] = k
            self.edge_names.append(str(name))

        self.edge_u = np.array(us, dtype=int)
        self.edge_v = np.array(vs, dtype=int)
        self.edge_len = np.array(lengths, dtype=float)
        m = len(lengths)
        if m != n - 1:
            raise ValueError(f"not a tree: {n} vertices need {n - 1} edges, got {m}")
        if m == 0:
            # Degenerate single-vertex tree: one point, zero diameter.
            self._dv = np.zeros((1, 1))
            self._pred = np.full((1, 1), -9999, dtype=int)
            self._vertex_rep = [TreePoint(-1, 0.0)]
            self._edge_of_pair = {}
            return

        rows = np.concatenate([self.edge_u, self.edge_v])
        cols = np.concatenate([self.edge_v, self.edge_u])
        data = np.concatenate([self.edge_len, self.edge_len])
        graph = csr_matrix((data, (rows, cols)), shape=(n, n))
        self._dv, self._pred = shortest_path(graph, method="D", return_predecessors=True)
        if np.isinf(self._dv).any():
            raise ValueError("tree graph is not connected")

        # Canonical representative of each vertex: lowest-index incident edge.
        rep_edge = np.full(n, -1, dtype=int)
        rep_off = np.zeros(n)
        for k in range(m):
            for vid, off in ((self.edge_u[k], 0.0), (self.edge_v[k], self.edge_len[k])):
                if rep_edge[vid] < 0:
                    rep_edge[vid] = k
                    rep_off[vid] = off
        self._vertex_rep = [TreePoint(int(rep_edge[i]), float(rep_off[i])) for i in range(n)]
        self._edge_of_pair = {}
        for k in range(m):
            self._edge_of_pair[(int(self.edge_u[k]), int(self.edge_v[k]))] = k
            self._edge_of_pair[(int(self.edge_v[k]), int(self.edge_u[k]))] = k

    def __repr__(self):
        return f"MetricTree({len(self.vertices)} vertices, {len(self.edge_len)} edges)"

    @property
    def n_edges(self) -> int:
        return len(self.edge_len)

    def total_length(self) -> float:
        return float(self.edge_len.sum())

    def edge_index(self, name) -> int:
        if isinstance(name, (int, np.integer)):
            k = int(name)
            if not 0 <= k < self.n_edges:
                raise SpaceMismatchError(f"edge index {k} out of range")
            return k
        if name not in self._eidx:
            raise SpaceMismatchError(f"unknown edge {name!r}")
        return self._eidx[name]

    def point(self, edge, offset: float) -> TreePoint:
        k = self.edge_index(edge)
        off = float(offset)
        if not -VERTEX_SNAP <= off <= self.edge_len[k] + VERTEX_SNAP:
            raise SpaceMismatchError(f"offset {off} outside edge of length {self.edge_len[k]}")
        return self.canonical(TreePoint(k, off))

    def vertex_point(self, vertex: str) -> TreePoint:
        if vertex not in self._vidx:
            raise SpaceMismatchError(f"unknown vertex {vertex!r}")
        return self._vertex_rep[self._vidx[vertex]]

    def canonical(self, p: TreePoint) -> TreePoint:
        if not isinstance(p, TreePoint):
            raise SpaceMismatchError(f"expected TreePoint, got {p!r}")
        if self.n_edges == 0:
            if p.edge == -1 and p.offset == 0.0:
                return self._vertex_rep[0]
            raise SpaceMismatchError(f"single-vertex tree has one point, got {p!r}")
        k = int(p.edge)
        if not 0 <= k < self.n_edges:
            raise SpaceMismatchError(f"edge index {k} out of range")
        off = float(min(max(p.offset, 0.0), self.edge_len[k]))
        if off <= VERTEX_SNAP:
            return self._vertex_rep[int(self.edge_u[k])]
        if self.edge_len[k] - off <= VERTEX_SNAP:
            return self._vertex_rep[int(self.edge_v[k])]
        return TreePoint(k, off)

    def validate(self, p) -> None:
        if not isinstance(p, TreePoint):
            raise SpaceMismatchError(f"expected TreePoint, got {p!r}")
        if self.n_edges == 0:
            if p.edge != -1 or p.offset != 0.0:
                raise SpaceMismatchError(f"single-vertex tree has one point, got {p!r}")
            return
        if not 0 <= p.edge < self.n_edges:
            raise SpaceMismatchError(f"edge index {p.edge} out of range")
        if not 0.0 <= p.offset <= self.edge_len[p.edge]:
            raise SpaceMismatchError(f"offset {p.offset} outside edge of length {self.edge_len[p.edge]}")

    def distance(self, p: TreePoint, q: TreePoint) -> float:
        self.validate(p)
        self.validate(q)
        if self.n_edges == 0:
            return 0.0
        if p.edge == q.edge:
            return abs(p.offset - q.offset)
        dv = self._dv
        up, vp = int(self.edge_u[p.edge]), int(self.edge_v[p.edge])
        uq, vq = int(self.edge_u[q.edge]), int(self.edge_v[q.edge])
        sp, rp = p.offset, self.edge_len[p.edge] - p.offset
        sq, rq = q.offset, self.edge_len[q.edge] - q.offset
        return min(
            sp + dv[up, uq] + sq,
            sp + dv[up, vq] + rq,
            rp + dv[vp, uq] + sq,
            rp + dv[vp, vq] + rq,
        )

    def pairwise(self, pts, qts=None) -> np.ndarray:
        if self.n_edges == 0:
            return np.zeros((len(pts), len(pts) if qts is None else len(qts)))
        E1 = np.array([p.edge for p in pts], dtype=int)
        S1 = np.array([p.offset for p in pts], dtype=float)
        if qts is None:
            E2, S2 = E1, S1
        else:
            E2 = np.array([q.edge for q in qts], dtype=int)
            S2 = np.array([q.offset for q in qts], dtype=float)
        u1, v1 = self.edge_u[E1], self.edge_v[E1]
        u2, v2 = self.edge_u[E2], self.edge_v[E2]
        r1 = self.edge_len[E1] - S1
        r2 = self.edge_len[E2] - S2
        dv = self._dv
        d = np.minimum.reduce([
            S1[:, None] + dv[np.ix_(u1, u2)] + S2[None, :],
            S1[:, None] + dv[np.ix_(u1, v2)] + r2[None, :],
            r1[:, None] + dv[np.ix_(v1, u2)] + S2[None, :],
            r1[:, None] + dv[np.ix_(v1, v2)] + r2[None, :],
        ])
        same = E1[:, None] == E2[None, :]
        if same.any():
            direct = np.abs(S1[:, None] - S2[None, :])
            d = np.where(same, direct, d)
        return d

    def _vertex_path(self, a: int, b: int) -> list[int]:
        if a == b:
            return [a]
        path = [b]
        while path[-1] != a:
            path.append(int(self._pred[a, path[-1]]))
        path.reverse()
        return path

    def geodesic_point(self, p: TreePoint, q: TreePoint, t: float) -> TreePoint:
        self._check_t(t)
        self.validate(p)
        self.validate(q)
        if self.n_edges == 0:
            return self._vertex_rep[0]
        if t == 0.0:
            return self.canonical(p)
        if t == 1.0:
            return self.canonical(q)
        if p.edge == q.edge:
            return self.canonical(TreePoint(p.edge, p.offset + t * (q.offset - p.offset)))

        total = self.distance(p, q)
        target = t * total
        dv = self._dv
        up, vp = int(self.edge_u[p.edge]), int(self.edge_v[p.edge])
        uq, vq = int(self.edge_u[q.edge]), int(self.edge_v[q.edge])
        sp, rp = p.offset, self.edge_len[p.edge] - p.offset
        sq, rq = q.offset, self.edge_len[q.edge] - q.offset
        combos = [
            (sp + dv[up, uq] + sq, up, uq),
            (sp + dv[up, vq] + rq, up, vq),
            (rp + dv[vp, uq] + sq, vp, uq),
            (rp + dv[vp, vq] + rq, vp, vq),
        ]
        _, exit_v, enter_v = min(combos, key=lambda c: c[0])

        leg = sp if exit_v == up else rp
        if target <= leg:
            off = p.offset - target if exit_v == up else p.offset + target
            return self.canonical(TreePoint(p.edge, off))
        remaining = target - leg
        path = self._vertex_path(exit_v, enter_v)
        for a, b in zip(path, path[1:]):
            k = self._edge_of_pair[(a, b)]
            ln = float(self.edge_len[k])
            if remaining <= ln:
                off = remaining if a == int(self.edge_u[k]) else ln - remaining
                return self.canonical(TreePoint(k, off))
            remaining -= ln
        # Walked to the entry vertex of q's edge; finish along it.
        off = remaining if enter_v == uq else self.edge_len[q.edge] - remaining
        return self.canonical(TreePoint(q.edge, off))

    def random_point(self, rng, scale: float = 1.0):
        if self.n_edges == 0:
            return self._vertex_rep[0]
        k = int(rng.integers(self.n_edges))
        return self.canonical(TreePoint(k, float(rng.uniform(0.0, self.edge_len[k]))))


def tripod(leg: float = 1.0) -> MetricTree:
    """Three segments of equal length glued at a common branch vertex."""
    return MetricTree(
        ["o", "t1", "t2", "t3"],
        [("o", "t1", leg, "leg1"), ("o", "t2", leg, "leg2"), ("o", "t3", leg, "leg3")],
    )


class ProductSpace(Space):
    """l2 product of component spaces; points are tuples of component points."""

    def __init__(self, components: Sequence[Space]):
        if len(components) < 2:
            raise ValueError("Product needs at least 2 components")
        self.components = tuple(components)

    def __repr__(self):
        return f"ProductSpace({', '.join(repr(c) for c in self.components)})"

    def point(self, parts) -> tuple:
        if len(parts) != len(self.components):
            raise SpaceMismatchError("component count mismatch")
        out = tuple(c.canonical(p) for c, p in zip(self.components, parts))
        self.validate(out)
        return out

    def validate(self, p) -> None:
        if not isinstance(p, tuple) or len(p) != len(self.components):
            raise SpaceMismatchError(f"expected {len(self.components)}-tuple, got {p!r}")
        for c, part in zip(self.components, p):
            c.validate(part)

    def canonical(self, p):
        return tuple(c.canonical(part) for c, part in zip(self.components, p))

    def distance(self, p, q) -> float:
        self.validate(p)
        self.validate(q)
        return float(np.sqrt(sum(c.distance(a, b) ** 2 for c, a, b in zip(self.components, p, q))))

    def pairwise(self, pts, qts=None) -> np.ndarray:
        acc = None
        for i, c in enumerate(self.components):
            a = [p[i] for p in pts]
            b = None if qts is None else [q[i] for q in qts]
            d = c.pairwise(a, b) ** 2
            acc = d if acc is None else acc + d
        return np.sqrt(acc)

    def geodesic_point(self, p, q, t: float):
        self._check_t(t)
        self.validate(p)
        self.validate(q)
        return tuple(c.geodesic_point(a, b, t) for c, a, b in zip(self.components, p, q))

    def random_point(self, rng, scale: float = 1.0):
        return tuple(c.random_point(rng, scale) for c in self.components)

    @property
    def has_tangent_maps(self) -> bool:
        return all(c.has_tangent_maps for c in self.components)

    def log_map(self, base, target) -> TangentVector:
        if not self.has_tangent_maps:
            raise UnsupportedSpaceError("product contains a component without tangent maps")
        parts = tuple(c.log_map(b, t).vec for c, b, t in zip(self.components, base, target))
        return TangentVector(base, parts)

    def exp_map(self, base, v: TangentVector):
        if not self.has_tangent_maps:
            raise UnsupportedSpaceError("product contains a component without tangent maps")
        return tuple(
            c.exp_map(b, TangentVector(b, part))
            for c, b, part in zip(self.components, base, v.vec)
        )

    def tangent_norm(self, v: TangentVector) -> float:
        total = 0.0
        for c, b, part in zip(self.components, v.base, v.vec):
            total += c.tangent_norm(TangentVector(b, part)) ** 2
        return float(np.sqrt(total))

    def tangent_sum(self, base, vecs, weights) -> TangentVector:
        parts = []
        for i, c in enumerate(self.components):
            comp_vecs = [TangentVector(base[i], tv.vec[i]) for tv in vecs]
            parts.append(c.tangent_sum(base[i], comp_vecs, weights).vec)
        return TangentVector(base, tuple(parts))


def distance(space: Space, p, q) -> float:
    return space.distance(p, q)


def geodesic_point(space: Space, p, q, t: float):
    return space.geodesic_point(p, q, t)


def log_map(space: Space, base, target) -> TangentVector:
    return space.log_map(base, target)


def exp_map(space: Space, base, v: TangentVector):
    return space.exp_map(base, v)


def cat0_midpoint_defect(space: Space, x, y, z) -> float:
    """Slack in the midpoint comparison inequality; nonnegative on CAT(0) spaces.

    Returns  1/2 d(x,y)^2 + 1/2 d(x,z)^2 - 1/4 d(y,z)^2 - d(x, m)^2  with m the
    geodesic midpoint of y and z.
    """
    m = space.geodesic_point(y, z, 0.5)
    return (
        0.5 * space.distance(x, y) ** 2
        + 0.5 * space.distance(x, z) ** 2
        - 0.25 * space.distance(y, z) ** 2
        - space.distance(x, m) ** 2
    )


def reshetnyak_defect(space: Space, x1, x2, x3, x4) -> float:
    """Cyclic four-point comparison: sum of side squares minus diagonal squares."""
    sides = (
        space.distance(x1, x2) ** 2
        + space.distance(x2, x3) ** 2
        + space.distance(x3, x4) ** 2
        + space.distance(x4, x1) ** 2
    )
    diags = space.distance(x1, x3) ** 2 + space.distance(x2, x4) ** 2
    return sides - diags


def points_equal(space: Space, p, q, tol: float = 0.0) -> bool:
    return space.distance(p, q) <= tol


def as_immutable(p):
    """Best-effort deep freeze used when ingesting external coordinate data."""
    if isinstance(p, np.ndarray):
        q = p.copy()
        q.setflags(write=False)
        return q
    if isinstance(p, tuple):
        return tuple(as_immutable(x) for x in p)
    return p
