"""JSON scenario format: named spaces, mm-spaces, graphs, and map tables."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .measures import (
    InvalidMeasureError,
    InvalidMetricError,
    MapTable,
    MMSpace,
    ProductMMSpace,
    product_mm,
)
from .obsvar import GraphMM
from .spaces import Euclidean, Hyperboloid, MetricTree, ProductSpace, Space, TreePoint


class ScenarioError(ValueError):
    """Scenario validation failure; message carries the offending JSON path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.json_path = path


@dataclass
class Scenario:
    version: int
    spaces: dict[str, Space]
    mm_spaces: dict[str, MMSpace]
    graphs: dict[str, GraphMM]
    maps: dict[str, MapTable]
    suites: list[str]
    seed: int
    tolerances: dict[str, float] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)


def _need(obj: dict, key: str, path: str):
    if key not in obj:
        raise ScenarioError(path, f"missing required field {key!r}")
    return obj[key]


def parse_space(obj, path: str, named: dict[str, Space] | None = None) -> Space:
    if isinstance(obj, str):
        if named is None or obj not in named:
            raise ScenarioError(path, f"unknown space reference {obj!r}")
        return named[obj]
    if not isinstance(obj, dict):
        raise ScenarioError(path, "space descriptor must be an object or a name")
    kind = _need(obj, "kind", path)
    try:
        if kind == "euclidean":
            return Euclidean(int(_need(obj, "dim", path)))
        if kind == "hyperboloid":
            return Hyperboloid(int(_need(obj, "dim", path)))
        if kind == "tree":
            vertices = _need(obj, "vertices", path)
            edges = [tuple(e) for e in _need(obj, "edges", path)]
            return MetricTree(vertices, edges)
        if kind == "product":
            comps = _need(obj, "components", path)
            parsed = [
                parse_space(c, f"{path}.components[{i}]", named)
                for i, c in enumerate(comps)
            ]
            return ProductSpace(parsed)
    except ScenarioError:
        raise
    except (ValueError, TypeError) as exc:
        raise ScenarioError(path, str(exc)) from exc
    raise ScenarioError(path, f"unknown space kind {kind!r}")


def parse_point(space: Space, obj, path: str):
    try:
        if isinstance(space, Euclidean):
            return space.point(obj)
        if isinstance(space, Hyperboloid):
            return space.point(obj)
        if isinstance(space, MetricTree):
            if not isinstance(obj, (list, tuple)) or len(obj) != 2:
                raise ScenarioError(path, "tree point must be [edge, offset]")
            return space.point(obj[0], float(obj[1]))
        if isinstance(space, ProductSpace):
            if not isinstance(obj, (list, tuple)) or len(obj) != len(space.components):
                raise ScenarioError(path, "product point must list one part per component")
            return tuple(
                parse_point(c, part, f"{path}[{i}]")
                for i, (c, part) in enumerate(zip(space.components, obj))
            )
    except ScenarioError:
        raise
    except (ValueError, TypeError) as exc:
        raise ScenarioError(path, str(exc)) from exc
    raise ScenarioError(path, f"cannot parse point for {space!r}")


def point_to_json(space: Space, p):
    """Inverse of parse_point, used by reports."""
    if isinstance(space, Euclidean):
        return [float(x) for x in p]
    if isinstance(space, Hyperboloid):
        return [float(x) for x in p]
    if isinstance(space, MetricTree):
        return [space.edge_names[p.edge], float(p.offset)]
    if isinstance(space, ProductSpace):
        return [point_to_json(c, part) for c, part in zip(space.components, p)]
    raise TypeError(f"cannot serialize point of {space!r}")


def _parse_graph(obj, path: str) -> GraphMM:
    if "edges" in obj:
        edges = [(int(u), int(v)) for u, v in obj["edges"]]
        n = int(obj.get("n", 1 + max(max(u, v) for u, v in edges))) if edges else int(obj.get("n", 1))
    elif "adjacency" in obj:
        adj = obj["adjacency"]
        edges = []
        keys = {int(k) for k in adj}
        for k, nbrs in adj.items():
            for v in nbrs:
                u, v = int(k), int(v)
                keys.add(v)
                if u < v:
                    edges.append((u, v))
        n = int(obj.get("n", 1 + max(keys)))
    else:
        raise ScenarioError(path, "graph needs an 'edges' list or an 'adjacency' object")
    try:
        return GraphMM(n, edges)
    except InvalidMeasureError as exc:
        raise ScenarioError(path, str(exc)) from exc


def parse_mm_space(obj, path: str) -> tuple[MMSpace, GraphMM | None]:
    if not isinstance(obj, dict):
        raise ScenarioError(path, "mm-space descriptor must be an object")
    kind = obj.get("kind", "metric")
    if kind == "graph":
        graph = _parse_graph(obj, path)
        scale = float(obj.get("scale", 1.0))
        return graph.to_mm_space(scale), graph
    if kind == "metric":
        labels = _need(obj, "labels", path)
        metric = _need(obj, "metric", path)
        prob = _need(obj, "prob", path)
        try:
            return MMSpace(labels, metric, prob), None
        except (InvalidMetricError, InvalidMeasureError) as exc:
            raise ScenarioError(path, str(exc)) from exc
    raise ScenarioError(path, f"unknown mm-space kind {kind!r}")


def parse_map(obj, path: str, mm_spaces: dict[str, MMSpace],
              spaces: dict[str, Space]) -> MapTable:
    domain_ref = _need(obj, "domain", path)
    if not isinstance(domain_ref, (list, tuple)) or len(domain_ref) != 2:
        raise ScenarioError(f"{path}.domain", "domain must name two mm-spaces [X, Y]")
    for name in domain_ref:
        if name not in mm_spaces:
            raise ScenarioError(f"{path}.domain", f"unknown mm-space {name!r}")
    X, Y = mm_spaces[domain_ref[0]], mm_spaces[domain_ref[1]]
    dom = product_mm(X, Y)
    target_ref = _need(obj, "target", path)
    if target_ref not in spaces:
        raise ScenarioError(f"{path}.target", f"unknown space {target_ref!r}")
    target = spaces[target_ref]
    raw = _need(obj, "values", path)
    values = [None] * dom.n
    for i, xl in enumerate(X.labels):
        if xl not in raw:
            raise ScenarioError(f"{path}.values", f"missing row for sample {xl!r}")
        row = raw[xl]
        for j, yl in enumerate(Y.labels):
            if yl not in row:
                raise ScenarioError(f"{path}.values.{xl}", f"missing value for sample {yl!r}")
            values[dom.index(i, j)] = parse_point(target, row[yl], f"{path}.values.{xl}.{yl}")
    return MapTable(dom, target, values)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(str(path), f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ScenarioError("$", "scenario must be a JSON object")
    version = raw.get("version", 1)
    if version != 1:
        raise ScenarioError("version", f"unsupported version {version!r}")

    spaces: dict[str, Space] = {}
    for name, obj in raw.get("spaces", {}).items():
        spaces[name] = parse_space(obj, f"spaces.{name}", spaces)

    mm_spaces: dict[str, MMSpace] = {}
    graphs: dict[str, GraphMM] = {}
    for name, obj in raw.get("mm_spaces", {}).items():
        mm, graph = parse_mm_space(obj, f"mm_spaces.{name}")
        mm_spaces[name] = mm
        if graph is not None:
            graphs[name] = graph

    maps: dict[str, MapTable] = {}
    for name, obj in raw.get("maps", {}).items():
        maps[name] = parse_map(obj, f"maps.{name}", mm_spaces, spaces)

    suites = raw.get("suites", [])
    if not isinstance(suites, list):
        raise ScenarioError("suites", "suites must be a list of suite names")
    seed = int(raw.get("seed", 0))
    tolerances = {str(k): float(v) for k, v in raw.get("tolerances", {}).items()}
    counts = {str(k): int(v) for k, v in raw.get("counts", {}).items()}
    return Scenario(version, spaces, mm_spaces, graphs, maps, list(suites), seed,
                    tolerances, counts)
