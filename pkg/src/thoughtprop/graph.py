"""Weighted undirected graphs, the random instance generator and path oracles."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from itertools import combinations, groupby
from typing import Iterable, Sequence

from thoughtprop import kernels
from thoughtprop.errors import DatasetGenerationError, InvalidArgumentError, SizeLimitError

MIN_DISTANCE = 1
MAX_DISTANCE = 5
BRUTE_FORCE_MAX_NODES = 12
RESAMPLE_CAP = 1000


@dataclass(frozen=True)
class WeightedGraph:
    node_count: int
    edges: tuple[tuple[int, int], ...]
    distances: tuple[int, ...]

    def __post_init__(self):
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "distances", tuple(int(d) for d in self.distances))
        if self.node_count < 1:
            raise InvalidArgumentError("node_count must be positive")
        if len(self.distances) != len(edges):
            raise InvalidArgumentError("edges and distances differ in length")
        if len(set(edges)) != len(edges):
            raise InvalidArgumentError("duplicate edge")
        for (u, v), d in zip(edges, self.distances):
            if not 0 <= u < v < self.node_count:
                raise InvalidArgumentError(f"bad edge ({u}, {v})")
            if d < 1:
                raise InvalidArgumentError(f"edge ({u}, {v}) has distance {d}")

    @property
    def weights(self) -> dict[tuple[int, int], int]:
        return dict(zip(self.edges, self.distances))

    def distance(self, u: int, v: int) -> int | None:
        """Edge distance between ``u`` and ``v`` in either order, or None."""
        key = (u, v) if u < v else (v, u)
        return self.weights.get(key)

    def columns(self):
        us = [u for u, _ in self.edges]
        vs = [v for _, v in self.edges]
        return us, vs, list(self.distances)


@dataclass(frozen=True)
class PathEvaluation:
    feasible: bool
    length: int | None
    optimal: bool


@dataclass(frozen=True)
class ShortestPathProblem:
    instance_id: str
    graph: WeightedGraph
    source: int
    target: int
    optimal_length: int
    optimal_path: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "optimal_path", tuple(self.optimal_path))
        n = self.graph.node_count
        if not (0 <= self.source < n and 0 <= self.target < n):
            raise InvalidArgumentError(f"{self.instance_id}: endpoints out of range")
        path = self.optimal_path
        if path and (path[0] != self.source or path[-1] != self.target
                     or path_length(self.graph, path) != self.optimal_length):
            raise InvalidArgumentError(f"{self.instance_id}: optimal_path does not match optimal_length")
        if dijkstra(self.graph, self.source)[0][self.target] != self.optimal_length:
            raise InvalidArgumentError(f"{self.instance_id}: optimal_length is not the shortest distance")

    @classmethod
    def from_graph(cls, instance_id: str, graph: WeightedGraph, source: int = 0, target: int | None = None):
        if target is None:
            target = graph.node_count - 1
        path = shortest_path(graph, source, target)
        if path is None:
            raise InvalidArgumentError(f"{instance_id}: target {target} unreachable from {source}")
        return cls(instance_id, graph, source, target, path_length(graph, path), tuple(path))

    def to_json(self) -> str:
        record = {
            "instance_id": self.instance_id,
            "node_count": self.graph.node_count,
            "edges": [list(e) for e in self.graph.edges],
            "distances": list(self.graph.distances),
            "source": self.source,
            "target": self.target,
            "optimal_length": self.optimal_length,
            "optimal_path": list(self.optimal_path),
        }
        return json.dumps(record)

    @classmethod
    def from_dict(cls, record: dict) -> "ShortestPathProblem":
        graph = WeightedGraph(record["node_count"], [tuple(e) for e in record["edges"]], record["distances"])
        return cls(
            record["instance_id"],
            graph,
            record["source"],
            record["target"],
            record["optimal_length"],
            tuple(record["optimal_path"]),
        )


def generate_connected_graph(n: int, p: float, rng: random.Random) -> WeightedGraph:
    """Erdos-Renyi style graph forced to be connected.

    Candidate pairs are grouped by their smaller endpoint; each group keeps one
    uniformly chosen pair and then every pair independently with probability
    ``p``. Distances are drawn afterwards, in sorted edge order.
    """
    if n < 2:
        raise InvalidArgumentError("need at least two nodes")
    if not 0 <= p <= 1:
        raise InvalidArgumentError("p must lie in [0, 1]")
    chosen = set()
    for _, group in groupby(combinations(range(n), 2), key=lambda e: e[0]):
        group = list(group)
        chosen.add(rng.choice(group))
        for e in group:
            if rng.random() < p:
                chosen.add(e)
    edges = sorted(chosen)
    distances = [rng.randint(MIN_DISTANCE, MAX_DISTANCE) for _ in edges]
    return WeightedGraph(n, edges, distances)


def generate_dataset(count: int, n_min: int = 5, n_max: int = 10, p: float = 0.2, seed: int = 0) -> list[ShortestPathProblem]:
    if count < 1:
        raise InvalidArgumentError("count must be at least 1")
    if not 2 <= n_min <= n_max:
        raise InvalidArgumentError("need 2 <= n_min <= n_max")
    rng = random.Random(seed)
    problems = []
    for index in range(count):
        for _ in range(RESAMPLE_CAP):
            n = rng.randint(n_min, n_max)
            graph = generate_connected_graph(n, p, rng)
            problem = ShortestPathProblem.from_graph(f"g{index:04d}", graph)
            if len(problem.optimal_path) >= 3:
                problems.append(problem)
                break
        else:
            raise DatasetGenerationError(
                f"instance {index}: no multi-edge optimum after {RESAMPLE_CAP} draws"
            )
    return problems


def dijkstra(graph: WeightedGraph, source: int) -> tuple[list[float], list[int | None]]:
    """Exact distances from ``source`` (``math.inf`` when unreachable) and predecessors.

    Ties resolve to the smallest predecessor index.
    """
    if not 0 <= source < graph.node_count:
        raise InvalidArgumentError(f"source {source} out of range")
    dist, pred = kernels.dijkstra(graph.node_count, *graph.columns(), source)
    return [math.inf if d < 0 else d for d in dist], [None if u < 0 else u for u in pred]


def shortest_path(graph: WeightedGraph, source: int, target: int) -> list[int] | None:
    dist, pred = dijkstra(graph, source)
    if math.isinf(dist[target]):
        return None
    path = [target]
    while path[-1] != source:
        path.append(pred[path[-1]])
    return path[::-1]


def _check_small(graph):
    if graph.node_count > BRUTE_FORCE_MAX_NODES:
        raise SizeLimitError(f"exhaustive search limited to {BRUTE_FORCE_MAX_NODES} nodes")


def brute_force_shortest(graph: WeightedGraph, source: int, target: int) -> int | None:
    """Minimum length over every simple path, by exhaustive enumeration."""
    _check_small(graph)
    length, _ = kernels.best_simple_path(graph.node_count, *graph.columns(), source, target, -1)
    return None if length < 0 else length


def cheapest_path_longer_than(graph: WeightedGraph, source: int, target: int, bound: int):
    """Cheapest simple path strictly longer than ``bound`` as ``(length, path)``, or None."""
    _check_small(graph)
    length, path = kernels.best_simple_path(graph.node_count, *graph.columns(), source, target, bound)
    return None if length < 0 else (length, list(path))


def path_length(graph: WeightedGraph, path: Sequence[int]) -> int | None:
    weights = graph.weights
    total = 0
    for u, v in zip(path, path[1:]):
        d = weights.get((u, v) if u < v else (v, u))
        if d is None:
            return None
        total += d
    return total


def validate_path(problem: ShortestPathProblem, path: Iterable | None) -> PathEvaluation:
    """Score a proposed path. Never raises; anything malformed is infeasible."""
    infeasible = PathEvaluation(False, None, False)
    try:
        nodes = list(path) if path is not None else []
    except TypeError:
        return infeasible
    if len(nodes) < 2 or not all(isinstance(x, int) and not isinstance(x, bool) for x in nodes):
        return infeasible
    if nodes[0] != problem.source or nodes[-1] != problem.target or len(set(nodes)) != len(nodes):
        return infeasible
    length = path_length(problem.graph, nodes)
    if length is None:
        return infeasible
    return PathEvaluation(True, length, length == problem.optimal_length)


def neighbors(graph: WeightedGraph, node: int) -> list[int]:
    if not 0 <= node < graph.node_count:
        raise InvalidArgumentError(f"node {node} out of range")
    out = []
    for u, v in graph.edges:
        if u == node:
            out.append(v)
        elif v == node:
            out.append(u)
    return sorted(out)


def greedy_nearest_path(graph: WeightedGraph, source: int, target: int) -> list[int] | None:
    """Walk to the nearest unvisited neighbour, backtracking out of dead ends."""
    adjacency = {u: [] for u in range(graph.node_count)}
    for (u, v), d in zip(graph.edges, graph.distances):
        adjacency[u].append((d, v))
        adjacency[v].append((d, u))
    for row in adjacency.values():
        row.sort()
    path, visited = [source], {source}
    cursors = [0]
    while path:
        if path[-1] == target:
            return path
        row = adjacency[path[-1]]
        while cursors[-1] < len(row) and row[cursors[-1]][1] in visited:
            cursors[-1] += 1
        if cursors[-1] == len(row):
            path.pop()
            cursors.pop()
            continue
        nxt = row[cursors[-1]][1]
        cursors[-1] += 1
        path.append(nxt)
        visited.add(nxt)
        cursors.append(0)
    return None


def is_connected(graph: WeightedGraph) -> bool:
    dist, _ = dijkstra(graph, 0)
    return not any(math.isinf(d) for d in dist)


def write_dataset(problems: Iterable[ShortestPathProblem], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for problem in problems:
            fh.write(problem.to_json() + "\n")


def read_dataset(path) -> list[ShortestPathProblem]:
    with open(path, encoding="utf-8") as fh:
        return [ShortestPathProblem.from_dict(json.loads(line)) for line in fh if line.strip()]
