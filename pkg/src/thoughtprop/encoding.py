"""Text encodings of shortest-path problems, and readers for them."""

from __future__ import annotations

import re
from enum import Enum

from thoughtprop.errors import InvalidArgumentError, ParseFailure
from thoughtprop.graph import ShortestPathProblem, WeightedGraph


class EncodingScheme(str, Enum):
    ADJACENCY = "adjacency"
    EDGE_DESCRIPTION = "edge-description"
    GML = "gml"

    @classmethod
    def parse(cls, value) -> "EncodingScheme":
        if isinstance(value, cls):
            return value
        aliases = {"edge": cls.EDGE_DESCRIPTION, "graph-modeling-language": cls.GML}
        key = value.strip().lower() if isinstance(value, str) else value
        try:
            return aliases.get(key) or cls(key)
        except (ValueError, TypeError):
            raise InvalidArgumentError(f"unknown encoding {value!r}") from None


def _ints(values) -> str:
    return "[" + ", ".join(str(v) for v in values) + "]"


def format_path(path) -> str:
    return _ints(path)


def encode_graph(graph: WeightedGraph, scheme, with_distances: bool = True) -> str:
    """Graph description without the source/target trailer."""
    scheme = EncodingScheme.parse(scheme)
    if scheme is EncodingScheme.ADJACENCY:
        lines = [
            f"Node set: {_ints(range(graph.node_count))}",
            "Edge set: [" + ", ".join(_ints(e) for e in graph.edges) + "]",
        ]
        if with_distances:
            lines.append(f"Edge distance set: {_ints(graph.distances)}")
        return "\n".join(lines)
    if scheme is EncodingScheme.EDGE_DESCRIPTION:
        clauses = ", ".join(
            f"an edge between node {u} and node {v} with distance {d}"
            for (u, v), d in zip(graph.edges, graph.distances)
        )
        return (
            f"In an undirected graph, the nodes are numbered from 0 to {graph.node_count - 1}, "
            f"and the edges are represented as: {clauses}."
        )
    parts = ['graph[comment "This is an undirected graph."']
    parts += [f"node [id {i}]" for i in range(graph.node_count)]
    parts += [
        f'edge [label "Edge between node {u} and node {v} with distance {d}"]'
        for (u, v), d in zip(graph.edges, graph.distances)
    ]
    return " ".join(parts) + "]"


def endpoints(source, target) -> str:
    return f"Source Node: {source}\nTarget Node: {target}"


def encode_problem(problem: ShortestPathProblem, scheme) -> str:
    return encode_graph(problem.graph, scheme) + "\n" + endpoints(problem.source, problem.target)


def encode_subproblem(problem: ShortestPathProblem, intermediate_target: int, scheme=EncodingScheme.ADJACENCY) -> str:
    """Same graph, with the target swapped for ``intermediate_target``."""
    if not 0 <= intermediate_target < problem.graph.node_count:
        raise InvalidArgumentError(f"node {intermediate_target} out of range")
    return encode_graph(problem.graph, scheme) + "\n" + endpoints(problem.source, intermediate_target)


# Readers. The oracle backend uses these to recover the graph embedded in a prompt.

_FLAT_LIST = r"\[\s*(?:-?\d+\s*(?:,\s*-?\d+\s*)*)?\]"
_ADJ_NODES = re.compile(r"Node set:\s*(" + _FLAT_LIST + ")")
_ADJ_EDGES = re.compile(r"Edge set:\s*(\[\s*(?:\[[^\[\]]*\]\s*,?\s*)*\])")
_ADJ_DISTANCES = re.compile(r"Edge distance set:\s*(" + _FLAT_LIST + ")")
_PAIR = re.compile(r"\[\s*(\d+)\s*,\s*(\d+)\s*\]")
_ED_RANGE = re.compile(r"numbered from 0 to (\d+)")
_ED_EDGE = re.compile(r"an edge between node (\d+) and node (\d+) with distance (\d+)")
_GML_NODE = re.compile(r"node \[id (\d+)\]")
_GML_EDGE = re.compile(r'Edge between node (\d+) and node (\d+) with distance (\d+)')
_SOURCE = re.compile(r"Source Node:\s*(\d+)")
_TARGET = re.compile(r"Target Node:\s*(\d+)")


def _list(text):
    return [int(x) for x in re.findall(r"-?\d+", text)]


def _build(node_count, triples):
    triples = sorted({(min(u, v), max(u, v)): d for u, v, d in triples}.items())
    return WeightedGraph(node_count, [e for e, _ in triples], [d for _, d in triples])


def decode_graph(text: str) -> WeightedGraph:
    """Recover a graph from any encoding. Adjacency text lacking distances gets unit weights."""
    nodes = _ADJ_NODES.search(text)
    if nodes:
        edges_match = _ADJ_EDGES.search(text)
        if not edges_match:
            raise ParseFailure("adjacency text without an edge set")
        pairs = [(int(u), int(v)) for u, v in _PAIR.findall(edges_match.group(1))]
        dist_match = _ADJ_DISTANCES.search(text)
        dists = _list(dist_match.group(1)) if dist_match else [1] * len(pairs)
        if len(dists) != len(pairs):
            raise ParseFailure("edge and distance sets differ in length")
        count = len(_list(nodes.group(1)))
        return _build(count, [(u, v, d) for (u, v), d in zip(pairs, dists)])
    span = _ED_RANGE.search(text)
    if span:
        return _build(int(span.group(1)) + 1, [tuple(map(int, m)) for m in _ED_EDGE.findall(text)])
    node_ids = _GML_NODE.findall(text)
    if node_ids:
        return _build(len(node_ids), [tuple(map(int, m)) for m in _GML_EDGE.findall(text)])
    raise ParseFailure("no graph description found")


def decode_problem(text: str, instance_id: str = "decoded") -> ShortestPathProblem:
    graph = decode_graph(text)
    source = _SOURCE.search(text)
    target = _TARGET.search(text)
    if not source or not target:
        raise ParseFailure("missing source or target line")
    return ShortestPathProblem.from_graph(instance_id, graph, int(source.group(1)), int(target.group(1)))
