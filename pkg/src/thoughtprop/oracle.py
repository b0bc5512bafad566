"""Simulated model that answers this package's own prompts with exact graph algorithms.

An ``OracleErrorModel`` degrades direct-solve answers on purpose so that the
harness can be exercised against controlled, reproducible mistakes.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass

from thoughtprop import prompts
from thoughtprop.encoding import decode_graph
from thoughtprop.errors import InvalidArgumentError, OracleParseError, ParseFailure
from thoughtprop.graph import (
    BRUTE_FORCE_MAX_NODES,
    WeightedGraph,
    cheapest_path_longer_than,
    greedy_nearest_path,
    neighbors,
    path_length,
    shortest_path,
)
from thoughtprop.parsing import flat_lists, format_path_answer

STRATEGIES = ("greedy-nearest", "second-shortest")


@dataclass(frozen=True)
class OracleErrorModel:
    p_suboptimal: float = 0.0
    p_invalid: float = 0.0
    suboptimal_strategy: str = "greedy-nearest"

    def __post_init__(self):
        for p in (self.p_suboptimal, self.p_invalid):
            if not 0 <= p <= 1:
                raise InvalidArgumentError("error probabilities must lie in [0, 1]")
        if self.p_suboptimal + self.p_invalid > 1 + 1e-12:
            raise InvalidArgumentError("p_suboptimal + p_invalid must not exceed 1")
        if self.suboptimal_strategy not in STRATEGIES:
            raise InvalidArgumentError(f"unknown strategy {self.suboptimal_strategy!r}")


PERFECT = OracleErrorModel()

_KINDS = (
    ("solve", "Find the shortest path from a source node to a target node"),
    ("propose", "Given an input node, find its neighborhood nodes"),
    ("aggregate", "We have hints of one or several intermediate paths"),
    ("select", "We have two solution candidates"),
    ("tot-evaluate", "Given several input nodes, evaluate these input nodes"),
)


def _int(pattern, text, name):
    m = re.search(pattern, text)
    if not m:
        raise OracleParseError(f"prompt lacks {name}")
    return int(m.group(1))


def _line_list(pattern, text, name):
    m = re.search(pattern + r"[^\n]*", text)
    if not m:
        raise OracleParseError(f"prompt lacks {name}")
    lists = flat_lists(m.group(0))
    return lists[-1] if lists else []


def classify(prompt: str) -> str:
    header = prompt.split("\n", 1)[0]
    for kind, marker in _KINDS:
        if marker in header:
            return kind
    raise OracleParseError("prompt was not produced by this package's templates")


def _fingerprint(graph: WeightedGraph, with_distances=True):
    return (graph.node_count, graph.edges, graph.distances if with_distances else None)


def _registered(graph, registry, with_distances):
    if not registry:
        return
    known = {_fingerprint(g, with_distances) for g in registry}
    if _fingerprint(graph, with_distances) not in known:
        raise OracleParseError("prompt graph is not in the registry")


def invalid_path(graph: WeightedGraph, source, target):
    """A path that uses a missing edge."""
    if graph.distance(source, target) is None:
        return [source, target]
    return [source, graph.node_count, target]


def degraded_path(graph, source, target, strategy):
    if strategy == "greedy-nearest":
        return greedy_nearest_path(graph, source, target)
    if graph.node_count > BRUTE_FORCE_MAX_NODES:
        return greedy_nearest_path(graph, source, target)
    optimal = shortest_path(graph, source, target)
    found = cheapest_path_longer_than(graph, source, target, path_length(graph, optimal))
    return found[1] if found else optimal


def _solve(prompt, block, graph, error_model, rng):
    source = _int(r"Source Node:\s*(\d+)", block, "a source node")
    target = _int(r"Target Node:\s*(\d+)", block, "a target node")
    if not (0 <= source < graph.node_count and 0 <= target < graph.node_count):
        raise OracleParseError("source or target outside the graph")
    optimal = shortest_path(graph, source, target)
    if optimal is None:
        return "There is no path from the source node to the target node."
    draw = rng.random()
    if draw < error_model.p_invalid:
        return format_path_answer(invalid_path(graph, source, target), path_length(graph, optimal))
    if draw < error_model.p_invalid + error_model.p_suboptimal:
        path = degraded_path(graph, source, target, error_model.suboptimal_strategy) or optimal
    else:
        path = optimal
    length = path_length(graph, path)
    if prompts.STEP_CUE in prompt or "Starting from node" in prompt:
        return prompts.cot_answer(graph, path, length)
    return format_path_answer(path, length)


def _aggregate(block, graph):
    m = re.search(r"from the source node (\d+) to the target node (\d+)", block)
    if not m:
        raise OracleParseError("aggregate prompt lacks its endpoints")
    source, target = int(m.group(1)), int(m.group(2))
    hints = []
    for line in block.splitlines():
        if "intermediate node" in line:
            lists = flat_lists(line)
            if lists:
                hints.append(lists[-1])
    best = prompts.best_aggregate(graph, source, target, hints)
    if best is None:
        return "The hints do not lead to the target node, so I cannot find a path."
    return prompts.aggregate_answer(source, target, best[0], best[1])


def _select(block, graph):
    source = _int(r"Source Node:\s*(\d+)", block, "a source node")
    target = _int(r"Target Node:\s*(\d+)", block, "a target node")
    first = _line_list(r"Solution 1:", block, "solution 1")
    second = _line_list(r"Solution 2:", block, "solution 2")
    _, text = prompts.select_verdict(graph, source, target, first, second)
    return text


def _tot(block, graph):
    current = _line_list(r"Current Path:", block, "a current path")
    candidates = _line_list(r"Input Nodes:", block, "input nodes")
    target = _int(r"Target Node:\s*(\d+)", block, "a target node")
    if not current:
        raise OracleParseError("empty current path")
    node, path, dist = prompts.best_next_node(graph, current, candidates, target)
    if node is None:
        if not candidates:
            return "None of the input nodes can reach the target node."
        return (
            "The most promising one that forms the shortest path to the target node in the input nodes "
            f"is {min(candidates)}."
        )
    return prompts.tot_answer(node, path, dist)


def simulate_oracle_reply(prompt: str, registry=None, error_model: OracleErrorModel = PERFECT, rng=None) -> str:
    """Answer a harness prompt the way a well-behaved model would.

    ``registry`` optionally lists the graphs the oracle is allowed to see;
    a prompt about any other graph raises ``OracleParseError``.
    """
    rng = rng or random.Random(0)
    kind = classify(prompt)
    if "\nInput:\n" not in prompt:
        raise OracleParseError("prompt has no input section")
    block = prompt.rsplit("\nInput:\n", 1)[1]
    try:
        graph = decode_graph(block)
    except (ParseFailure, InvalidArgumentError) as exc:
        raise OracleParseError(f"cannot read the graph: {exc}") from None
    has_distances = kind != "propose" or "distance" in block
    _registered(graph, registry, with_distances=has_distances)
    if kind == "solve":
        return _solve(prompt, block, graph, error_model, rng)
    if kind == "propose":
        node = _int(r"Input Node:\s*(\d+)", block, "an input node")
        if not 0 <= node < graph.node_count:
            raise OracleParseError("input node outside the graph")
        return prompts.neighbor_answer(neighbors(graph, node))
    if kind == "aggregate":
        return _aggregate(block, graph)
    if kind == "select":
        return _select(block, graph)
    return _tot(block, graph)
