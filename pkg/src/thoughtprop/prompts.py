"""Prompt assembly from the text assets in ``templates/``.

Every prompt kind also has a canonical answer formatter here. The exemplars
use them, and so does the oracle backend, which keeps simulated replies in
the same shape the exemplars teach.
"""

from __future__ import annotations

import json
import re
from functools import lru_cache
from importlib import resources

from thoughtprop.encoding import EncodingScheme, encode_graph, endpoints, format_path
from thoughtprop.errors import InvalidArgumentError
from thoughtprop.graph import (
    ShortestPathProblem,
    WeightedGraph,
    neighbors,
    path_length,
    shortest_path,
)
from thoughtprop.parsing import format_path_answer

SHOTS = (0, 1, 5)
SOLVE_METHODS = ("io", "cot", "bag")
STEP_CUE = "Let's think step by step."
BAG_PREAMBLE = " Let's construct a graph with the nodes and edges first."
PROPOSE_SHOTS = 5
TOT_EXEMPLARS = {0: 0, 1: 1, 5: 4}

REPRESENTATION = {
    EncodingScheme.ADJACENCY: "represented as a node set, an edge set, and an edge distance set",
    EncodingScheme.EDGE_DESCRIPTION: "described by its edges and their distances",
    EncodingScheme.GML: "represented in Graph Modeling Language",
}
# the neighbour prompt shows adjacency graphs without distances
PROPOSE_REPRESENTATION = dict(REPRESENTATION)
PROPOSE_REPRESENTATION[EncodingScheme.ADJACENCY] = "represented as a node set, an edge set"

FORMAT_GRAPH = {
    EncodingScheme.ADJACENCY: "Node set: []\nEdge set: []\nEdge distance set: []",
    EncodingScheme.EDGE_DESCRIPTION: (
        "In an undirected graph, the nodes are numbered from 0 to N, and the edges are represented as: "
        "an edge between node i and node j with distance LENGTH, ..."
    ),
    EncodingScheme.GML: (
        'graph[comment "This is an undirected graph." node [id 0] ... node [id N] '
        'edge [label "Edge between node i and node j with distance LENGTH"] ...]'
    ),
}
FORMAT_ANSWER = (
    "The shortest path from the source node to the target node is "
    "[source node index, ..., target node index]. The shortest distance is BLANK."
)
FORMAT_TOT_ANSWER = (
    "The most promising one that forms the shortest path to the target node in the input nodes "
    "is BLANK. The shortest path is [input node index, ..., target node index]. The shortest distance is BLANK."
)

_SLOT = re.compile(r"\{(\w+)\}")


@lru_cache(maxsize=None)
def template(name: str) -> str:
    return resources.files("thoughtprop").joinpath("templates").joinpath(f"{name}.txt").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def _exemplar_data():
    raw = resources.files("thoughtprop").joinpath("templates").joinpath("exemplars.json").read_text(encoding="utf-8")
    return json.loads(raw)


def fill(text: str, **slots) -> str:
    """Single-pass ``{slot}`` substitution; inserted values are never rescanned."""

    def sub(match):
        key = match.group(1)
        if key not in slots:
            raise InvalidArgumentError(f"template slot {key!r} left unfilled")
        return str(slots[key])

    return _SLOT.sub(sub, text)


def _graph(spec) -> WeightedGraph:
    data = _exemplar_data()
    if isinstance(spec, int):
        spec = data["solve"][spec]
    return WeightedGraph(spec["node_count"], [tuple(e) for e in spec["edges"]], spec["distances"])


def exemplar_problems() -> list[ShortestPathProblem]:
    out = []
    for i, spec in enumerate(_exemplar_data()["solve"]):
        out.append(ShortestPathProblem.from_graph(f"exemplar{i}", _graph(spec), spec["source"], spec["target"]))
    return out


def _check(shots, scheme):
    if shots not in SHOTS:
        raise InvalidArgumentError(f"shots must be one of {SHOTS}")
    return EncodingScheme.parse(scheme)


# Answer formats -----------------------------------------------------------


def cot_answer(graph: WeightedGraph, path, distance) -> str:
    steps = [
        f"Starting from node {u}, we arrive at node {v}. The distance between these two nodes is {graph.distance(u, v)}."
        for u, v in zip(path, path[1:])
    ]
    final = format_path_answer(path, distance)
    return "\n".join(steps + ["Thus, t" + final[1:]])


def neighbor_answer(nodes) -> str:
    return f"The neighborhood node list of the input node is {format_path(nodes)}."


def tot_answer(node, path, distance) -> str:
    return (
        "The most promising one that forms the shortest path to the target node in the input nodes is "
        f"{node}. The shortest path is {format_path(path)}. The shortest distance is {distance}."
    )


def hint_line(source, node, path, distance) -> str:
    return (
        f"The shortest path from the source node {source} to the intermediate node {node} is "
        f"{format_path(path)}. The shortest distance is {distance}."
    )


def targeted_answer(source, target, path, distance) -> str:
    text = f"the shortest path from the source node {source} to the target node {target} is {format_path(path)}."
    if distance is not None:
        text += f" The shortest distance is {distance}."
    return text


def aggregate_answer(source, target, path, distance) -> str:
    return "Using the above hints, " + targeted_answer(source, target, path, distance)


def select_answer(source, target, first_valid, second_valid, choice, path, distance, tie=False) -> str:
    """Verdict text for the two-candidate comparison; ``choice`` is 1, 2 or None."""
    parts = []
    for k, ok in ((1, first_valid), (2, second_valid)):
        if ok:
            parts.append(
                f"Solution {k} is valid because it can reach the target node and all the edges in "
                f"Solution {k} are real edges in the Edge set."
            )
        else:
            parts.append(
                f"Solution {k} is invalid because it is not a path from the source node to the target "
                "node along real edges in the Edge set."
            )
    if choice is None:
        parts.append("Neither solution is valid.")
        return " ".join(parts)
    other = 3 - choice
    if tie:
        reason = "both solutions have the same distance, so the first solution is kept"
    elif first_valid and second_valid:
        reason = f"the path in Solution {choice} is shorter than that in Solution {other}"
    else:
        reason = f"only Solution {choice} is valid"
    parts.append(f"Solution {choice} is better than Solution {other} because {reason}.")
    parts.append("So " + targeted_answer(source, target, path, distance))
    return " ".join(parts)


# Solve prompts (IO / CoT / BaG) ---------------------------------------------


def _solve_examples(method, shots, scheme):
    if shots == 0:
        fmt = FORMAT_GRAPH[scheme] + "\n" + endpoints("source node index", "target node index")
        return template("format_intro") + fill(template("example"), input=fmt, answer=FORMAT_ANSWER)
    blocks = []
    for problem in exemplar_problems()[:shots]:
        if method == "io":
            answer = format_path_answer(problem.optimal_path, problem.optimal_length)
        else:
            answer = cot_answer(problem.graph, problem.optimal_path, problem.optimal_length)
        text = encode_graph(problem.graph, scheme) + "\n" + endpoints(problem.source, problem.target)
        blocks.append(fill(template("example"), input=text, answer=answer))
    return "".join(blocks)


def solve_prompt(method: str, shots: int, scheme, input_text: str) -> str:
    """Prompt for one direct solve. ``input_text`` is an encoded (sub)problem."""
    scheme = _check(shots, scheme)
    if method not in SOLVE_METHODS:
        raise InvalidArgumentError(f"no solve template for {method!r}")
    return fill(
        template("solve"),
        representation=REPRESENTATION[scheme],
        preamble=BAG_PREAMBLE if method == "bag" else "",
        examples=_solve_examples(method, shots, scheme),
        input=input_text,
        cue="\n\n" + STEP_CUE if method != "io" and shots == 0 else "",
    )


# Neighbour proposal -----------------------------------------------------------


def _propose_input(graph, node, scheme):
    return encode_graph(graph, scheme, with_distances=False) + f"\nInput Node: {node}"


def propose_prompt(graph: WeightedGraph, node: int, scheme) -> str:
    scheme = EncodingScheme.parse(scheme)
    blocks = []
    for item in _exemplar_data()["propose"][:PROPOSE_SHOTS]:
        g = _graph(item["graph"])
        blocks.append(
            fill(template("example"), input=_propose_input(g, item["node"], scheme),
                 answer=neighbor_answer(neighbors(g, item["node"])))
        )
    return fill(
        template("propose"),
        representation=PROPOSE_REPRESENTATION[scheme],
        examples="".join(blocks),
        input=_propose_input(graph, node, scheme),
    )


# Tree-of-thought node evaluation --------------------------------------------------


def tot_input(graph, current_path, candidates, target, scheme) -> str:
    return (
        encode_graph(graph, scheme)
        + f"\nCurrent Path: {format_path(current_path)}"
        + f"\nInput Nodes: {format_path(candidates)}"
        + f"\nTarget Node: {target}"
    )


def best_next_node(graph: WeightedGraph, current_path, candidates, target):
    """Candidate minimising step cost plus remaining distance, avoiding visited nodes.

    Returns ``(node, path_from_node, distance_from_node)``; ``node`` is None when
    no candidate can reach the target. Ties go to the smaller node index.
    """
    visited = set(current_path)
    keep = [
        (e, d) for e, d in zip(graph.edges, graph.distances) if e[0] not in visited and e[1] not in visited
    ]
    reduced = WeightedGraph(graph.node_count, [e for e, _ in keep], [d for _, d in keep])
    best = None
    for c in sorted(set(candidates)):
        if not 0 <= c < graph.node_count or c in visited:
            continue
        step = graph.distance(current_path[-1], c)
        rest = shortest_path(reduced, c, target)
        if step is None or rest is None:
            continue
        score = step + path_length(reduced, rest)
        if best is None or score < best[0]:
            best = (score, c, rest, path_length(reduced, rest))
    if best is None:
        return None, None, None
    return best[1], best[2], best[3]


def tot_evaluate_prompt(graph, current_path, candidates, target, shots, scheme) -> str:
    scheme = _check(shots, scheme)
    count = TOT_EXEMPLARS[shots]
    if count == 0:
        fmt = (
            FORMAT_GRAPH[scheme]
            + "\nCurrent Path: [source node index, ..., current node index]"
            + "\nInput Nodes: [input node index, ...]\nTarget Node: target node index"
        )
        examples = template("format_intro") + fill(template("example"), input=fmt, answer=FORMAT_TOT_ANSWER)
    else:
        blocks = []
        for item in _exemplar_data()["tot_evaluate"][:count]:
            g = _graph(item["graph"])
            node, path, dist = best_next_node(g, item["current_path"], item["candidates"], item["target"])
            blocks.append(
                fill(template("example"),
                     input=tot_input(g, item["current_path"], item["candidates"], item["target"], scheme),
                     answer=tot_answer(node, path, dist))
            )
        examples = "".join(blocks)
    return fill(
        template("tot_evaluate"),
        examples=examples,
        input=tot_input(graph, current_path, candidates, target, scheme),
    )


# Aggregation and selection ------------------------------------------------------


def aggregate_input(graph, source, target, hints, scheme) -> str:
    """``hints`` is a sequence of ``(node, path, distance)``."""
    return fill(
        template("aggregate_input"),
        graph=encode_graph(graph, scheme),
        hints="\n".join(hint_line(source, n, p, d) for n, p, d in hints),
        source=source,
        target=target,
    )


def best_aggregate(graph: WeightedGraph, source, target, hint_paths):
    """Best simple path built from one hint: its prefix up to the target, or hint plus closing edge."""
    best = None
    for path in hint_paths:
        path = list(path)
        if not path or path[0] != source or path_length(graph, path) is None or len(set(path)) != len(path):
            continue
        if target in path:
            built = path[: path.index(target) + 1]
        elif graph.distance(path[-1], target) is not None:
            built = path + [target]
        else:
            continue
        length = path_length(graph, built)
        if len(built) >= 2 and (best is None or length < best[1]):
            best = (built, length)
    return best


def aggregate_prompt(graph: WeightedGraph, source, target, hints, scheme) -> str:
    scheme = EncodingScheme.parse(scheme)
    item = _exemplar_data()["aggregate"]
    g = _graph(item["graph"])
    ex_source, ex_target = 0, g.node_count - 1
    ex_hints = [(p[-1], p, path_length(g, p)) for p in item["hints"]]
    built, length = best_aggregate(g, ex_source, ex_target, item["hints"])
    example = fill(
        template("example"),
        input=aggregate_input(g, ex_source, ex_target, ex_hints, scheme),
        answer=aggregate_answer(ex_source, ex_target, built, length),
    )
    return fill(
        template("aggregate"),
        representation=REPRESENTATION[scheme],
        examples=example,
        input=aggregate_input(graph, source, target, hints, scheme),
    )


def solution_line(source, target, path, distance) -> str:
    return "T" + targeted_answer(source, target, path, distance)[1:]


def select_input(graph, source, target, first, second, scheme) -> str:
    """``first`` / ``second`` are ``(path, distance)`` with distance possibly None."""
    return fill(
        template("select_input"),
        problem=encode_graph(graph, scheme) + "\n" + endpoints(source, target),
        first=solution_line(source, target, *first),
        second=solution_line(source, target, *second),
    )


def select_verdict(graph, source, target, first, second):
    """Symbolic comparison used by the oracle and the exemplar: ``(choice, text)``."""
    def length_of(path):
        nodes = list(path)
        if len(nodes) < 2 or nodes[0] != source or nodes[-1] != target or len(set(nodes)) != len(nodes):
            return None
        return path_length(graph, nodes)

    a, b = length_of(first), length_of(second)
    if a is not None and (b is None or a <= b):
        choice, path, dist = 1, first, a
    elif b is not None:
        choice, path, dist = 2, second, b
    else:
        choice, path, dist = None, None, None
    tie = a is not None and a == b
    return choice, select_answer(source, target, a is not None, b is not None, choice, path, dist, tie)


def select_prompt(graph: WeightedGraph, source, target, first, second, scheme) -> str:
    scheme = EncodingScheme.parse(scheme)
    item = _exemplar_data()["select"]
    g = _graph(item["graph"])
    s, t = item["source"], item["target"]
    ex_first = (item["first"], path_length(g, item["first"]))
    ex_second = (item["second"], path_length(g, item["second"]))
    _, verdict = select_verdict(g, s, t, item["first"], item["second"])
    example = fill(template("example"), input=select_input(g, s, t, ex_first, ex_second, scheme), answer=verdict)
    return fill(
        template("select"),
        representation=REPRESENTATION[scheme],
        examples=example,
        input=select_input(graph, source, target, first, second, scheme),
    )
