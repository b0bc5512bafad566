"""Thought Propagation for shortest paths.

The input problem's analogues are the shortest-path problems from the source
to each neighbour of the target. Their solutions (refined recursively for
deeper layers) are turned into a candidate path by one aggregation call, and
the candidate is compared with the initial solution.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from thoughtprop import prompts
from thoughtprop.baselines import Attempt, Session, default_tag, solve_cot, solve_io
from thoughtprop.encoding import EncodingScheme, encode_subproblem
from thoughtprop.errors import InvalidArgumentError
from thoughtprop.graph import ShortestPathProblem, neighbors, validate_path
from thoughtprop.parsing import parse_choice, parse_neighbor_list, parse_path_answer

logger = logging.getLogger(__name__)

MODES = ("llm", "symbolic")
MAX_LAYERS = 2
DEEP_FANOUT = 4
BASES = {"io": solve_io, "cot": solve_cot}


@dataclass(frozen=True)
class AnalogousProblem:
    parent_id: str
    intermediate_target: int
    text: str
    depth: int


@dataclass
class TpTrace:
    initial: Attempt
    analogous: list = field(default_factory=list)
    subtraces: dict = field(default_factory=dict)
    hints: list = field(default_factory=list)
    candidate_path: tuple | None = None
    final_path: tuple | None = None
    rationale: str = ""


def method_label(base: str) -> str:
    return "tp" if base == "io" else f"tp+{base}"


def subproblem(problem: ShortestPathProblem, node: int) -> ShortestPathProblem:
    return ShortestPathProblem.from_graph(f"{problem.instance_id}>{node}", problem.graph, problem.source, node)


def propose_analogous(problem, backend, mode="llm", encoding=EncodingScheme.ADJACENCY, depth=1, session=None, cap=None):
    """Subproblems ending at the target's neighbours, ascending, source excluded."""
    if mode not in MODES:
        raise InvalidArgumentError(f"mode must be one of {MODES}")
    graph = problem.graph
    found = None
    if mode == "llm":
        session = session or Session(backend, default_tag(problem, "tp", 0, encoding))
        text = session.ask(prompts.propose_prompt(graph, problem.target, encoding), "propose")
        found = parse_neighbor_list(text)
        if found is None:
            logger.warning("%s: unreadable neighbour list, using the graph's own", problem.instance_id)
    if found is None:
        found = neighbors(graph, problem.target)
    nodes = sorted({n for n in found if 0 <= n < graph.node_count and n not in (problem.source, problem.target)})
    if cap is not None:
        nodes = nodes[:cap]
    return [
        AnalogousProblem(problem.instance_id, n, encode_subproblem(problem, n, encoding), depth) for n in nodes
    ]


def aggregate_hints(problem, hints, backend, encoding=EncodingScheme.ADJACENCY, session=None):
    """Ask for a new path built from ``(node, path, length)`` hints.

    Returns the parsed answer, or None without calling the backend when there
    are no hints.
    """
    if not hints:
        return None
    session = session or Session(backend, default_tag(problem, "tp", 0, encoding))
    ordered = sorted(hints, key=lambda h: h[0])
    prompt = prompts.aggregate_prompt(problem.graph, problem.source, problem.target, ordered, encoding)
    return parse_path_answer(session.ask(prompt, "aggregate"))


def _symbolic_choice(problem, initial, candidate):
    a, b = validate_path(problem, initial), validate_path(problem, candidate)
    if b.feasible and (not a.feasible or b.length < a.length):
        return candidate, "candidate is valid and shorter" if a.feasible else "only the candidate is valid"
    if a.feasible:
        return initial, "initial path is valid and no longer than the candidate"
    return initial, "neither path is valid; keeping the initial one"


def select_better(problem, initial, candidate, backend, mode="llm", encoding=EncodingScheme.ADJACENCY,
                  session=None, claims=(None, None)):
    """Pick the final path from the initial solution and the aggregated candidate.

    Returns ``(path, rationale)``. A missing side means no comparison call.
    """
    if mode not in MODES:
        raise InvalidArgumentError(f"mode must be one of {MODES}")
    if candidate is None:
        return initial, "no aggregated candidate"
    if initial is None:
        if validate_path(problem, candidate).feasible:
            return candidate, "no initial path; candidate is valid"
        return initial, "no initial path and the candidate is invalid"
    if mode == "llm":
        session = session or Session(backend, default_tag(problem, "tp", 0, encoding))
        prompt = prompts.select_prompt(
            problem.graph, problem.source, problem.target,
            (list(initial), claims[0]), (list(candidate), claims[1]), encoding,
        )
        text = session.ask(prompt, "select")
        choice = parse_choice(text, 2, [tuple(initial), tuple(candidate)])
        if choice is not None:
            return (initial if choice == 1 else candidate), text
        logger.warning("%s: unreadable comparison, deciding symbolically", problem.instance_id)
    return _symbolic_choice(problem, initial, candidate)


def solve_with_tp(problem, layers=1, base="io", shots=1, encoding=EncodingScheme.ADJACENCY, backend=None,
                  propose_mode="llm", select_mode="llm", tag=None, depth=0):
    """Solve with ``layers`` of Thought Propagation on top of ``base``.

    Returns ``(Attempt, TpTrace)``. With ``layers == 0`` the attempt is the
    base solver's own.
    """
    if layers not in range(MAX_LAYERS + 1):
        raise InvalidArgumentError(f"layers must be in 0..{MAX_LAYERS}")
    if base not in BASES:
        raise InvalidArgumentError(f"base must be one of {sorted(BASES)}")
    label = method_label(base)
    tag = tag or default_tag(problem, label, shots, encoding, layers)
    solver = BASES[base]
    initial = solver(problem, shots, encoding, backend, tag=tag)
    if layers == 0:
        initial.method = label
        return initial, TpTrace(initial, final_path=initial.final_path, rationale="no propagation layers")

    session = Session(backend, tag)
    session.absorb(initial)
    trace = TpTrace(initial)
    cap = DEEP_FANOUT if depth + 1 >= 2 else None
    analogues = propose_analogous(problem, backend, propose_mode, encoding, depth + 1, session, cap)
    for analogue in analogues:
        try:
            sub = subproblem(problem, analogue.intermediate_target)
        except InvalidArgumentError:
            logger.warning("%s: node %d unreachable, analogue skipped", problem.instance_id, analogue.intermediate_target)
            continue
        sub_attempt, sub_trace = solve_with_tp(
            sub, layers - 1, base, shots, encoding, backend, propose_mode, select_mode,
            tag=f"{tag}/n{analogue.intermediate_target}", depth=depth + 1,
        )
        session.absorb(sub_attempt)
        trace.analogous.append((analogue, sub_attempt))
        trace.subtraces[analogue.intermediate_target] = sub_trace
        if sub_attempt.evaluation.feasible:
            trace.hints.append((analogue.intermediate_target, sub_attempt.final_path, sub_attempt.evaluation.length))

    answer = aggregate_hints(problem, trace.hints, backend, encoding, session)
    trace.candidate_path = answer.path if answer else None
    final, rationale = select_better(
        problem, initial.final_path, trace.candidate_path, backend, select_mode, encoding, session,
        claims=(initial.claimed_distance, answer.claimed_distance if answer else None),
    )
    trace.final_path = tuple(final) if final is not None else None
    trace.rationale = rationale
    claimed = initial.claimed_distance if final == initial.final_path else (answer.claimed_distance if answer else None)
    attempt = session.attempt(problem, label, shots, encoding, final, claimed)
    return attempt, trace
