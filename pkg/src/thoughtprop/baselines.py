"""Baseline prompting strategies: IO, CoT, Build-a-Graph, CoT-SC and Tree-of-Thought."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

from thoughtprop import prompts
from thoughtprop.encoding import EncodingScheme, encode_problem
from thoughtprop.errors import BackendError, InvalidArgumentError
from thoughtprop.graph import PathEvaluation, ShortestPathProblem, validate_path
from thoughtprop.parsing import parse_neighbor_list, parse_path_answer, parse_promising_node

logger = logging.getLogger(__name__)

COT_SC_SAMPLES = 5
COT_SC_TEMPERATURE = 0.7


@dataclass
class Attempt:
    instance_id: str
    method: str
    shots: int
    encoding: str
    transcript: list = field(default_factory=list)
    final_path: tuple | None = None
    evaluation: PathEvaluation = PathEvaluation(False, None, False)
    prompt_tokens: int = 0
    completion_tokens: int = 0
    claimed_distance: int | None = None
    error: str | None = None

    @property
    def calls(self) -> int:
        return len(self.transcript)


class Session:
    """Collects the calls of one attempt: transcript, token totals, first error."""

    def __init__(self, backend, tag):
        self.backend = backend
        self.tag = tag
        self.transcript = []
        self.prompt_tokens = 0
        self.completion_tokens = 0
        self.error = None

    def ask(self, prompt, step, temperature=None):
        """Reply text, or None if the backend failed (the failure is noted)."""
        try:
            response = self.backend.ask(prompt, f"{self.tag}/{step}", temperature)
        except BackendError as exc:
            logger.warning("%s/%s failed: %s", self.tag, step, exc)
            self.transcript.append((prompt, ""))
            self.error = self.error or f"{type(exc).__name__}: {exc}"
            return None
        self.transcript.append((prompt, response.text))
        self.prompt_tokens += response.prompt_tokens
        self.completion_tokens += response.completion_tokens
        return response.text

    def absorb(self, attempt: Attempt):
        self.transcript.extend(attempt.transcript)
        self.prompt_tokens += attempt.prompt_tokens
        self.completion_tokens += attempt.completion_tokens
        self.error = self.error or attempt.error

    def attempt(self, problem, method, shots, encoding, path, claimed=None) -> Attempt:
        path = tuple(path) if path is not None else None
        return Attempt(
            problem.instance_id,
            method,
            shots,
            EncodingScheme.parse(encoding).value,
            list(self.transcript),
            path,
            validate_path(problem, path),
            self.prompt_tokens,
            self.completion_tokens,
            claimed,
            self.error,
        )


def default_tag(problem, method, shots, encoding, layers=0):
    return f"{problem.instance_id}/{method}/{shots}/{EncodingScheme.parse(encoding).value}/{layers}"


def _direct(template_method, label, problem, shots, encoding, backend, tag):
    tag = tag or default_tag(problem, label, shots, encoding)
    session = Session(backend, tag)
    prompt = prompts.solve_prompt(template_method, shots, encoding, encode_problem(problem, encoding))
    answer = parse_path_answer(session.ask(prompt, "solve"))
    if answer is None:
        return session.attempt(problem, label, shots, encoding, None)
    return session.attempt(problem, label, shots, encoding, answer.path, answer.claimed_distance)


def solve_io(problem: ShortestPathProblem, shots: int, encoding, backend, tag=None) -> Attempt:
    return _direct("io", "io", problem, shots, encoding, backend, tag)


def solve_cot(problem: ShortestPathProblem, shots: int, encoding, backend, tag=None) -> Attempt:
    return _direct("cot", "cot", problem, shots, encoding, backend, tag)


def solve_bag(problem: ShortestPathProblem, shots: int, encoding, backend, tag=None) -> Attempt:
    return _direct("bag", "bag", problem, shots, encoding, backend, tag)


def solve_cot_sc(
    problem: ShortestPathProblem,
    shots: int,
    encoding,
    backend,
    samples: int = COT_SC_SAMPLES,
    temperature: float = COT_SC_TEMPERATURE,
    tag=None,
) -> Attempt:
    """Majority vote over ``samples`` CoT completions.

    Only feasible paths vote; ties go to the shorter path, then the earlier one.
    """
    if samples < 1:
        raise InvalidArgumentError("need at least one sample")
    session = Session(backend, tag or default_tag(problem, "cot-sc", shots, encoding))
    prompt = prompts.solve_prompt("cot", shots, encoding, encode_problem(problem, encoding))
    parsed = []
    for i in range(samples):
        answer = parse_path_answer(session.ask(prompt, f"sample{i + 1}", temperature))
        if answer is not None:
            parsed.append(answer)
    feasible = [(a, validate_path(problem, a.path)) for a in parsed]
    feasible = [(a, ev) for a, ev in feasible if ev.feasible]
    if feasible:
        votes = Counter(a.path for a, _ in feasible)
        order = {}
        for i, (a, ev) in enumerate(feasible):
            order.setdefault(a.path, (i, ev.length, a.claimed_distance))
        best = min(votes, key=lambda p: (-votes[p], order[p][1], order[p][0]))
        return session.attempt(problem, "cot-sc", shots, encoding, best, order[best][2])
    if parsed:
        return session.attempt(problem, "cot-sc", shots, encoding, parsed[0].path, parsed[0].claimed_distance)
    return session.attempt(problem, "cot-sc", shots, encoding, None)


def solve_tot(problem: ShortestPathProblem, shots: int, encoding, backend, max_steps: int | None = None, tag=None) -> Attempt:
    """Step-by-step search: propose the current node's neighbours, keep the most promising.

    Visited nodes are never candidates again. An unreadable evaluation falls
    back to the smallest candidate; no candidates ends the search.
    """
    if max_steps is None:
        max_steps = 2 * problem.graph.node_count
    if max_steps < 1:
        raise InvalidArgumentError("max_steps must be at least 1")
    session = Session(backend, tag or default_tag(problem, "tot", shots, encoding))
    path = [problem.source]
    for step in range(max_steps):
        if path[-1] == problem.target:
            break
        text = session.ask(prompts.propose_prompt(problem.graph, path[-1], encoding), f"step{step}.propose")
        proposed = parse_neighbor_list(text) or []
        candidates = [c for c in dict.fromkeys(proposed) if c not in path]
        if not candidates:
            break
        if len(candidates) == 1:
            path.append(candidates[0])
            continue
        prompt = prompts.tot_evaluate_prompt(problem.graph, path, candidates, problem.target, shots, encoding)
        choice = parse_promising_node(session.ask(prompt, f"step{step}.evaluate"))
        path.append(choice if choice in candidates else min(candidates))
    return session.attempt(problem, "tot", shots, encoding, path)


SOLVERS = {
    "io": solve_io,
    "cot": solve_cot,
    "bag": solve_bag,
    "cot-sc": solve_cot_sc,
    "tot": solve_tot,
}
