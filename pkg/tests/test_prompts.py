import os
from pathlib import Path

import pytest

from thoughtprop import prompts
from thoughtprop.baselines import SOLVERS, solve_cot_sc, solve_tot
from thoughtprop.encoding import EncodingScheme, encode_problem
from thoughtprop.errors import InvalidArgumentError
from thoughtprop.graph import validate_path
from thoughtprop.llm import OracleBackend
from thoughtprop.tp import solve_with_tp

GOLDENS = Path(__file__).parent / "goldens" / "prompts"
METHODS = ("io", "cot", "cot-sc", "bag", "tot", "tp")
REGEN = bool(os.environ.get("THOUGHTPROP_REGEN_GOLDENS"))

SMALL_LINES = (
    "Node set: [0, 1, 2, 3, 4]\n"
    "Edge set: [[0, 3], [1, 4], [2, 4], [3, 4]]\n"
    "Edge distance set: [2, 3, 5, 3]\n"
    "Source Node: 0\n"
    "Target Node: 4"
)


def render(problem, method, shots, encoding):
    """Every prompt and reply of one perfect-oracle attempt, as a single text block."""
    backend = OracleBackend()
    if method == "tp":
        solve_with_tp(problem, 1, "io", shots, encoding, backend)
    elif method == "cot-sc":
        solve_cot_sc(problem, shots, encoding, backend)
    elif method == "tot":
        solve_tot(problem, shots, encoding, backend)
    else:
        SOLVERS[method](problem, shots, encoding, backend)
    blocks = [
        f"### {e['request_tag']}\n{e['prompt']}\n### reply\n{e['text']}\n" for e in backend.transcript.entries
    ]
    return "\n".join(blocks)


CASES = [(m, s, e.value) for m in METHODS for s in prompts.SHOTS for e in EncodingScheme]


@pytest.mark.parametrize("method, shots, encoding", CASES)
def test_golden(small, method, shots, encoding):
    path = GOLDENS / f"{method}-{shots}shot-{encoding}.txt"
    text = render(small, method, shots, encoding)
    if REGEN:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    assert path.read_text(encoding="utf-8") == text


def test_adjacency_snapshot_contains_exemplar_lines():
    text = (GOLDENS / "io-1shot-adjacency.txt").read_text(encoding="utf-8")
    assert SMALL_LINES in text


@pytest.mark.parametrize("method", prompts.SOLVE_METHODS)
@pytest.mark.parametrize("encoding", list(EncodingScheme))
def test_shot_counts(small, method, encoding):
    block = encode_problem(small, encoding)
    zero = prompts.solve_prompt(method, 0, encoding, block)
    assert "The format of the input and answer are below" in zero
    assert zero.count("Answer:") == 1
    for shots in (1, 5):
        text = prompts.solve_prompt(method, shots, encoding, block)
        assert text.count("\nAnswer:\n") == shots
        assert "The format of the input" not in text
        assert text.endswith(block)


def test_one_shot_exemplar_precedes_input(small):
    text = prompts.solve_prompt("io", 1, "adjacency", encode_problem(small, "adjacency"))
    assert text.index("Answer:") < text.rindex("Input:")


def test_cot_zero_shot_cue(small):
    text = prompts.solve_prompt("cot", 0, "adjacency", encode_problem(small, "adjacency"))
    assert text.endswith("Let's think step by step.")


@pytest.mark.parametrize("shots", prompts.SHOTS)
def test_bag_differs_only_by_construction_sentence(small, shots):
    block = encode_problem(small, "adjacency")
    cot = prompts.solve_prompt("cot", shots, "adjacency", block)
    bag = prompts.solve_prompt("bag", shots, "adjacency", block)
    assert bag.replace(prompts.BAG_PREAMBLE, "", 1) == cot


def test_exemplars_are_consistent():
    for problem in prompts.exemplar_problems():
        assert validate_path(problem, problem.optimal_path).optimal
        assert len(problem.optimal_path) >= 3


def test_exemplars_do_not_leak_into_dataset(seed42):
    exemplar_graphs = {p.graph for p in prompts.exemplar_problems()}
    assert not exemplar_graphs & {p.graph for p in seed42}


def test_tot_exemplar_counts(tot_graph):
    for shots, count in prompts.TOT_EXEMPLARS.items():
        text = prompts.tot_evaluate_prompt(tot_graph, [0], [3, 4], 6, shots, "adjacency")
        # The 0-shot prompt carries one format block instead of worked examples.
        assert text.count("\nAnswer:\n") == max(count, 1)
        assert ("The format of the input" in text) == (count == 0)


def test_slot_filling_is_single_pass():
    assert prompts.fill("{a} {b}", a="{b}", b="x") == "{b} x"
    with pytest.raises(InvalidArgumentError):
        prompts.fill("{missing}")


def test_bad_arguments(small):
    block = encode_problem(small, "adjacency")
    with pytest.raises(InvalidArgumentError):
        prompts.solve_prompt("io", 2, "adjacency", block)
    with pytest.raises(InvalidArgumentError):
        prompts.solve_prompt("tot", 1, "adjacency", block)


def test_best_next_node(tot_graph):
    assert prompts.best_next_node(tot_graph, [0], [3, 4], 6) == (4, [4, 2, 6], 4)


def test_best_aggregate(small_graph):
    assert prompts.best_aggregate(small_graph, 0, 4, [(0, 3)]) == ([0, 3, 4], 5)
    assert prompts.best_aggregate(small_graph, 0, 4, [(0, 3, 4, 1), (0, 3, 4, 2)]) == ([0, 3, 4], 5)
    assert prompts.best_aggregate(small_graph, 0, 4, []) is None
