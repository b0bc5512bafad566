import re

import pytest

from thoughtprop.baselines import solve_bag, solve_cot, solve_cot_sc, solve_io, solve_tot
from thoughtprop.encoding import EncodingScheme
from thoughtprop.errors import InvalidArgumentError
from thoughtprop.graph import ShortestPathProblem, neighbors
from thoughtprop.llm import CallableBackend, OracleBackend, ScriptedBackend
from thoughtprop.oracle import OracleErrorModel
from thoughtprop.parsing import format_path_answer


@pytest.mark.parametrize("solver", [solve_io, solve_cot, solve_bag])
@pytest.mark.parametrize("shots", [0, 1, 5])
@pytest.mark.parametrize("encoding", list(EncodingScheme))
def test_direct_solvers_perfect(small, solver, shots, encoding):
    attempt = solver(small, shots, encoding, OracleBackend())
    assert attempt.final_path == (0, 3, 4)
    assert attempt.evaluation.optimal and attempt.evaluation.length == 5
    assert attempt.calls == 1 and attempt.claimed_distance == 5
    assert attempt.prompt_tokens > 0 and attempt.completion_tokens > 0


def test_parse_failure_is_infeasible(small):
    attempt = solve_io(small, 1, "adjacency", ScriptedBackend(responses=["I cannot find a path."]))
    assert attempt.final_path is None and not attempt.evaluation.feasible
    assert attempt.error is None


def test_backend_failure_is_noted(small):
    attempt = solve_io(small, 1, "adjacency", ScriptedBackend())
    assert not attempt.evaluation.feasible
    assert attempt.error.startswith("BackendRejectedError")
    assert attempt.transcript[0][1] == ""


def test_cot_invalid_oracle(small):
    attempt = solve_cot(small, 1, "adjacency", OracleBackend(OracleErrorModel(0.0, 1.0)))
    assert attempt.final_path is not None and not attempt.evaluation.feasible


def test_bag_costs_more_than_cot(small):
    for shots in (0, 1, 5):
        cot = solve_cot(small, shots, "adjacency", OracleBackend())
        bag = solve_bag(small, shots, "adjacency", OracleBackend())
        assert bag.prompt_tokens > cot.prompt_tokens


class TestCotSc:
    def test_majority_among_feasible(self, small):
        replies = [format_path_answer(p) for p in ([0, 3, 4], [0, 3, 4], [0, 1, 4])]
        attempt = solve_cot_sc(small, 1, "adjacency", ScriptedBackend(responses=replies), samples=3)
        assert attempt.final_path == (0, 3, 4) and attempt.calls == 3

    def test_infeasible_never_outvotes(self, pair):
        replies = [format_path_answer(p) for p in ([0, 1, 5], [0, 1, 5], [0, 3, 4, 5])]
        attempt = solve_cot_sc(pair, 1, "adjacency", ScriptedBackend(responses=replies), samples=3)
        assert attempt.final_path == (0, 3, 4, 5)

    def test_single_sample_matches_cot(self, small):
        sc = solve_cot_sc(small, 1, "adjacency", OracleBackend(), samples=1)
        cot = solve_cot(small, 1, "adjacency", OracleBackend())
        assert sc.transcript == cot.transcript and sc.final_path == cot.final_path

    def test_five_samples_at_temperature(self, small):
        temps = []
        backend = OracleBackend()
        original = backend.complete

        def spy(request):
            temps.append(request.temperature)
            return original(request)

        backend.complete = spy
        attempt = solve_cot_sc(small, 1, "adjacency", backend)
        assert attempt.evaluation.optimal and attempt.calls == 5
        assert temps == [0.7] * 5

    def test_needs_a_sample(self, small):
        with pytest.raises(InvalidArgumentError):
            solve_cot_sc(small, 1, "adjacency", OracleBackend(), samples=0)


class TestTot:
    def test_perfect_oracle(self, small):
        attempt = solve_tot(small, 1, "adjacency", OracleBackend())
        assert attempt.final_path == (0, 3, 4) and attempt.evaluation.optimal

    def test_evaluate_picks_promising_node(self, tot_graph):
        problem = ShortestPathProblem.from_graph("tot", tot_graph, 0, 6)
        tags = []
        backend = OracleBackend()
        original = backend.complete

        def spy(request):
            tags.append(request.request_tag)
            return original(request)

        backend.complete = spy
        attempt = solve_tot(problem, 1, "adjacency", backend)
        # From 0 the candidates are [1, 3, 4]; 4 leads to 6 in 2 + 3 + 1.
        assert attempt.final_path == (0, 4, 2, 6) and attempt.evaluation.optimal
        assert tags[1].endswith("step0.evaluate")

    def test_echo_backend_stalls(self, small):
        def echo(prompt):
            node = re.findall(r"Input Node: (\d+)", prompt)[-1]
            return f"The neighborhood node list of the input node is [{node}]."

        backend = CallableBackend(echo)
        attempt = solve_tot(small, 1, "adjacency", backend, max_steps=6)
        assert not attempt.evaluation.feasible
        assert backend.calls <= 6

    def test_step_budget(self, small):
        attempt = solve_tot(small, 1, "adjacency", OracleBackend(), max_steps=1)
        assert attempt.final_path == (0, 3) and not attempt.evaluation.feasible

    def test_unreadable_evaluation_falls_back(self, tot_graph):
        problem = ShortestPathProblem.from_graph("tot", tot_graph, 0, 6)

        def reply(prompt):
            if prompt.startswith("Given several input nodes"):
                return "no idea"
            node = int(re.findall(r"Input Node: (\d+)", prompt)[-1])
            return f"The neighborhood node list of the input node is {neighbors(problem.graph, node)}."

        attempt = solve_tot(problem, 1, "adjacency", CallableBackend(reply))
        assert attempt.final_path[:2] == (0, 1)


def test_tot_path_bounded_by_steps(seed42):
    for problem in seed42[:30]:
        for steps in (1, 2, 3):
            attempt = solve_tot(problem, 0, "adjacency", OracleBackend(OracleErrorModel(0.0, 0.0)), max_steps=steps)
            assert len(attempt.final_path) <= steps + 1
