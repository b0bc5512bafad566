"""Recover paths, neighbour lists and choices from free-form model text.

Every parser is total: failure is returned as ``None``, never raised.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

_FLAT = re.compile(r"^\s*(?:-?\d+\s*(?:,\s*-?\d+\s*)*)?$")
_DISTANCE = re.compile(r"shortest distance is\s*(-?\d+)", re.IGNORECASE)
_BETTER = re.compile(r"Solution\s+(\d+)\s+is\s+(?:the\s+)?better", re.IGNORECASE)
_PROMISING = re.compile(r"most promising\D*?(-?\d+)", re.IGNORECASE)


@dataclass(frozen=True)
class ParsedPathAnswer:
    path: tuple[int, ...]
    claimed_distance: int | None = None


def flat_lists(text: str) -> list[list[int]]:
    """Top-level bracketed integer lists, in order. Nested groups like ``[[0, 3]]`` are skipped."""
    found, depth, start, nested = [], 0, 0, False
    for i, ch in enumerate(text):
        if ch == "[":
            if depth == 0:
                start, nested = i, False
            else:
                nested = True
            depth += 1
        elif ch == "]" and depth:
            depth -= 1
            if depth == 0 and not nested:
                body = text[start + 1 : i]
                if _FLAT.match(body):
                    found.append([int(x) for x in re.findall(r"-?\d+", body)])
    return found


def parse_path_answer(text) -> ParsedPathAnswer | None:
    if not isinstance(text, str):
        return None
    lists = [x for x in flat_lists(text) if x]
    if not lists:
        return None
    distances = _DISTANCE.findall(text)
    return ParsedPathAnswer(tuple(lists[-1]), int(distances[-1]) if distances else None)


def parse_neighbor_list(text) -> list[int] | None:
    if not isinstance(text, str):
        return None
    lists = flat_lists(text)
    return lists[-1] if lists else None


def parse_choice(text, candidate_count: int, candidates=None) -> int | None:
    """1-based index of the solution the text prefers.

    Uses the last "Solution k is better" statement; failing that, the final
    path in the text matched against ``candidates``.
    """
    if not isinstance(text, str):
        return None
    for raw in reversed(_BETTER.findall(text)):
        k = int(raw)
        if 1 <= k <= candidate_count:
            return k
    if candidates:
        answer = parse_path_answer(text)
        if answer is not None:
            for i, cand in enumerate(candidates[:candidate_count], start=1):
                if cand is not None and tuple(cand) == answer.path:
                    return i
    return None


def parse_promising_node(text) -> int | None:
    """Node named in the last "most promising ... is k" statement."""
    if not isinstance(text, str):
        return None
    hits = _PROMISING.findall(text)
    return int(hits[-1]) if hits else None


def format_path_answer(path, distance=None) -> str:
    text = "The shortest path from the source node to the target node is [" + ", ".join(map(str, path)) + "]."
    if distance is not None:
        text += f" The shortest distance is {distance}."
    return text
