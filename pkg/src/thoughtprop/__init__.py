"""Thought Propagation prompting and a shortest-path reasoning benchmark harness."""

from thoughtprop.graph import (
    PathEvaluation,
    ShortestPathProblem,
    WeightedGraph,
    brute_force_shortest,
    dijkstra,
    generate_connected_graph,
    generate_dataset,
    neighbors,
    validate_path,
)
from thoughtprop.kernels import IMPLEMENTATION as KERNELS

__version__ = "0.1.0"

__all__ = [
    "KERNELS",
    "PathEvaluation",
    "ShortestPathProblem",
    "WeightedGraph",
    "brute_force_shortest",
    "dijkstra",
    "generate_connected_graph",
    "generate_dataset",
    "neighbors",
    "validate_path",
]
