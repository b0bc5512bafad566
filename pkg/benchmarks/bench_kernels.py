"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--graphs 200] [--nodes 10] [--repeat 3]
"""

import argparse
import random
import timeit

from thoughtprop import _pykernels
from thoughtprop.graph import generate_connected_graph

try:
    from thoughtprop import _ckernels
except ImportError:
    _ckernels = None


def workload(count, nodes, p, seed):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        g = generate_connected_graph(nodes, p, rng)
        out.append((g.node_count, *[list(c) for c in g.columns()]))
    return out


def run_dijkstra(module, graphs):
    for n, us, vs, ws in graphs:
        for s in range(n):
            module.dijkstra(n, us, vs, ws, s)


def run_enumeration(module, graphs):
    for n, us, vs, ws in graphs:
        for t in range(1, n):
            module.best_simple_path(n, us, vs, ws, 0, t, -1)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--graphs", type=int, default=200)
    parser.add_argument("--nodes", type=int, default=10)
    parser.add_argument("--p", type=float, default=0.4)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    graphs = workload(args.graphs, args.nodes, args.p, args.seed)
    modules = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    if _ckernels is None:
        print("compiled kernels not built; timing the fallback only")
    print(f"{args.graphs} graphs, n={args.nodes}, p={args.p}, best of {args.repeat}")
    print(f"{'kernel':<14}{'impl':<8}{'seconds':>10}{'speedup':>10}")
    for name, fn in (("dijkstra", run_dijkstra), ("enumeration", run_enumeration)):
        times = {}
        for label, module in modules:
            times[label] = min(timeit.repeat(lambda: fn(module, graphs), number=1, repeat=args.repeat))
        for label, seconds in times.items():
            speedup = times["python"] / seconds if seconds else float("inf")
            print(f"{name:<14}{label:<8}{seconds:>10.4f}{speedup:>9.1f}x")


if __name__ == "__main__":
    main()
