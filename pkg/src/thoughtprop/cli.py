"""Command line entry point: ``thoughtprop {gen-dataset,run,report,inspect,usage}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from thoughtprop import harness
from thoughtprop.errors import ThoughtPropError
from thoughtprop.llm import usage_totals


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thoughtprop", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-dataset", help="generate shortest-path problems")
    gen.add_argument("--count", type=int, default=100)
    gen.add_argument("--n-min", type=int, default=5)
    gen.add_argument("--n-max", type=int, default=10)
    gen.add_argument("--p", type=float, default=0.2)
    gen.add_argument("--seed", type=int, default=42)
    gen.add_argument("--out", required=True)

    run = sub.add_parser("run", help="execute a run matrix")
    run.add_argument("config", help="JSON file with RunConfig fields")
    run.add_argument("--method", action="append", choices=harness.METHODS, help="override config methods")
    run.add_argument("--layers", action="append", type=int, choices=(0, 1, 2))
    run.add_argument("--base", choices=("io", "cot"))
    run.add_argument("--propose-mode", choices=("llm", "symbolic"))
    run.add_argument("--select-mode", choices=("llm", "symbolic"))
    run.add_argument("--output-dir")

    rep = sub.add_parser("report", help="tabulate OR/FR/OLR")
    rep.add_argument("results")
    rep.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    rep.add_argument("--dataset")
    rep.add_argument("--out-dir")

    ins = sub.add_parser("inspect", help="print the prompt/response chain of a record")
    ins.add_argument("results")
    ins.add_argument("instance_id")
    ins.add_argument("method")
    ins.add_argument("--shots", type=int)
    ins.add_argument("--encoding")
    ins.add_argument("--layers", type=int)
    ins.add_argument("--dataset")

    use = sub.add_parser("usage", help="token totals from a transcript")
    use.add_argument("transcript")
    return parser


def _run(args) -> str:
    with open(args.config, encoding="utf-8") as fh:
        data = json.load(fh)
    overrides = {
        "methods": args.method, "layers": args.layers, "base": args.base,
        "propose_mode": args.propose_mode, "select_mode": args.select_mode, "output_dir": args.output_dir,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    path = harness.cmd_run(harness.RunConfig.from_dict(data))
    return f"results written to {path}"


def _usage(args) -> str:
    totals = usage_totals(args.transcript)
    lines = ["method,shots,layers,prompt_tokens,completion_tokens"]
    for (method, shots, layers), (pt, ct) in sorted(totals.totals.items(), key=lambda kv: str(kv[0])):
        lines.append(f"{method},{shots},{layers},{pt},{ct}")
    pt, ct = totals.overall
    lines.append(f"total,,,{pt},{ct}")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "gen-dataset":
            out = harness.cmd_gen_dataset(args.count, args.n_min, args.n_max, args.p, args.seed, args.out)
        elif args.command == "run":
            out = _run(args)
        elif args.command == "report":
            table, costs = harness.cmd_report(args.results, args.format, args.dataset, args.out_dir)
            out = table if args.out_dir is None else f"{table}\n{costs}"
        elif args.command == "inspect":
            out = harness.cmd_inspect(
                args.results, args.instance_id, args.method, args.shots, args.encoding, args.layers, args.dataset
            )
        else:
            out = _usage(args)
    except ThoughtPropError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
