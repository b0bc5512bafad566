"""Run matrices of (method x shots x encoding x layers) over a dataset, score and report them."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from pathlib import Path

from thoughtprop.baselines import SOLVERS, solve_cot_sc, solve_tot
from thoughtprop.encoding import EncodingScheme
from thoughtprop.errors import EmptyReportError, IntegrityError, InvalidArgumentError, NotFoundError, ThoughtPropError
from thoughtprop.graph import generate_dataset, read_dataset, validate_path, write_dataset
from thoughtprop.llm import TranscriptLog, make_backend
from thoughtprop.prompts import SHOTS
from thoughtprop.tp import BASES, MAX_LAYERS, MODES, method_label, solve_with_tp

logger = logging.getLogger(__name__)

METHODS = ("io", "cot", "cot-sc", "bag", "tot", "tp")
METHOD_ORDER = ("io", "cot", "cot-sc", "bag", "tot", "tp", "tp+cot")
RESULTS = "results.jsonl"
TRANSCRIPT = "transcript.jsonl"
CONFIG_COPY = "config.json"
SECRET_KEYS = {"api_key", "apikey", "key", "token", "secret", "password", "authorization"}


def cmd_gen_dataset(count, n_min=5, n_max=10, p=0.2, seed=0, out="dataset.jsonl") -> str:
    """Write a dataset file and return a short summary of it."""
    problems = generate_dataset(count, n_min, n_max, p, seed)
    try:
        write_dataset(problems, out)
    except OSError as exc:
        raise ThoughtPropError(f"cannot write {out}: {exc}") from exc
    sizes = Counter(pr.graph.node_count for pr in problems)
    mean_opt = sum(pr.optimal_length for pr in problems) / len(problems) if problems else 0.0
    lines = [f"wrote {len(problems)} problems to {out}", "node count histogram:"]
    lines += [f"  n={n}: {sizes[n]}" for n in sorted(sizes)]
    lines.append(f"mean optimal length: {mean_opt:.2f}")
    return "\n".join(lines)


@dataclass
class RunConfig:
    dataset: str
    methods: list = field(default_factory=lambda: ["io"])
    shots: list = field(default_factory=lambda: [1])
    encodings: list = field(default_factory=lambda: ["adjacency"])
    backend: dict = field(default_factory=lambda: {"provider": "oracle"})
    layers: list = field(default_factory=lambda: [1])
    base: str = "io"
    propose_mode: str = "llm"
    select_mode: str = "llm"
    cot_sc_samples: int = 5
    cot_sc_temperature: float = 0.7
    tot_max_steps: int | None = None
    concurrency: int = 4
    output_dir: str = "runs/default"
    seed: int = 0

    def __post_init__(self):
        if not os.path.exists(self.dataset):
            raise InvalidArgumentError(f"dataset {self.dataset} does not exist")
        if not (self.methods and self.shots and self.encodings):
            raise InvalidArgumentError("methods, shots and encodings must be nonempty")
        for m in self.methods:
            if m not in METHODS:
                raise InvalidArgumentError(f"unknown method {m!r}")
        for s in self.shots:
            if s not in SHOTS:
                raise InvalidArgumentError(f"shots must be drawn from {SHOTS}")
        self.encodings = [EncodingScheme.parse(e).value for e in self.encodings]
        if "tp" in self.methods:
            if not self.layers or any(k not in range(MAX_LAYERS + 1) for k in self.layers):
                raise InvalidArgumentError(f"layers must be drawn from 0..{MAX_LAYERS}")
        if self.base not in BASES:
            raise InvalidArgumentError(f"base must be one of {sorted(BASES)}")
        if self.propose_mode not in MODES or self.select_mode not in MODES:
            raise InvalidArgumentError(f"modes must be one of {MODES}")
        leaked = SECRET_KEYS & {k.lower() for k in self.backend}
        if leaked:
            raise InvalidArgumentError(f"credentials belong in environment variables, not config ({sorted(leaked)})")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise InvalidArgumentError(f"unknown config fields {sorted(extra)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def cells(self):
        """``(method label, shots, encoding, layers)`` tuples in a fixed order."""
        out = []
        for method in self.methods:
            label = method_label(self.base) if method == "tp" else method
            for shots in self.shots:
                for encoding in self.encodings:
                    for k in (self.layers if method == "tp" else [0]):
                        out.append((label, shots, encoding, k))
        return out


@dataclass
class RunRecord:
    instance_id: str
    method: str
    shots: int
    encoding: str
    layers: int
    final_path: list | None
    feasible: bool
    length: int | None
    optimal: bool
    prompt_tokens: int
    completion_tokens: int
    wall_ms: int = 0
    error: str | None = None

    @property
    def key(self):
        return (self.instance_id, self.method, self.shots, self.encoding, self.layers)

    @property
    def tag(self):
        return "/".join(str(x) for x in self.key)

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_dict(cls, data) -> "RunRecord":
        return cls(**data)


def read_records(path) -> list[RunRecord]:
    """Load a results file, skipping lines that do not parse (e.g. a torn final write)."""
    records = []
    if not os.path.exists(path):
        return records
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            try:
                records.append(RunRecord.from_dict(json.loads(line)))
            except (json.JSONDecodeError, TypeError):
                logger.warning("skipping unreadable result line")
    return records


def run_cell(problem, cell, backend, config: RunConfig) -> RunRecord:
    label, shots, encoding, layers = cell
    tag = f"{problem.instance_id}/{label}/{shots}/{encoding}/{layers}"
    start = time.monotonic()
    if label.startswith("tp"):
        attempt, _ = solve_with_tp(
            problem, layers, config.base, shots, encoding, backend,
            config.propose_mode, config.select_mode, tag=tag,
        )
    elif label == "cot-sc":
        attempt = solve_cot_sc(
            problem, shots, encoding, backend, config.cot_sc_samples, config.cot_sc_temperature, tag=tag
        )
    elif label == "tot":
        attempt = solve_tot(problem, shots, encoding, backend, config.tot_max_steps, tag=tag)
    else:
        attempt = SOLVERS[label](problem, shots, encoding, backend, tag=tag)
    ev = attempt.evaluation
    return RunRecord(
        problem.instance_id, label, shots, encoding, layers,
        list(attempt.final_path) if attempt.final_path is not None else None,
        ev.feasible, ev.length, ev.optimal,
        attempt.prompt_tokens, attempt.completion_tokens,
        int((time.monotonic() - start) * 1000), attempt.error,
    )


def _sort_key(record: RunRecord):
    return record.key


def _compact_transcript(path, keep_tags):
    """Drop transcript entries of attempts that never produced a record."""
    if not os.path.exists(path):
        return
    kept = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            try:
                entry = json.loads(line)
            except json.JSONDecodeError:
                continue
            if "/".join(entry.get("request_tag", "").split("/")[:5]) in keep_tags:
                kept.append(line if line.endswith("\n") else line + "\n")
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.writelines(kept)
    os.replace(tmp, path)


def cmd_run(config: RunConfig, backend=None) -> Path:
    """Execute every missing record of the run matrix; returns the results path.

    Records already in the output directory are kept, so an interrupted run
    resumes where it stopped. The final file is sorted by record key.
    """
    problems = read_dataset(config.dataset)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    results_path, transcript_path = out / RESULTS, out / TRANSCRIPT
    with open(out / CONFIG_COPY, "w", encoding="utf-8") as fh:
        json.dump(asdict(config), fh, indent=2)

    done = {r.key: r for r in read_records(results_path)}
    _compact_transcript(transcript_path, {r.tag for r in done.values()})
    if backend is None:
        backend = make_backend(
            {"seed": config.seed, **config.backend}, TranscriptLog(transcript_path), registry=[p.graph for p in problems]
        )
    else:
        # Injected backends log into the run directory like built ones.
        backend.transcript = TranscriptLog(transcript_path)
    todo = [
        (problem, cell)
        for problem in problems
        for cell in config.cells()
        if (problem.instance_id, *cell) not in done
    ]
    logger.info("%d records present, %d to run", len(done), len(todo))

    pool = ThreadPoolExecutor(max_workers=max(1, config.concurrency))
    try:
        futures = [pool.submit(run_cell, problem, cell, backend, config) for problem, cell in todo]
        with open(results_path, "a", encoding="utf-8") as fh:
            for future in as_completed(futures):
                record = future.result()
                done[record.key] = record
                fh.write(record.to_json() + "\n")
                fh.flush()
    except BaseException:
        pool.shutdown(wait=True, cancel_futures=True)
        raise
    pool.shutdown()

    tmp = out / (RESULTS + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        for record in sorted(done.values(), key=_sort_key):
            fh.write(record.to_json() + "\n")
    os.replace(tmp, results_path)
    return results_path


# Metrics -------------------------------------------------------------------


@dataclass(frozen=True)
class CellMetrics:
    n: int
    n_optimal: int
    n_feasible: int
    optimal_rate: float
    feasible_rate: float
    over_length_rate: float
    prompt_tokens: int
    completion_tokens: int

    @property
    def tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens


@dataclass
class MetricsReport:
    cells: dict = field(default_factory=dict)

    def __getitem__(self, key) -> CellMetrics:
        return self.cells[key]


def compute_metrics(records, problems) -> MetricsReport:
    """OR, FR and OLR per ``(method, shots, encoding, layers)``.

    Every record is re-scored from its ``final_path``; a stored verdict that
    disagrees raises ``IntegrityError``. OLR averages the relative excess over
    the feasible paths, and is 0 when none are feasible.
    """
    by_id = {p.instance_id: p for p in problems}
    groups = {}
    for record in records:
        problem = by_id.get(record.instance_id)
        if problem is None:
            raise IntegrityError(f"record for unknown instance {record.instance_id}")
        ev = validate_path(problem, record.final_path)
        if (ev.feasible, ev.length, ev.optimal) != (record.feasible, record.length, record.optimal):
            raise IntegrityError(f"stored evaluation of {record.tag} does not match its path")
        groups.setdefault((record.method, record.shots, record.encoding, record.layers), []).append((record, problem))
    report = MetricsReport()
    for key, items in groups.items():
        n = len(items)
        feasible = [(r, p) for r, p in items if r.feasible]
        n_opt = sum(1 for r, _ in items if r.optimal)
        excess = sum((r.length - p.optimal_length) / p.optimal_length for r, p in feasible)
        report.cells[key] = CellMetrics(
            n, n_opt, len(feasible), n_opt / n, len(feasible) / n,
            excess / len(feasible) if feasible else 0.0,
            sum(r.prompt_tokens for r, _ in items), sum(r.completion_tokens for r, _ in items),
        )
    return report


# Reports ---------------------------------------------------------------------


def _row_label(method, layers):
    return f"{method} (K={layers})" if method.startswith("tp") else method


def _row_order(key):
    method, layers = key
    rank = METHOD_ORDER.index(method) if method in METHOD_ORDER else len(METHOD_ORDER)
    return (rank, method, layers)


def _rows(report, encoding):
    return sorted({(m, k) for (m, _, e, k) in report.cells if e == encoding}, key=_row_order)


def render_table(report: MetricsReport, fmt="markdown") -> str:
    """Methods x {0,1,5}-shot x {OR, FR, OLR}, one table per encoding."""
    encodings = sorted({e for (_, _, e, _) in report.cells})
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["encoding", "method", "layers"] + [f"{s}-shot {m}" for s in SHOTS for m in ("OR", "FR", "OLR")])
        for enc in encodings:
            for method, k in _rows(report, enc):
                row = [enc, method, k]
                for s in SHOTS:
                    cell = report.cells.get((method, s, enc, k))
                    row += ["", "", ""] if cell is None else [
                        f"{cell.optimal_rate:.4f}", f"{cell.feasible_rate:.4f}", f"{cell.over_length_rate:.4f}"
                    ]
                writer.writerow(row)
        return buf.getvalue()
    if fmt != "markdown":
        raise InvalidArgumentError(f"unknown report format {fmt!r}")
    lines = []
    for enc in encodings:
        lines.append(f"### Encoding: {enc}")
        lines.append("")
        lines.append("| Method | " + " | ".join(f"{s}-shot {m}" for s in SHOTS for m in ("OR", "FR", "OLR")) + " |")
        lines.append("|---" * (1 + 3 * len(SHOTS)) + "|")
        for method, k in _rows(report, enc):
            cells = []
            for s in SHOTS:
                cell = report.cells.get((method, s, enc, k))
                if cell is None:
                    cells += ["-", "-", "-"]
                else:
                    cells += [f"{cell.optimal_rate:.2f}", f"{cell.feasible_rate:.2f}", f"{cell.over_length_rate:.2f}"]
            lines.append(f"| {_row_label(method, k)} | " + " | ".join(cells) + " |")
        lines.append("")
    return "\n".join(lines)


def render_costs(report: MetricsReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", "layers", "shots", "encoding", "tokens", "OR"])
    for (method, shots, enc, k), cell in sorted(report.cells.items(), key=lambda kv: (_row_order((kv[0][0], kv[0][3])), kv[0])):
        writer.writerow([method, k, shots, enc, cell.tokens, f"{cell.optimal_rate:.4f}"])
    return buf.getvalue()


def _dataset_for(results_path, dataset=None):
    if dataset is None:
        copy = Path(results_path).parent / CONFIG_COPY
        if not copy.exists():
            raise InvalidArgumentError("no dataset given and no run config next to the results")
        with open(copy, encoding="utf-8") as fh:
            dataset = json.load(fh)["dataset"]
    return read_dataset(dataset)


def cmd_report(results, fmt="markdown", dataset=None, out_dir=None):
    """Returns ``(table text, cost csv text)``; writes both when ``out_dir`` is given."""
    records = read_records(results)
    if not records:
        raise EmptyReportError(f"no records in {results}")
    report = compute_metrics(records, _dataset_for(results, dataset))
    table, costs = render_table(report, fmt), render_costs(report)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / ("report.md" if fmt == "markdown" else "report.csv")).write_text(table, encoding="utf-8")
        (out / "costs.csv").write_text(costs, encoding="utf-8")
    return table, costs


def cmd_inspect(results, instance_id, method, shots=None, encoding=None, layers=None, dataset=None) -> str:
    matches = [
        r for r in read_records(results)
        if r.instance_id == instance_id and r.method == method
        and (shots is None or r.shots == shots)
        and (encoding is None or r.encoding == EncodingScheme.parse(encoding).value)
        and (layers is None or r.layers == layers)
    ]
    if not matches:
        raise NotFoundError(f"no record for {instance_id} / {method}")
    try:
        problems = {p.instance_id: p for p in _dataset_for(results, dataset)}
    except InvalidArgumentError:
        problems = {}
    transcript = Path(results).parent / TRANSCRIPT
    entries = []
    if transcript.exists():
        with open(transcript, encoding="utf-8") as fh:
            for line in fh:
                try:
                    entries.append(json.loads(line))
                except json.JSONDecodeError:
                    continue
    blocks = []
    for record in matches:
        head = [f"== {record.tag} =="]
        problem = problems.get(record.instance_id)
        if problem is not None:
            head.append(f"optimum: {list(problem.optimal_path)} (length {problem.optimal_length})")
        head.append(
            f"final path: {record.final_path}  feasible={record.feasible} length={record.length} "
            f"optimal={record.optimal}"
        )
        head.append(f"tokens: {record.prompt_tokens} prompt + {record.completion_tokens} completion")
        if record.error:
            head.append(f"error: {record.error}")
        prefix = record.tag + "/"
        calls = [e for e in entries if e.get("request_tag", "").startswith(prefix)]
        head.append(f"calls: {len(calls)}")
        for entry in calls:
            step = entry["request_tag"][len(prefix):]
            head.append(f"\n--- {step} ---\n[prompt]\n{entry['prompt']}\n[response]\n{entry['text']}")
        blocks.append("\n".join(head))
    return "\n\n".join(blocks)
