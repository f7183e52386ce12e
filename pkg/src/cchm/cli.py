"""Command-line entry point: ``cchm generate | learn | evaluate | bench``.

Exit status is 0 on success, 1 on a fatal error (unreadable input, node-set
mismatch, unwritable output) and 3 when ``learn`` runs out of time during
the constraint phase. ``bench`` records per-run failures in its CSV and
still exits 0.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .graphs import GraphError, MixedGraph, latent_project, mag_to_pag, read_graph, write_graph
from .independence import SearchTimeout
from .metrics import arrowhead_precision_recall, bsf, confusion, precision_recall, shd
from .search import CchmConfig, cchm
from .simulate import (
    RNG_ALGORITHM,
    SemParams,
    hide_latents,
    random_dag,
    random_params,
    read_coefficients,
    read_csv,
    read_meta,
    sample_sem,
    write_csv,
    write_meta,
)

log = logging.getLogger("cchm")

RESULT_COLUMNS = [
    "run_id", "v", "d", "n", "latent_rate", "alpha", "seed",
    "precision", "recall", "shd", "bsf", "edges_learned", "edges_true", "wall_seconds",
]
MARK_COLUMNS = ["arrow_precision", "arrow_recall"]
BENCH_EXTRA = ["status", "precision_se", "recall_se", "shd_se", "bsf_se"]
SUMMARIZED = ["precision", "recall", "shd", "bsf"]

INSTANCE_FILES = ("truth_dag.graph", "truth_mag.graph", "truth_pag.graph", "data.csv", "data.meta")
LEARN_FILES = ("learned_mag.graph", "learned_pag.graph", "report.jsonl")


class CliError(Exception):
    pass


@dataclass(frozen=True)
class RunSpec:
    """Grid of settings; every list is non-empty and ``reps >= 1``."""

    v: tuple[int, ...] = (10,)
    d: tuple[int, ...] = (3,)
    n: tuple[int, ...] = (1000,)
    latent_rate: tuple[float, ...] = (0.1,)
    alpha: tuple[float, ...] = (0.01,)
    reps: int = 1
    seed: int = 0
    timeout_min: float = 240.0
    out: Path = Path(".")
    config: CchmConfig = field(default_factory=CchmConfig)

    def __post_init__(self):
        for name in ("v", "d", "n", "latent_rate", "alpha"):
            if not getattr(self, name):
                raise CliError(f"--{name.replace('_', '-')} needs at least one value")
        if self.reps < 1:
            raise CliError("--reps must be >= 1")

    def instances(self):
        """``(v, d, n, latent_rate, instance_seed)`` in canonical order."""
        for v, d, n, rate in itertools.product(self.v, self.d, self.n, self.latent_rate):
            for rep in range(self.reps):
                yield v, d, n, rate, self.seed + rep


def instance_name(v, d, n, rate, seed) -> str:
    return f"v{v}_d{d}_n{n}_lr{rate:g}_s{seed}"


def _seed_streams(seed: int) -> dict:
    names = ("dag", "params", "sample", "latent")
    return dict(zip(names, np.random.SeedSequence(seed).spawn(len(names))))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "NA" if math.isnan(x) else repr(x)
    return str(x)


# ----------------------------------------------------------------------
# generate


def generate_instance(out: Path, v, d, n, rate, seed, truth: MixedGraph | None = None, params: SemParams | None = None) -> Path:
    """Write one simulated instance (the five files of :data:`INSTANCE_FILES`) to ``out``."""
    streams = _seed_streams(seed)
    if truth is None:
        dag = random_dag(v, d, streams["dag"])
        params = random_params(dag, streams["params"])
    else:
        dag = truth
        if params is None:
            params = random_params(dag, streams["params"])
    data = sample_sem(dag, params, n, streams["sample"])
    observed, hidden = hide_latents(data, rate, streams["latent"])
    mag = latent_project(dag, hidden)
    pag = mag_to_pag(mag)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_graph(dag, out / "truth_dag.graph")
        write_graph(mag, out / "truth_mag.graph")
        write_graph(pag, out / "truth_pag.graph")
        write_csv(observed, out / "data.csv")
        write_meta(
            {
                "seed": seed,
                "v": len(dag.nodes),
                "max_in_degree": d,
                "n": n,
                "latent_rate": f"{rate:g}",
                "latent": ",".join(sorted(hidden)),
                "rng": RNG_ALGORITHM,
            },
            out / "data.meta",
        )
    except OSError as exc:
        raise CliError(f"cannot write to {out}: {exc}") from None
    return out


def cmd_generate(spec: RunSpec, truth_graph=None, coefficients=None) -> list[Path]:
    truth = params = None
    if truth_graph is not None:
        truth = read_graph(truth_graph).relabel_kind("DAG")
        if coefficients is not None:
            coefs = read_coefficients(coefficients)
            params = SemParams(coefs, dict.fromkeys(truth.nodes, 1.0), dict.fromkeys(truth.nodes, 0.0))
            params.check(truth)
    dirs = []
    for v, d, n, rate, seed in spec.instances():
        if truth is not None:
            v = len(truth.nodes)
        dirs.append(generate_instance(spec.out / instance_name(v, d, n, rate, seed), v, d, n, rate, seed, truth, params))
    return dirs


# ----------------------------------------------------------------------
# learn


def _json_line(obj) -> str:
    return json.dumps(obj, sort_keys=True, default=_json_default)


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, (set, frozenset, tuple)):
        return sorted(x)
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def write_report(report: list[dict], path: Path) -> None:
    path.write_text("".join(_json_line(r) + "\n" for r in report), encoding="utf-8", newline="\n")


def read_report(path: Path) -> list[dict]:
    return [json.loads(ln) for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]


def cmd_learn(data_path, out: Path, config: CchmConfig):
    """Run CCHM on a CSV and write :data:`LEARN_FILES` to ``out``."""
    try:
        data = read_csv(data_path)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read {data_path}: {exc}") from None
    result = cchm(data, config)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_graph(result.mag, out / "learned_mag.graph")
        write_graph(result.pag, out / "learned_pag.graph")
        write_report(result.report, out / "report.jsonl")
    except OSError as exc:
        raise CliError(f"cannot write to {out}: {exc}") from None
    return result


# ----------------------------------------------------------------------
# evaluate


def evaluate_row(learned: MixedGraph, truth: MixedGraph, marks: bool = False) -> dict:
    c = confusion(learned, truth)
    p, r = precision_recall(c)
    row = {
        "precision": p,
        "recall": r,
        "shd": shd(learned, truth),
        "bsf": bsf(c),
        "edges_learned": learned.num_edges(),
        "edges_true": truth.num_edges(),
    }
    if marks:
        row["arrow_precision"], row["arrow_recall"] = arrowhead_precision_recall(learned, truth)
    return row


def _append_rows(path: Path, columns: list[str], rows: list[dict]) -> None:
    new = not path.exists() or path.stat().st_size == 0
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if new:
                w.writerow(columns)
            for row in rows:
                w.writerow([_fmt(row.get(c)) for c in columns])
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from None


def cmd_evaluate(learned_path, truth_path, out: Path, marks: bool = False, run_id: str | None = None, overrides: dict | None = None) -> dict:
    """Compare two graph files and append one row to the results CSV ``out``.

    Run settings are read from ``data.meta`` beside the truth file and
    ``report.jsonl`` beside the learned file when present; ``overrides``
    (from flags) take precedence.
    """
    try:
        learned = read_graph(learned_path)
        truth = read_graph(truth_path)
    except (OSError, GraphError) as exc:
        raise CliError(str(exc)) from None
    try:
        row = evaluate_row(learned, truth, marks)
    except GraphError as exc:
        raise CliError(str(exc)) from None
    learned_path, truth_path = Path(learned_path), Path(truth_path)
    row["run_id"] = run_id or learned_path.parent.name or learned_path.stem
    meta_path = truth_path.parent / "data.meta"
    if meta_path.exists():
        meta = read_meta(meta_path)
        row.update({"v": meta.get("v"), "d": meta.get("max_in_degree"), "n": meta.get("n"),
                    "latent_rate": meta.get("latent_rate"), "seed": meta.get("seed")})
    report_path = learned_path.parent / "report.jsonl"
    if report_path.exists():
        for entry in read_report(report_path):
            if entry.get("phase") == "output":
                row["alpha"] = entry.get("config", {}).get("alpha")
                row["wall_seconds"] = entry.get("wall_seconds")
    for k, val in (overrides or {}).items():
        if val is not None:
            row[k] = val
    _append_rows(out, RESULT_COLUMNS + (MARK_COLUMNS if marks else []), [row])
    return row


# ----------------------------------------------------------------------
# bench


def _bench_one(job):
    run_dir, v, d, n, rate, seed, alpha, config, marks = job
    row = {"run_id": run_dir.name, "v": v, "d": d, "n": n, "latent_rate": rate, "alpha": alpha, "seed": seed}
    t0 = time.monotonic()
    try:
        inst = run_dir.parent.parent / "instances" / instance_name(v, d, n, rate, seed)
        if not (inst / "data.meta").exists():
            generate_instance(inst, v, d, n, rate, seed)
        result = cmd_learn(inst / "data.csv", run_dir, replace(config, alpha=alpha))
        if result.timed_out:
            row["status"] = "timeout"
        else:
            row.update(evaluate_row(result.pag, read_graph(inst / "truth_pag.graph"), marks))
            row["status"] = "ok"
    except SearchTimeout:
        row["status"] = "timeout"
    except Exception as exc:  # a failed run must not stop the grid
        row["status"] = f"error: {type(exc).__name__}: {exc}".replace("\n", " ")
    row["elapsed"] = time.monotonic() - t0
    return row


def _summary_row(setting, rows) -> dict:
    v, d, n, rate, alpha = setting
    out = {"run_id": instance_name(v, d, n, rate, "*") + f"_a{alpha:g}", "v": v, "d": d, "n": n,
           "latent_rate": rate, "alpha": alpha, "status": "summary"}
    ok = [r for r in rows if r["status"] == "ok"]
    out["seed"] = f"{len(ok)}/{len(rows)}"
    for key in SUMMARIZED:
        vals = np.array([r[key] for r in ok if not math.isnan(float(r[key]))], dtype=float)
        if len(vals) == 0:
            continue
        out[key] = float(vals.mean())
        out[f"{key}_se"] = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else math.nan
    return out


def cmd_bench(spec: RunSpec, marks: bool = False, workers: int = 1, record_times: bool = False) -> Path:
    """Generate, learn and evaluate over the grid; write ``results.csv`` to ``spec.out``.

    Rows come in canonical (setting, seed) order whatever the worker
    schedule. Wall-clock times go to ``timings.csv`` so that
    ``results.csv`` is byte-identical across reruns unless
    ``record_times`` is set.
    """
    base = replace(spec.config, timeout=spec.timeout_min * 60.0)
    jobs, settings = [], []
    for v, d, n, rate in itertools.product(spec.v, spec.d, spec.n, spec.latent_rate):
        for alpha in spec.alpha:
            settings.append((v, d, n, rate, alpha))
            for rep in range(spec.reps):
                seed = spec.seed + rep
                run_dir = spec.out / "runs" / (instance_name(v, d, n, rate, seed) + f"_a{alpha:g}")
                jobs.append((run_dir, v, d, n, rate, seed, alpha, base, marks))
    try:
        (spec.out / "runs").mkdir(parents=True, exist_ok=True)
        (spec.out / "instances").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot write to {spec.out}: {exc}") from None
    # instances shared between alphas are generated up front so workers never race on them
    for v, d, n, rate, seed in spec.instances():
        inst = spec.out / "instances" / instance_name(v, d, n, rate, seed)
        if not (inst / "data.meta").exists():
            generate_instance(inst, v, d, n, rate, seed)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_bench_one, jobs))
    else:
        rows = [_bench_one(j) for j in jobs]

    columns = RESULT_COLUMNS + (MARK_COLUMNS if marks else []) + BENCH_EXTRA
    out_rows = []
    for k, setting in enumerate(settings):
        group = rows[k * spec.reps:(k + 1) * spec.reps]
        for r in group:
            if record_times:
                r["wall_seconds"] = r["elapsed"]
        out_rows.extend(group)
        out_rows.append(_summary_row(setting, group))
    results = spec.out / "results.csv"
    timings = spec.out / "timings.csv"
    for p in (results, timings):
        if p.exists():
            p.unlink()
    _append_rows(results, columns, out_rows)
    _append_rows(timings, ["run_id", "status", "wall_seconds"],
                 [{"run_id": r["run_id"], "status": r["status"], "wall_seconds": r["elapsed"]} for r in rows])
    return results


# ----------------------------------------------------------------------
# argument parsing


def _add_config_flags(p: argparse.ArgumentParser, alpha_list: bool = False) -> None:
    if alpha_list:
        p.add_argument("--alpha", type=float, nargs="+", default=[0.01], help="significance level(s) (default 0.01)")
    else:
        p.add_argument("--alpha", type=float, default=0.01, help="significance level (default 0.01)")
    p.add_argument("--max-sepset", type=int, default=4, help="largest conditioning set (default 4)")
    p.add_argument("--timeout-min", type=float, default=240.0, help="per-run time limit in minutes (default 240)")
    p.add_argument("--standardize", action="store_true", help="scale columns to zero mean, unit variance first")
    p.add_argument("--no-possible-dsep", action="store_true", help="skip the Possible-D-SEP pass")


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--v", type=int, nargs="+", default=[10], help="variable counts")
    p.add_argument("--d", type=int, nargs="+", default=[3], help="max in-degrees")
    p.add_argument("--n", type=int, nargs="+", default=[1000], help="sample sizes")
    p.add_argument("--latent-rate", type=float, nargs="+", default=[0.1], help="fractions of variables hidden")
    p.add_argument("--reps", type=int, default=1, help="instances per setting")
    p.add_argument("--seed", type=int, default=0, help="seed of the first instance; rep k uses seed+k")
    p.add_argument("--out", type=Path, required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cchm", description="Causal discovery with latent confounders (CCHM).", allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="simulate truth graphs and datasets")
    _add_grid_flags(g)
    g.add_argument("--truth-graph", type=Path, help="use this DAG (graph file) instead of random ones")
    g.add_argument("--coefficients", type=Path, help="parent,child,beta lines for --truth-graph")

    le = sub.add_parser("learn", help="learn a MAG and PAG from a CSV")
    le.add_argument("data", type=Path)
    le.add_argument("--out", type=Path, required=True)
    le.add_argument("--seed", type=int, default=0, help="recorded in the report")
    _add_config_flags(le)

    ev = sub.add_parser("evaluate", help="score a learned PAG against the true PAG")
    ev.add_argument("learned", type=Path)
    ev.add_argument("truth", type=Path)
    ev.add_argument("--out", type=Path, required=True, help="results CSV to append to")
    ev.add_argument("--marks", action="store_true", help="also report arrowhead precision/recall")
    ev.add_argument("--run-id")
    for flag, typ in (("--v", int), ("--d", int), ("--n", int), ("--latent-rate", float), ("--alpha", float), ("--seed", int)):
        ev.add_argument(flag, type=typ)

    b = sub.add_parser("bench", help="generate, learn and evaluate over a grid")
    _add_grid_flags(b)
    _add_config_flags(b, alpha_list=True)
    b.add_argument("--marks", action="store_true", help="also report arrowhead precision/recall")
    b.add_argument("--workers", type=int, default=1, help="parallel runs (default 1)")
    b.add_argument("--record-times", action="store_true", help="write wall_seconds into results.csv")
    return parser


def _config(args) -> CchmConfig:
    return CchmConfig(
        alpha=args.alpha if not isinstance(args.alpha, list) else args.alpha[0],
        max_sepset=args.max_sepset,
        timeout=args.timeout_min * 60.0,
        standardize=args.standardize,
        possible_dsep=not args.no_possible_dsep,
        seed=args.seed,
    )


def _spec(args, alpha=(0.01,)) -> RunSpec:
    return RunSpec(
        v=tuple(args.v), d=tuple(args.d), n=tuple(args.n), latent_rate=tuple(args.latent_rate),
        alpha=tuple(alpha), reps=args.reps, seed=args.seed, out=args.out,
        timeout_min=getattr(args, "timeout_min", 240.0),
        config=_config(args) if hasattr(args, "max_sepset") else CchmConfig(),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "generate":
            if args.coefficients is not None and args.truth_graph is None:
                raise CliError("--coefficients needs --truth-graph")
            for path in cmd_generate(_spec(args), args.truth_graph, args.coefficients):
                print(path)
        elif args.command == "learn":
            try:
                result = cmd_learn(args.data, args.out, _config(args))
            except SearchTimeout as exc:
                print(f"cchm: timeout: {exc}", file=sys.stderr)
                return 3
            if result.timed_out:
                print("cchm: hill climbing hit the time limit; wrote the best graph found", file=sys.stderr)
            for name in LEARN_FILES:
                print(args.out / name)
        elif args.command == "evaluate":
            overrides = {"v": args.v, "d": args.d, "n": args.n, "latent_rate": args.latent_rate,
                         "alpha": args.alpha, "seed": args.seed}
            row = cmd_evaluate(args.learned, args.truth, args.out, args.marks, args.run_id, overrides)
            print(" ".join(f"{k}={_fmt(row.get(k))}" for k in ("precision", "recall", "shd", "bsf")))
        elif args.command == "bench":
            if args.workers < 1:
                raise CliError("--workers must be >= 1")
            print(cmd_bench(_spec(args, args.alpha), args.marks, args.workers, args.record_times))
    except CliError as exc:
        print(f"cchm: error: {exc}", file=sys.stderr)
        return 1
    except (GraphError, ValueError) as exc:
        print(f"cchm: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
