"""Command-line entry point.

Subcommands: solve one formula, sweep a benchmark manifest, grow search
trees, build preference datasets, analyze run records, and compute agreement
kappas or frequency-rank percentiles. `--deterministic` swaps wall-clock
rollout budgets for conflict budgets so reruns reproduce exactly.

Exit codes: 0 success, 1 usage error, 2 input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import shlex
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import cnc, dataset as dataset_mod, mcts as mcts_mod, stats as stats_mod
from .cdcl import SolverBudget, SolveStatus
from .cnf import DimacsError, parse_dimacs
from .heuristics import HEURISTIC_IDS
from .protocol import HeuristicSession, SubprocessTransport

USAGE_ERROR = 1
INPUT_ERROR = 2

DETERMINISTIC_ROLLOUT_CONFLICTS = 50_000
DETERMINISTIC_MCTS_CONFLICTS = 10_000


class CliError(Exception):
    def __init__(self, message: str, code: int = INPUT_ERROR) -> None:
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> "argparse.NoReturn":  # type: ignore[name-defined]
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def read_config(path: str | None) -> dict[str, str]:
    """Flat `key = value` config file; '#' starts a comment."""
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read config file: {exc}")
    config: dict[str, str] = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"bad config line (expected key = value): {line!r}")
        key, value = line.split("=", 1)
        config[key.strip().replace("-", "_")] = value.strip()
    return config


def effective(args: argparse.Namespace, config: dict[str, str], key: str, default, cast=str):
    """Option precedence: explicit flag, then config file, then default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in config:
        return cast(config[key])
    return default


def _load_formula(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}")
    try:
        return parse_dimacs(text)
    except DimacsError as exc:
        raise CliError(f"{path}: {exc}")


def _rollout_budget(args: argparse.Namespace, config: dict[str, str], default_seconds: float, deterministic_conflicts: int) -> SolverBudget:
    conflicts = effective(args, config, "rollout_conflicts", None, int)
    seconds = effective(args, config, "rollout_timeout", default_seconds, float)
    if getattr(args, "deterministic", False):
        return SolverBudget(max_conflicts=conflicts or deterministic_conflicts)
    if conflicts is not None:
        return SolverBudget(max_conflicts=conflicts)
    return SolverBudget(max_wall_time=seconds)


def derive_seed(master_seed: int, benchmark_id: str, run_index: int) -> int:
    """Stable per-(benchmark, run) seed so sweeps reproduce piecewise."""
    digest = hashlib.sha256(f"{master_seed}:{benchmark_id}:{run_index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


# -- solve ---------------------------------------------------------------------


def cmd_solve(args: argparse.Namespace, config: dict[str, str]) -> int:
    formula = _load_formula(args.cnf)
    budget = _rollout_budget(args, config, cnc.DEFAULT_ROLLOUT_SECONDS, DETERMINISTIC_ROLLOUT_CONFLICTS)
    timeout = effective(args, config, "timeout", cnc.DEFAULT_TOTAL_SECONDS, float)
    budgets = cnc.CncBudgets.with_timeout(timeout, budget)
    heuristic = _make_heuristic(args, config)
    try:
        stats = cnc.cube_and_conquer(formula, heuristic, budgets, rng_seed=args.seed)
    finally:
        if isinstance(heuristic, HeuristicSession):
            heuristic.close()
    print(json.dumps(_cnc_stats_dict(stats, deterministic=args.deterministic), indent=2))
    return 0


def _make_heuristic(args: argparse.Namespace, config: dict[str, str]):
    name = effective(args, config, "heuristic", "unit")
    if name != "external":
        if name not in HEURISTIC_IDS:
            raise CliError(f"unknown heuristic {name!r}", USAGE_ERROR)
        return name
    command = effective(args, config, "external_cmd", None)
    if not command:
        raise CliError("--external-cmd is required with --heuristic external", USAGE_ERROR)
    return HeuristicSession(SubprocessTransport(shlex.split(command)))


def _cnc_stats_dict(stats: cnc.CncStats, *, deterministic: bool) -> dict:
    return {
        "sat_status": stats.sat_status.value,
        "cubing_decisions": stats.cubing_decisions,
        "decision_time": 0.0 if deterministic else stats.decision_time,
        "conquer_time": 0.0 if deterministic else stats.conquer_time,
        "rollouts": stats.rollouts,
        "aborted_nodes": stats.aborted_nodes,
        "first_cube_variable": stats.first_cube_variable,
        "max_depth": stats.max_depth,
    }


# -- bench ---------------------------------------------------------------------


def read_manifest(path: str) -> list[tuple[str, str]]:
    """One `path<TAB>SAT|UNSAT` entry per line."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read manifest: {exc}")
    entries = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or parts[1] not in stats_mod.SAT_LABELS:
            raise CliError(f"manifest line {number}: expected 'path<TAB>SAT|UNSAT'")
        entries.append((parts[0], parts[1]))
    if not entries:
        raise CliError("manifest lists no benchmarks")
    return entries


def _bench_task(task: dict) -> dict:
    formula = parse_dimacs(Path(task["path"]).read_text())
    if task["rollout_conflicts"] is not None:
        budget = SolverBudget(max_conflicts=task["rollout_conflicts"])
    else:
        budget = SolverBudget(max_wall_time=task["rollout_seconds"])
    budgets = cnc.CncBudgets.with_timeout(task["timeout"], budget)
    if task["external_cmd"]:
        heuristic: str | HeuristicSession = HeuristicSession(
            SubprocessTransport(shlex.split(task["external_cmd"]))
        )
    else:
        heuristic = task["heuristic"]
    started = time.monotonic()
    try:
        stats = cnc.cube_and_conquer(formula, heuristic, budgets, rng_seed=task["seed"])
    finally:
        if isinstance(heuristic, HeuristicSession):
            heuristic.close()
    elapsed = time.monotonic() - started
    status = stats.sat_status.value
    deterministic = task["deterministic"]
    return {
        "heuristic": task["heuristic_name"],
        "benchmark_id": task["benchmark_id"],
        "run_index": task["run_index"],
        "solved": status == task["sat_label"],
        "sat_label": task["sat_label"],
        "status": status,
        "first_cube_variable": stats.first_cube_variable,
        "cubing_decisions": stats.cubing_decisions,
        "decision_time": 0.0 if deterministic else stats.decision_time,
        "conquer_time": 0.0 if deterministic else stats.conquer_time,
        "rollouts": stats.rollouts,
        "aborted_nodes": stats.aborted_nodes,
        "wall_time": 0.0 if deterministic else elapsed,
        "seed": task["seed"],
    }


def cmd_bench(args: argparse.Namespace, config: dict[str, str]) -> int:
    entries = read_manifest(args.manifest)
    heuristic_name = effective(args, config, "heuristic", "unit")
    external_cmd = effective(args, config, "external_cmd", None)
    if heuristic_name == "external" and not external_cmd:
        raise CliError("--external-cmd is required with --heuristic external", USAGE_ERROR)
    if heuristic_name != "external" and heuristic_name not in HEURISTIC_IDS:
        raise CliError(f"unknown heuristic {heuristic_name!r}", USAGE_ERROR)
    runs = effective(args, config, "runs", 5, int)
    workers = effective(args, config, "workers", 4, int)
    timeout = effective(args, config, "timeout", cnc.DEFAULT_TOTAL_SECONDS, float)
    conflicts = effective(args, config, "rollout_conflicts", None, int)
    seconds = effective(args, config, "rollout_timeout", cnc.DEFAULT_ROLLOUT_SECONDS, float)
    if args.deterministic and conflicts is None:
        conflicts = DETERMINISTIC_ROLLOUT_CONFLICTS
    if runs < 1 or workers < 1:
        raise CliError("runs and workers must be >= 1", USAGE_ERROR)

    missing = [path for path, _ in entries if not Path(path).is_file()]
    if missing and not args.skip_unreadable:
        raise CliError(f"unreadable benchmark files: {', '.join(missing)}")
    entries = [(p, label) for p, label in entries if Path(p).is_file()]

    tasks = []
    for path, label in entries:
        benchmark_id = Path(path).name
        for run_index in range(1, runs + 1):
            tasks.append(
                {
                    "path": path,
                    "benchmark_id": benchmark_id,
                    "sat_label": label,
                    "run_index": run_index,
                    "heuristic": heuristic_name if heuristic_name != "external" else "external",
                    "heuristic_name": heuristic_name,
                    "external_cmd": external_cmd if heuristic_name == "external" else None,
                    "timeout": timeout,
                    "rollout_conflicts": conflicts,
                    "rollout_seconds": seconds,
                    "seed": derive_seed(args.seed, benchmark_id, run_index),
                    "deterministic": args.deterministic,
                }
            )

    out_path = Path(args.out)
    mode = "a" if args.append else "w"
    written = 0
    with out_path.open(mode) as out:
        if workers == 1:
            for task in tasks:
                record = _bench_task(task)
                out.write(json.dumps(record) + "\n")
                out.flush()
                written += 1
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                # results are written in task order so reruns are byte-stable
                for record in pool.map(_bench_task, tasks):
                    out.write(json.dumps(record) + "\n")
                    out.flush()
                    written += 1
    print(f"wrote {written} run records to {out_path}")
    return 0


# -- mcts / dataset --------------------------------------------------------------


def _mcts_config(args: argparse.Namespace, config: dict[str, str]) -> mcts_mod.MctsConfig:
    budget = _rollout_budget(args, config, 1.0, DETERMINISTIC_MCTS_CONFLICTS)
    return mcts_mod.MctsConfig(
        iterations=effective(args, config, "iterations", 1000, int),
        seed=args.seed,
        rollout_budget=budget,
    )


def _write_tree(tree, out_dir: Path, embed: bool) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{tree.cnf_id}.tree.json"
    path.write_text(mcts_mod.tree_to_json(tree, embed_formulas=embed))
    return path


def cmd_mcts(args: argparse.Namespace, config: dict[str, str]) -> int:
    mcts_config = _mcts_config(args, config)
    out_dir = Path(args.out)
    for path in args.cnfs:
        formula = _load_formula(path)
        tree = mcts_mod.run_mcts(formula, mcts_config, cnf_id=Path(path).stem)
        tree_path = _write_tree(tree, out_dir, embed=not args.digest_only)
        print(f"{path}: {tree.iterations_run} iterations, root visits {tree.root.visits} -> {tree_path}")
    return 0


def cmd_dataset(args: argparse.Namespace, config: dict[str, str]) -> int:
    max_units = effective(args, config, "max_prompt_units", 8000, int)
    if max_units <= 0:
        raise CliError("--max-prompt-units must be positive", USAGE_ERROR)
    records: list[dataset_mod.PreferenceRecord] = []
    if args.from_trees:
        for path in args.inputs:
            try:
                data = json.loads(Path(path).read_text())
                tree = mcts_mod.tree_from_dict(data)
            except (OSError, ValueError, KeyError) as exc:
                raise CliError(f"{path}: {exc}")
            records.extend(dataset_mod.extract_preferences(tree))
    else:
        mcts_config = _mcts_config(args, config)
        tree_dir = Path(args.trees_out) if args.trees_out else None
        for path in args.inputs:
            formula = _load_formula(path)
            tree = mcts_mod.run_mcts(formula, mcts_config, cnf_id=Path(path).stem)
            if tree_dir is not None:
                _write_tree(tree, tree_dir, embed=True)
            records.extend(dataset_mod.extract_preferences(tree))

    kept = dataset_mod.filter_by_budget(records, max_units)
    text = dataset_mod.render_jsonl(kept)
    Path(args.out).write_text(text)
    if args.sft_out:
        Path(args.sft_out).write_text(dataset_mod.render_sft_jsonl(kept))
    dropped = len(records) - len(kept)
    print(
        f"extracted {len(records)} records, kept {len(kept)} within "
        f"{max_units} prompt units ({dropped} dropped) -> {args.out}"
    )
    return 0


# -- analyze / kappa / rank-percentile --------------------------------------------


def cmd_analyze(args: argparse.Namespace, config: dict[str, str]) -> int:
    try:
        text = Path(args.runs).read_text()
    except OSError as exc:
        raise CliError(f"cannot read runs file: {exc}")
    try:
        records = stats_mod.load_run_records(text)
        matrix = stats_mod.RunMatrix(records)
        report = stats_mod.analyze_matrix(matrix)
    except stats_mod.SchemaError as exc:
        raise CliError(str(exc))
    rendered = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(rendered + "\n")
    else:
        print(rendered)
    return 0


def _read_labels(path: str) -> list[str]:
    try:
        return [line.strip() for line in Path(path).read_text().splitlines() if line.strip()]
    except OSError as exc:
        raise CliError(f"cannot read label file: {exc}")


def cmd_kappa(args: argparse.Namespace, config: dict[str, str]) -> int:
    if len(args.labels) < 2:
        raise CliError("need at least two label files", USAGE_ERROR)
    label_lists = [_read_labels(path) for path in args.labels]
    lengths = {len(labels) for labels in label_lists}
    if len(lengths) != 1 or 0 in lengths:
        raise CliError("label files must be non-empty and the same length")
    result: dict = {}
    try:
        if len(label_lists) == 2:
            result["cohen_kappa"] = stats_mod.cohen_kappa(*label_lists)
        else:
            pairwise = {}
            for i in range(len(label_lists)):
                for j in range(i + 1, len(label_lists)):
                    name = f"{Path(args.labels[i]).stem}~{Path(args.labels[j]).stem}"
                    pairwise[name] = stats_mod.cohen_kappa(label_lists[i], label_lists[j])
            result["pairwise_cohen_kappa"] = pairwise
            categories = sorted({label for labels in label_lists for label in labels})
            counts = []
            for item in range(next(iter(lengths))):
                row = [0] * len(categories)
                for labels in label_lists:
                    row[categories.index(labels[item])] += 1
                counts.append(row)
            result["fleiss_kappa"] = stats_mod.fleiss_kappa(counts, len(label_lists))
    except stats_mod.DegenerateAgreement as exc:
        raise CliError(str(exc))
    print(json.dumps(result, indent=2))
    return 0


def cmd_rank_percentile(args: argparse.Namespace, config: dict[str, str]) -> int:
    formula = _load_formula(args.cnf)
    result = {}
    for variable in args.variables:
        if not 1 <= variable <= formula.num_vars:
            raise CliError(f"variable {variable} out of range 1..{formula.num_vars}")
        result[str(variable)] = stats_mod.freq_rank_percentile(formula, variable)
    print(json.dumps(result, indent=2))
    return 0


# -- parser ----------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="cubekit", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--deterministic", action="store_true",
                        help="swap wall-clock rollout budgets for conflict budgets")
    common.add_argument("--seed", type=int, default=0)

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="run cube-and-conquer on one CNF")
    p.add_argument("cnf")
    p.add_argument("--heuristic", choices=list(HEURISTIC_IDS) + ["external"])
    p.add_argument("--external-cmd", dest="external_cmd")
    p.add_argument("--timeout", type=float, help="total wall-clock budget in seconds")
    p.add_argument("--rollout-timeout", dest="rollout_timeout", type=float)
    p.add_argument("--rollout-conflicts", dest="rollout_conflicts", type=int)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", parents=[common], help="sweep a benchmark manifest")
    p.add_argument("manifest", help="lines of 'path<TAB>SAT|UNSAT'")
    p.add_argument("--out", required=True, help="run-record JSONL output")
    p.add_argument("--heuristic", choices=list(HEURISTIC_IDS) + ["external"])
    p.add_argument("--external-cmd", dest="external_cmd")
    p.add_argument("--runs", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--timeout", type=float)
    p.add_argument("--rollout-timeout", dest="rollout_timeout", type=float)
    p.add_argument("--rollout-conflicts", dest="rollout_conflicts", type=int)
    p.add_argument("--append", action="store_true", help="append instead of rewriting the output")
    p.add_argument("--skip-unreadable", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("mcts", parents=[common], help="grow a search tree per CNF")
    p.add_argument("cnfs", nargs="+")
    p.add_argument("--out", required=True, help="output directory for tree JSON files")
    p.add_argument("--iterations", type=int)
    p.add_argument("--rollout-timeout", dest="rollout_timeout", type=float)
    p.add_argument("--rollout-conflicts", dest="rollout_conflicts", type=int)
    p.add_argument("--digest-only", action="store_true",
                   help="store non-root formulas as digests (smaller, not dataset-ready)")
    p.set_defaults(func=cmd_mcts)

    p = sub.add_parser("dataset", parents=[common], help="build a preference JSONL")
    p.add_argument("inputs", nargs="+", help="CNF files, or tree JSON files with --from-trees")
    p.add_argument("--out", required=True)
    p.add_argument("--from-trees", action="store_true")
    p.add_argument("--trees-out", help="also write the intermediate trees here")
    p.add_argument("--iterations", type=int)
    p.add_argument("--rollout-timeout", dest="rollout_timeout", type=float)
    p.add_argument("--rollout-conflicts", dest="rollout_conflicts", type=int)
    p.add_argument("--max-prompt-units", dest="max_prompt_units", type=int)
    p.add_argument("--sft-out", dest="sft_out", help="also write a prompt/completion JSONL")
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("analyze", parents=[common], help="report statistics over run records")
    p.add_argument("runs", help="run-record JSONL file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("kappa", parents=[common], help="rater agreement from label files")
    p.add_argument("labels", nargs="+", help="two files for Cohen, three or more for Fleiss")
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("rank-percentile", parents=[common],
                       help="clause-frequency rank percentile of variables")
    p.add_argument("cnf")
    p.add_argument("variables", nargs="+", type=int)
    p.set_defaults(func=cmd_rank_percentile)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        config = read_config(args.config)
        return args.func(args, config)
    except CliError as exc:
        print(f"cubekit: {exc}", file=sys.stderr)
        return exc.code
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
