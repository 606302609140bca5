"""Benchmark evaluation statistics.

Takes per-(heuristic, benchmark, run) outcome records and computes everything
the reporting layer needs: pass@k coverage, per-run solve summaries with a
SAT/UNSAT paired t-test, first-cube diversity (Shannon entropy and pairwise
run agreement), portfolio gain, correlations, frequency-rank percentiles, and
rater-agreement kappas.

The Student-t tail probability is computed here via the regularized
incomplete beta function (continued fraction, modified Lentz), so no
statistics package is required at runtime.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .cnf import CnfFormula

SAT_LABELS = ("SAT", "UNSAT")


class SchemaError(ValueError):
    """Run-record input violates the expected shape."""


class ZeroVariance(ValueError):
    pass


class DegenerateAgreement(ValueError):
    pass


@dataclass(frozen=True)
class RunRecord:
    heuristic: str
    benchmark_id: str
    run_index: int
    solved: bool
    sat_label: str
    first_cube_variable: int | None = None
    cubing_decisions: int = 0
    decision_time: float = 0.0
    conquer_time: float = 0.0

    def __post_init__(self) -> None:
        if self.run_index < 1:
            raise SchemaError("run_index must be >= 1")
        if self.sat_label not in SAT_LABELS:
            raise SchemaError(f"sat_label must be one of {SAT_LABELS}")


def record_from_dict(data: Mapping, line: int | None = None) -> RunRecord:
    where = "" if line is None else f" (line {line})"
    try:
        return RunRecord(
            heuristic=str(data["heuristic"]),
            benchmark_id=str(data["benchmark_id"]),
            run_index=int(data["run_index"]),
            solved=bool(data["solved"]),
            sat_label=str(data["sat_label"]),
            first_cube_variable=(
                None if data.get("first_cube_variable") is None else int(data["first_cube_variable"])
            ),
            cubing_decisions=int(data.get("cubing_decisions", 0)),
            decision_time=float(data.get("decision_time", 0.0)),
            conquer_time=float(data.get("conquer_time", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad run record{where}: {exc}") from exc


def load_run_records(text: str) -> list[RunRecord]:
    """Parse run-record JSONL; raises SchemaError with the 1-based line number."""
    records = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON on line {number}: {exc}") from exc
        if not isinstance(data, dict):
            raise SchemaError(f"line {number} is not a JSON object")
        records.append(record_from_dict(data, line=number))
    return records


class RunMatrix:
    """Records grouped per heuristic; each heuristic's block must be
    rectangular (the same run indices for every benchmark)."""

    def __init__(self, records: Iterable[RunRecord]) -> None:
        table: dict[str, dict[tuple[str, int], RunRecord]] = defaultdict(dict)
        labels: dict[str, str] = {}
        for record in records:
            key = (record.benchmark_id, record.run_index)
            if key in table[record.heuristic]:
                raise SchemaError(
                    f"duplicate record for heuristic {record.heuristic!r}, "
                    f"benchmark {record.benchmark_id!r}, run {record.run_index}"
                )
            # the label is per-benchmark ground truth, not a per-run outcome
            known = labels.setdefault(record.benchmark_id, record.sat_label)
            if known != record.sat_label:
                raise SchemaError(
                    f"benchmark {record.benchmark_id!r} labelled both {known} "
                    f"and {record.sat_label}"
                )
            table[record.heuristic][key] = record
        self._table = dict(table)
        for heuristic in self._table:
            self._check_rectangular(heuristic)

    def _check_rectangular(self, heuristic: str) -> None:
        runs_per_benchmark: dict[str, set[int]] = defaultdict(set)
        for benchmark_id, run_index in self._table[heuristic]:
            runs_per_benchmark[benchmark_id].add(run_index)
        run_sets = {frozenset(v) for v in runs_per_benchmark.values()}
        if len(run_sets) > 1:
            raise SchemaError(f"ragged run matrix for heuristic {heuristic!r}")

    def heuristics(self) -> list[str]:
        return sorted(self._table)

    def benchmarks(self, heuristic: str) -> list[str]:
        return sorted({b for b, _ in self._table[heuristic]})

    def run_indices(self, heuristic: str) -> list[int]:
        return sorted({r for _, r in self._table[heuristic]})

    def record(self, heuristic: str, benchmark_id: str, run_index: int) -> RunRecord:
        return self._table[heuristic][(benchmark_id, run_index)]

    def records(self, heuristic: str) -> list[RunRecord]:
        return list(self._table[heuristic].values())


def pass_at_k(matrix: RunMatrix, heuristic: str, k: int) -> int:
    """Unique benchmarks solved across the first k runs (execution order)."""
    runs = matrix.run_indices(heuristic)
    if not 1 <= k <= len(runs):
        raise ValueError(f"k={k} outside 1..{len(runs)}")
    solved: set[str] = set()
    for run_index in runs[:k]:
        for benchmark_id in matrix.benchmarks(heuristic):
            if matrix.record(heuristic, benchmark_id, run_index).solved:
                solved.add(benchmark_id)
    return len(solved)


@dataclass
class RunSummary:
    per_run_totals: list[int]
    per_run_sat: list[int]
    per_run_unsat: list[int]
    sat_avg: float
    unsat_avg: float
    mean: float
    std: float


def sample_std(values: Sequence[float]) -> float:
    """Sample (n-1) standard deviation; 0.0 for fewer than two values."""
    n = len(values)
    if n < 2:
        return 0.0
    mu = sum(values) / n
    return math.sqrt(sum((v - mu) ** 2 for v in values) / (n - 1))


def per_run_summary(matrix: RunMatrix, heuristic: str) -> RunSummary:
    runs = matrix.run_indices(heuristic)
    benchmarks = matrix.benchmarks(heuristic)
    per_run_sat, per_run_unsat, per_run_totals = [], [], []
    for run_index in runs:
        sat = unsat = 0
        for benchmark_id in benchmarks:
            record = matrix.record(heuristic, benchmark_id, run_index)
            if record.solved:
                if record.sat_label == "SAT":
                    sat += 1
                else:
                    unsat += 1
        per_run_sat.append(sat)
        per_run_unsat.append(unsat)
        per_run_totals.append(sat + unsat)
    n = len(runs)
    return RunSummary(
        per_run_totals=per_run_totals,
        per_run_sat=per_run_sat,
        per_run_unsat=per_run_unsat,
        sat_avg=sum(per_run_sat) / n,
        unsat_avg=sum(per_run_unsat) / n,
        mean=sum(per_run_totals) / n,
        std=sample_std(per_run_totals),
    )


# -- paired t-test -----------------------------------------------------------

_LENTZ_TINY = 1e-300
_BETA_TOL = 1e-12
_BETA_MAX_ITER = 500


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _LENTZ_TINY:
        d = _LENTZ_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _LENTZ_TINY:
            d = _LENTZ_TINY
        c = 1.0 + aa / c
        if abs(c) < _LENTZ_TINY:
            c = _LENTZ_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _LENTZ_TINY:
            d = _LENTZ_TINY
        c = 1.0 + aa / c
        if abs(c) < _LENTZ_TINY:
            c = _LENTZ_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_TOL:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) to absolute accuracy well below 1e-9."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: int) -> float:
    """Two-sided tail probability of Student's t with df degrees of freedom."""
    if df < 1:
        raise ValueError("df must be >= 1")
    if math.isinf(t):
        return 0.0
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))


@dataclass
class TTestResult:
    diff_mean: float
    t: float
    p: float
    degenerate: bool = False


def paired_t_test(sat_per_run: Sequence[float], unsat_per_run: Sequence[float]) -> TTestResult:
    """Paired two-sided t-test of per-run SAT versus UNSAT solve counts.

    When every paired difference is identical the statistic has no variance;
    the result is then flagged degenerate with p pinned to 0 (nonzero shift)
    or 1 (no shift) instead of dividing by zero.
    """
    if len(sat_per_run) != len(unsat_per_run):
        raise ValueError("paired samples must have equal length")
    n = len(sat_per_run)
    if n < 2:
        raise ValueError("need at least two paired runs")
    diffs = [s - u for s, u in zip(sat_per_run, unsat_per_run)]
    diff_mean = sum(diffs) / n
    sd = sample_std(diffs)
    if sd == 0.0:
        if diff_mean == 0.0:
            return TTestResult(diff_mean=0.0, t=0.0, p=1.0, degenerate=True)
        t = math.copysign(math.inf, diff_mean)
        return TTestResult(diff_mean=diff_mean, t=t, p=0.0, degenerate=True)
    t = diff_mean / (sd / math.sqrt(n))
    return TTestResult(diff_mean=diff_mean, t=t, p=student_t_two_sided_p(t, n - 1))


# -- diversity ---------------------------------------------------------------


def shannon_entropy_bits(values: Sequence) -> float:
    """Entropy of the empirical distribution of `values`, in bits."""
    if not values:
        raise ValueError("entropy of an empty sample is undefined")
    counts = Counter(values)
    total = len(values)
    return -sum((c / total) * math.log2(c / total) for c in counts.values())


def pairwise_agreement(values: Sequence) -> float:
    """Fraction of unordered pairs with equal values; needs >= 2 values."""
    n = len(values)
    if n < 2:
        raise ValueError("agreement needs at least two values")
    matching = sum(1 for i in range(n) for j in range(i + 1, n) if values[i] == values[j])
    return matching / (n * (n - 1) / 2)


@dataclass
class DiversityReport:
    mean_entropy_bits: float
    mean_pairwise_agreement: float
    per_benchmark_entropy: dict[str, float]
    per_benchmark_agreement: dict[str, float]
    benchmarks_counted: int
    benchmarks_excluded: int


def diversity(matrix: RunMatrix, heuristic: str) -> DiversityReport:
    """First-cube diversity per benchmark, averaged over benchmarks.

    Runs that never made a first cube are skipped; benchmarks left with
    fewer than two observations are excluded from the means and counted.
    """
    entropies: dict[str, float] = {}
    agreements: dict[str, float] = {}
    excluded = 0
    for benchmark_id in matrix.benchmarks(heuristic):
        observed = [
            record.first_cube_variable
            for run_index in matrix.run_indices(heuristic)
            for record in [matrix.record(heuristic, benchmark_id, run_index)]
            if record.first_cube_variable is not None
        ]
        if len(observed) < 2:
            excluded += 1
            continue
        entropies[benchmark_id] = shannon_entropy_bits(observed)
        agreements[benchmark_id] = pairwise_agreement(observed)
    counted = len(entropies)
    return DiversityReport(
        mean_entropy_bits=sum(entropies.values()) / counted if counted else 0.0,
        mean_pairwise_agreement=sum(agreements.values()) / counted if counted else 0.0,
        per_benchmark_entropy=entropies,
        per_benchmark_agreement=agreements,
        benchmarks_counted=counted,
        benchmarks_excluded=excluded,
    )


def portfolio_gain(matrix: RunMatrix, heuristic: str) -> float:
    """Coverage of all runs together minus the mean single-run coverage."""
    runs = matrix.run_indices(heuristic)
    return pass_at_k(matrix, heuristic, len(runs)) - per_run_summary(matrix, heuristic).mean


def pearson_r(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(xs) != len(ys):
        raise ValueError("samples must have equal length")
    n = len(xs)
    if n < 2:
        raise ValueError("need at least two points")
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    var_x = sum((x - mean_x) ** 2 for x in xs)
    var_y = sum((y - mean_y) ** 2 for y in ys)
    if var_x == 0.0 or var_y == 0.0:
        raise ZeroVariance("correlation undefined for a constant sample")
    cov = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    return cov / math.sqrt(var_x * var_y)


def freq_rank_percentile(formula: CnfFormula, variable: int) -> float:
    """Rank of `variable` by total clause occurrences: 0.0 means no variable
    occurs strictly more often (ties share the top rank)."""
    if not 1 <= variable <= formula.num_vars:
        raise ValueError(f"variable {variable} out of range")
    occs = formula.occurrence_index
    counts = {
        v: occs.get(v, 0) + occs.get(-v, 0) for v in range(1, formula.num_vars + 1)
    }
    own = counts[variable]
    greater = sum(1 for v, c in counts.items() if c > own)
    return greater / max(1, formula.num_vars - 1)


# -- rater agreement ----------------------------------------------------------


def cohen_kappa(labels_a: Sequence, labels_b: Sequence) -> float:
    if len(labels_a) != len(labels_b):
        raise ValueError("label lists must have equal length")
    if not labels_a:
        raise ValueError("label lists must be non-empty")
    n = len(labels_a)
    observed = sum(1 for a, b in zip(labels_a, labels_b) if a == b) / n
    counts_a = Counter(labels_a)
    counts_b = Counter(labels_b)
    expected = sum(
        (counts_a[label] / n) * (counts_b[label] / n) for label in counts_a if label in counts_b
    )
    if expected == 1.0:
        raise DegenerateAgreement("expected agreement is 1; kappa undefined")
    return (observed - expected) / (1.0 - expected)


def fleiss_kappa(counts: Sequence[Sequence[int]], raters_per_item: int) -> float:
    """Fleiss' kappa from an item-by-category count table."""
    if raters_per_item < 2:
        raise ValueError("need at least two raters")
    if not counts:
        raise ValueError("need at least one item")
    n_items = len(counts)
    n_categories = len(counts[0])
    for row in counts:
        if len(row) != n_categories:
            raise ValueError("ragged count table")
        if sum(row) != raters_per_item:
            raise ValueError("every row must sum to raters_per_item")
    p_item = [
        (sum(c * c for c in row) - raters_per_item)
        / (raters_per_item * (raters_per_item - 1))
        for row in counts
    ]
    p_bar = sum(p_item) / n_items
    totals = [sum(row[j] for row in counts) for j in range(n_categories)]
    p_cat = [t / (n_items * raters_per_item) for t in totals]
    p_expected = sum(p * p for p in p_cat)
    if p_expected == 1.0:
        raise DegenerateAgreement("expected agreement is 1; kappa undefined")
    return (p_bar - p_expected) / (1.0 - p_expected)


# -- full report ---------------------------------------------------------------


def analyze_matrix(matrix: RunMatrix, significance: float = 0.05) -> dict:
    """Aggregate every per-heuristic statistic plus the cross-heuristic
    agreement/portfolio-gain correlation into one JSON-shaped report."""
    report: dict = {"heuristics": {}, "correlation": {}}
    agreement_points: list[float] = []
    gain_points: list[float] = []
    correlated: list[str] = []
    for heuristic in matrix.heuristics():
        runs = matrix.run_indices(heuristic)
        summary = per_run_summary(matrix, heuristic)
        test = paired_t_test(summary.per_run_sat, summary.per_run_unsat)
        if test.p < significance:
            bias = "SAT" if test.diff_mean > 0 else "UNSAT"
        else:
            bias = "none"
        gain = portfolio_gain(matrix, heuristic)
        div = diversity(matrix, heuristic)
        report["heuristics"][heuristic] = {
            "runs": len(runs),
            "benchmarks": len(matrix.benchmarks(heuristic)),
            "pass_at_k": [pass_at_k(matrix, heuristic, k) for k in range(1, len(runs) + 1)],
            "per_run_totals": summary.per_run_totals,
            "per_run_sat": summary.per_run_sat,
            "per_run_unsat": summary.per_run_unsat,
            "sat_avg": summary.sat_avg,
            "unsat_avg": summary.unsat_avg,
            "mean": summary.mean,
            "std": summary.std,
            "delta": test.diff_mean,
            "p_value": test.p,
            "bias": bias,
            "portfolio_gain": gain,
            "diversity": {
                "mean_entropy_bits": div.mean_entropy_bits,
                "mean_pairwise_agreement": div.mean_pairwise_agreement,
                "benchmarks_counted": div.benchmarks_counted,
                "benchmarks_excluded": div.benchmarks_excluded,
            },
        }
        if div.benchmarks_counted > 0:
            agreement_points.append(div.mean_pairwise_agreement)
            gain_points.append(gain)
            correlated.append(heuristic)
    correlation: float | None = None
    if len(agreement_points) >= 2:
        try:
            correlation = pearson_r(agreement_points, gain_points)
        except ZeroVariance:
            correlation = None
    report["correlation"] = {
        "agreement_vs_portfolio_gain_pearson_r": correlation,
        "heuristics_included": correlated,
    }
    return report
