import math
import random

import pytest
import scipy.stats

from cubekit.cnf import CnfFormula
from cubekit.stats import (
    DegenerateAgreement,
    RunMatrix,
    RunRecord,
    SchemaError,
    ZeroVariance,
    analyze_matrix,
    cohen_kappa,
    diversity,
    fleiss_kappa,
    freq_rank_percentile,
    load_run_records,
    paired_t_test,
    pairwise_agreement,
    pass_at_k,
    pearson_r,
    per_run_summary,
    portfolio_gain,
    regularized_incomplete_beta,
    sample_std,
    shannon_entropy_bits,
    student_t_two_sided_p,
)

from fixture_runs import (
    EXPECTED,
    EXPECTED_P_VALUES,
    REFERENCE_SWEEP,
    build_reference_records,
)


def matrix_from_solved_sets(per_run_solved, benchmarks, heuristic="h", label="SAT"):
    records = []
    for run_index, solved in enumerate(per_run_solved, start=1):
        for benchmark_id in benchmarks:
            records.append(
                RunRecord(
                    heuristic=heuristic,
                    benchmark_id=benchmark_id,
                    run_index=run_index,
                    solved=benchmark_id in solved,
                    sat_label=label,
                )
            )
    return RunMatrix(records)


class TestPassAtK:
    def test_union_over_runs(self):
        matrix = matrix_from_solved_sets(
            [{"A", "B"}, {"B", "C"}, {"B"}, {"A"}, {"C", "D"}], ["A", "B", "C", "D"]
        )
        assert pass_at_k(matrix, "h", 1) == 2
        assert pass_at_k(matrix, "h", 5) == 4

    def test_all_runs_empty(self):
        matrix = matrix_from_solved_sets([set()] * 5, ["A", "B"])
        assert all(pass_at_k(matrix, "h", k) == 0 for k in range(1, 6))

    def test_non_decreasing(self):
        rng = random.Random(109)
        benchmarks = [f"b{i}" for i in range(12)]
        per_run = [
            {b for b in benchmarks if rng.random() < 0.4} for _ in range(5)
        ]
        matrix = matrix_from_solved_sets(per_run, benchmarks)
        values = [pass_at_k(matrix, "h", k) for k in range(1, 6)]
        assert values == sorted(values)

    def test_k_out_of_range(self):
        matrix = matrix_from_solved_sets([{"A"}], ["A"])
        with pytest.raises(ValueError):
            pass_at_k(matrix, "h", 2)


class TestPerRunSummary:
    def test_identical_runs_zero_std(self):
        matrix = matrix_from_solved_sets([{"A"}] * 5, ["A", "B"])
        summary = per_run_summary(matrix, "h")
        assert summary.std == 0.0
        assert summary.mean == 1.0

    def test_sample_convention_pinned(self):
        assert sample_std([52, 51, 52, 51, 52]) == pytest.approx(0.547723, abs=1e-6)
        assert sample_std([46, 48, 47, 48, 48]) == pytest.approx(0.894427, abs=1e-6)


class TestPairedTTest:
    def test_reference_rows(self):
        cases = {
            "march_cu": ((26, 27, 26, 27, 27), (25, 25, 25, 25, 25), 1.6, 0.003),
            "unit": ((26, 26, 27, 26, 27), (26, 25, 25, 25, 25), 1.2, 0.033),
            "qwen3-4b-dpo": ((20, 20, 19, 20, 20), (22, 21, 21, 23, 22), -2.0, 0.003),
        }
        for sat, unsat, delta, p in cases.values():
            result = paired_t_test(sat, unsat)
            assert result.diff_mean == pytest.approx(delta)
            assert result.p == pytest.approx(p, abs=1e-3)

    def test_matches_scipy(self):
        rng = random.Random(113)
        for _ in range(60):
            n = rng.randint(2, 12)
            sat = [rng.randint(0, 40) for _ in range(n)]
            unsat = [rng.randint(0, 40) for _ in range(n)]
            if len(set(s - u for s, u in zip(sat, unsat))) == 1:
                continue
            ours = paired_t_test(sat, unsat)
            reference = scipy.stats.ttest_rel(sat, unsat)
            assert ours.t == pytest.approx(reference.statistic, abs=1e-9)
            assert ours.p == pytest.approx(reference.pvalue, abs=1e-9)

    def test_degenerate_variance(self):
        result = paired_t_test([5, 5, 5], [3, 3, 3])
        assert result.degenerate and result.p == 0.0 and result.diff_mean == 2.0
        result = paired_t_test([3, 3, 3], [3, 3, 3])
        assert result.degenerate and result.p == 1.0

    def test_length_validation(self):
        with pytest.raises(ValueError):
            paired_t_test([1, 2], [1])
        with pytest.raises(ValueError):
            paired_t_test([1], [1])


class TestIncompleteBeta:
    def test_against_scipy(self):
        rng = random.Random(127)
        for _ in range(300):
            a = rng.uniform(0.1, 20)
            b = rng.uniform(0.1, 20)
            x = rng.random()
            assert regularized_incomplete_beta(a, b, x) == pytest.approx(
                scipy.stats.beta.cdf(x, a, b), abs=1e-9
            )

    def test_bounds(self):
        assert regularized_incomplete_beta(2.0, 0.5, 0.0) == 0.0
        assert regularized_incomplete_beta(2.0, 0.5, 1.0) == 1.0

    def test_t_tail_against_scipy(self):
        for t in (0.0, 0.5, 1.7, 3.5, 6.53, -2.2):
            for df in (1, 2, 4, 9, 30):
                assert student_t_two_sided_p(t, df) == pytest.approx(
                    2 * scipy.stats.t.sf(abs(t), df), abs=1e-9
                )


class TestDiversity:
    def matrix_with_first_cubes(self, variables, benchmark="b1"):
        records = [
            RunRecord(
                heuristic="h",
                benchmark_id=benchmark,
                run_index=i + 1,
                solved=True,
                sat_label="SAT",
                first_cube_variable=v,
            )
            for i, v in enumerate(variables)
        ]
        return RunMatrix(records)

    def test_unanimous(self):
        report = diversity(self.matrix_with_first_cubes([7, 7, 7, 7, 7]), "h")
        assert report.mean_entropy_bits == 0.0
        assert report.mean_pairwise_agreement == 1.0

    def test_all_distinct(self):
        report = diversity(self.matrix_with_first_cubes([1, 2, 3, 4, 5]), "h")
        assert report.mean_entropy_bits == pytest.approx(math.log2(5), abs=1e-4)
        assert report.mean_pairwise_agreement == 0.0

    def test_hand_computed_mix(self):
        report = diversity(self.matrix_with_first_cubes([4, 4, 9, 9, 9]), "h")
        assert report.mean_entropy_bits == pytest.approx(0.970951, abs=1e-6)
        assert report.mean_pairwise_agreement == pytest.approx(0.4)

    def test_absent_first_cubes_excluded(self):
        records = self.matrix_with_first_cubes([1, 2, 3, 4, 5]).records("h")
        records += [
            RunRecord(
                heuristic="h",
                benchmark_id="aborted",
                run_index=i,
                solved=False,
                sat_label="SAT",
                first_cube_variable=None,
            )
            for i in range(1, 6)
        ]
        report = diversity(RunMatrix(records), "h")
        assert report.benchmarks_counted == 1
        assert report.benchmarks_excluded == 1

    def test_entropy_bounded_by_run_count(self):
        rng = random.Random(131)
        for _ in range(50):
            runs = rng.randint(2, 8)
            values = [rng.randint(1, 5) for _ in range(runs)]
            assert shannon_entropy_bits(values) <= math.log2(runs) + 1e-12

    def test_agreement_one_iff_entropy_zero(self):
        rng = random.Random(137)
        for _ in range(50):
            values = [rng.randint(1, 3) for _ in range(5)]
            entropy = shannon_entropy_bits(values)
            agreement = pairwise_agreement(values)
            assert (agreement == 1.0) == (entropy == 0.0)


class TestPearson:
    def test_perfect_positive(self):
        xs = [1.0, 2.0, 3.0, 4.0]
        assert pearson_r(xs, [2 * x + 1 for x in xs]) == pytest.approx(1.0)

    def test_perfect_negative(self):
        xs = [1.0, 2.0, 3.0]
        assert pearson_r(xs, [-x for x in xs]) == pytest.approx(-1.0)

    def test_hand_value(self):
        assert pearson_r([1, 2, 3], [2, 1, 4]) == pytest.approx(0.6546, abs=1e-4)

    def test_bounded(self):
        rng = random.Random(139)
        for _ in range(200):
            n = rng.randint(2, 20)
            xs = [rng.random() for _ in range(n)]
            ys = [rng.random() for _ in range(n)]
            if len(set(xs)) == 1 or len(set(ys)) == 1:
                continue
            assert abs(pearson_r(xs, ys)) <= 1.0 + 1e-12

    def test_zero_variance(self):
        with pytest.raises(ZeroVariance):
            pearson_r([1, 1, 1], [1, 2, 3])


class TestFreqRankPercentile:
    def test_most_frequent_is_zero(self):
        formula = CnfFormula(3, ((1, 2), (1, -2), (-1, 3)))
        assert freq_rank_percentile(formula, 1) == 0.0

    def test_median_rank(self):
        # occurrence counts 10, 5, 1 for variables 1, 2, 3
        clauses = tuple((1,) for _ in range(10)) + tuple((2,) for _ in range(5)) + ((3,),)
        formula = CnfFormula(3, clauses)
        assert freq_rank_percentile(formula, 2) == 0.5
        assert freq_rank_percentile(formula, 3) == 1.0

    def test_all_tied_share_top_rank(self):
        formula = CnfFormula(3, ((1, 2, 3),))
        for variable in (1, 2, 3):
            assert freq_rank_percentile(formula, variable) == 0.0

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            freq_rank_percentile(CnfFormula(2, ((1,),)), 3)


class TestKappas:
    def test_cohen_identical(self):
        assert cohen_kappa(["A", "B", "A"], ["A", "B", "A"]) == 1.0

    def test_cohen_hand_value(self):
        assert cohen_kappa(list("AABB"), list("ABBB")) == pytest.approx(0.5)

    def test_cohen_independent_labels_near_zero(self):
        rng = random.Random(149)
        a = [rng.choice("ABC") for _ in range(20000)]
        b = [rng.choice("ABC") for _ in range(20000)]
        assert abs(cohen_kappa(a, b)) < 0.05

    def test_cohen_degenerate(self):
        with pytest.raises(DegenerateAgreement):
            cohen_kappa(["A", "A"], ["A", "A"])

    def test_fleiss_unanimous(self):
        assert fleiss_kappa([(3, 0), (0, 3)], 3) == 1.0

    def test_fleiss_hand_value(self):
        assert fleiss_kappa([(2, 1), (1, 2)], 3) == pytest.approx(-1 / 3)

    def test_fleiss_row_validation(self):
        with pytest.raises(ValueError):
            fleiss_kappa([(2, 2)], 3)


class TestRunMatrix:
    def test_ragged_rejected(self):
        records = [
            RunRecord("h", "a", 1, True, "SAT"),
            RunRecord("h", "a", 2, True, "SAT"),
            RunRecord("h", "b", 1, True, "SAT"),
        ]
        with pytest.raises(SchemaError, match="h"):
            RunMatrix(records)

    def test_duplicate_rejected(self):
        records = [RunRecord("h", "a", 1, True, "SAT")] * 2
        with pytest.raises(SchemaError):
            RunMatrix(records)

    def test_conflicting_ground_truth_rejected(self):
        records = [
            RunRecord("h1", "a", 1, True, "SAT"),
            RunRecord("h2", "a", 1, True, "UNSAT"),
        ]
        with pytest.raises(SchemaError, match="labelled both"):
            RunMatrix(records)

    def test_jsonl_line_numbers_in_errors(self):
        good = (
            '{"heuristic": "h", "benchmark_id": "a", "run_index": 1,'
            ' "solved": true, "sat_label": "SAT"}'
        )
        with pytest.raises(SchemaError, match="line 2"):
            load_run_records(good + "\nnot json\n")
        with pytest.raises(SchemaError, match="line 1"):
            load_run_records('{"heuristic": "h"}\n')

    def test_jsonl_round_trip(self):
        import json

        record = RunRecord("h", "a", 1, True, "SAT", first_cube_variable=4)
        line = json.dumps(
            {
                "heuristic": "h",
                "benchmark_id": "a",
                "run_index": 1,
                "solved": True,
                "sat_label": "SAT",
                "first_cube_variable": 4,
            }
        )
        assert load_run_records(line) == [record]


@pytest.fixture(scope="module")
def reference_matrix():
    return RunMatrix(build_reference_records())


class TestReferenceSweep:
    @pytest.fixture
    def matrix(self, reference_matrix):
        return reference_matrix

    def test_pass_at_k_sequences(self, matrix):
        for heuristic, expected in EXPECTED.items():
            got = [pass_at_k(matrix, heuristic, k) for k in range(1, 6)]
            assert got == expected["pass_at_k"], heuristic

    def test_means_and_stds(self, matrix):
        for heuristic, expected in EXPECTED.items():
            summary = per_run_summary(matrix, heuristic)
            assert summary.mean == pytest.approx(expected["mean"], abs=1e-9)
            assert summary.std == pytest.approx(expected["std"], abs=1e-6)

    def test_per_run_counts_match_fixture(self, matrix):
        for heuristic, per_category in REFERENCE_SWEEP.items():
            summary = per_run_summary(matrix, heuristic)
            assert tuple(summary.per_run_sat) == per_category["SAT"][0]
            assert tuple(summary.per_run_unsat) == per_category["UNSAT"][0]

    def test_significant_p_values(self, matrix):
        for heuristic, expected_p in EXPECTED_P_VALUES.items():
            summary = per_run_summary(matrix, heuristic)
            result = paired_t_test(summary.per_run_sat, summary.per_run_unsat)
            assert result.p == pytest.approx(expected_p, abs=1e-3), heuristic

    def test_portfolio_gains(self, matrix):
        assert portfolio_gain(matrix, "qwen3-4b-sft-dpo") == pytest.approx(5.6, abs=1e-9)
        assert portfolio_gain(matrix, "unit") == pytest.approx(1.4, abs=1e-9)

    def test_gain_non_negative_everywhere(self, matrix):
        for heuristic in matrix.heuristics():
            assert portfolio_gain(matrix, heuristic) >= 0.0

    def test_full_report(self, matrix):
        report = analyze_matrix(matrix)
        unit = report["heuristics"]["unit"]
        assert unit["pass_at_k"] == [52, 53, 53, 53, 53]
        assert unit["mean"] == pytest.approx(51.6)
        assert unit["bias"] == "SAT"
        assert report["heuristics"]["qwen3-4b-dpo"]["bias"] == "UNSAT"
        assert report["heuristics"]["qwen3-4b-sft-dpo"]["bias"] == "none"
        # no fixture rows carry first cubes, so no correlation is computable
        assert report["correlation"]["agreement_vs_portfolio_gain_pearson_r"] is None


def test_deterministic_gain_zero():
    matrix = matrix_from_solved_sets([{"A", "B"}] * 5, ["A", "B", "C"])
    assert portfolio_gain(matrix, "h") == 0.0
