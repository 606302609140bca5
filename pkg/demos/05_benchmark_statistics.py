"""Evaluation mathematics on a small synthetic sweep: pass@k, per-run
summaries, the SAT/UNSAT paired t-test, first-cube diversity, portfolio
gain, and rater-agreement kappas."""

import random

from cubekit.stats import (
    RunMatrix,
    RunRecord,
    analyze_matrix,
    cohen_kappa,
    diversity,
    fleiss_kappa,
    paired_t_test,
    pass_at_k,
    per_run_summary,
    portfolio_gain,
)

rng = random.Random(17)
benchmarks = [(f"b{i:02d}", "SAT" if i < 10 else "UNSAT") for i in range(20)]

records = []
for heuristic, solve_rate, spread in (("steady", 0.7, 1), ("diverse", 0.55, 40)):
    for benchmark_id, label in benchmarks:
        base_pick = rng.randint(1, 50)
        for run_index in range(1, 6):
            records.append(
                RunRecord(
                    heuristic=heuristic,
                    benchmark_id=benchmark_id,
                    run_index=run_index,
                    solved=rng.random() < solve_rate,
                    sat_label=label,
                    first_cube_variable=base_pick + rng.randint(0, spread),
                )
            )

matrix = RunMatrix(records)
for heuristic in matrix.heuristics():
    summary = per_run_summary(matrix, heuristic)
    test = paired_t_test(summary.per_run_sat, summary.per_run_unsat)
    report = diversity(matrix, heuristic)
    print(f"{heuristic}:")
    print(f"  pass@1..5:      {[pass_at_k(matrix, heuristic, k) for k in range(1, 6)]}")
    print(f"  mean/std:       {summary.mean:.1f} / {summary.std:.2f}")
    print(f"  SAT-UNSAT bias: delta={test.diff_mean:+.1f}, p={test.p:.3f}")
    print(f"  first-cube:     entropy {report.mean_entropy_bits:.2f} bits, "
          f"agreement {report.mean_pairwise_agreement:.2f}")
    print(f"  portfolio gain: {portfolio_gain(matrix, heuristic):+.1f}")

report = analyze_matrix(matrix)
print("\nagreement vs gain correlation over heuristics:",
      report["correlation"]["agreement_vs_portfolio_gain_pearson_r"])

# rater agreement on label files
rater_a = [rng.choice("ABC") for _ in range(60)]
rater_b = [a if rng.random() < 0.7 else rng.choice("ABC") for a in rater_a]
rater_c = [a if rng.random() < 0.5 else rng.choice("ABC") for a in rater_a]
print("\nCohen kappa A~B:", round(cohen_kappa(rater_a, rater_b), 3))
categories = sorted(set(rater_a) | set(rater_b) | set(rater_c))
counts = [
    [sum(1 for r in (rater_a[i], rater_b[i], rater_c[i]) if r == cat) for cat in categories]
    for i in range(len(rater_a))
]
print("Fleiss kappa A+B+C:", round(fleiss_kappa(counts, 3), 3))
