"""Run the full cube-and-conquer procedure with several heuristics and
inspect the per-run accounting."""

import math
import random

from cubekit import CncBudgets, SolverBudget, cube_and_conquer
from cubekit.cnf import CnfFormula
from cubekit.heuristics import HEURISTIC_IDS


def random_3sat(rng, num_vars, num_clauses):
    clauses = []
    for _ in range(num_clauses):
        variables = rng.sample(range(1, num_vars + 1), k=3)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in variables))
    return CnfFormula(num_vars, tuple(clauses))


rng = random.Random(99)
formula = random_3sat(rng, 45, 190)

# conflict-bounded rollouts make the whole run reproducible; the overall
# deadline is disabled because these instances finish in milliseconds
budgets = lambda: CncBudgets.with_timeout(math.inf, SolverBudget(max_conflicts=12))

print(f"{'heuristic':12s} {'status':8s} {'splits':>6s} {'rollouts':>8s} {'depth':>5s} {'first':>5s}")
for heuristic in HEURISTIC_IDS:
    stats = cube_and_conquer(formula, heuristic, budgets(), rng_seed=1)
    print(
        f"{heuristic:12s} {stats.sat_status.value:8s} {stats.cubing_decisions:6d} "
        f"{stats.rollouts:8d} {stats.max_depth:5d} {stats.first_cube_variable!s:>5s}"
    )

print("\nthe tiny rollout budget forces real cubing work; a generous budget")
print("usually finishes at depth 1 because the conquer step solves the child outright:")
generous = CncBudgets.with_timeout(math.inf, SolverBudget(max_conflicts=100_000))
stats = cube_and_conquer(formula, "unit", generous)
print(f"unit with 100k-conflict rollouts: depth {stats.max_depth}, {stats.rollouts} rollouts")
