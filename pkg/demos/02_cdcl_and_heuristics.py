"""Solve random formulas with the CDCL engine and compare what the symbolic
splitting heuristics would pick on the same instance."""

import random

from cubekit import SolverBudget, solve, verify_model
from cubekit.cnf import CnfFormula
from cubekit.heuristics import SCORING_HEURISTICS, choose_split, literal_scores


def random_3sat(rng, num_vars, num_clauses):
    clauses = []
    for _ in range(num_clauses):
        variables = rng.sample(range(1, num_vars + 1), k=3)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in variables))
    return CnfFormula(num_vars, tuple(clauses))


rng = random.Random(2024)
formula = random_3sat(rng, 20, 85)

result = solve(formula)
print(f"status: {result.status.value}")
print(
    f"decisions={result.stats.decisions} conflicts={result.stats.conflicts} "
    f"propagations={result.stats.propagations} restarts={result.stats.restarts}"
)
if result.model:
    print("model verifies:", verify_model(formula, result.model))

# a conflict budget turns long searches into UNKNOWN instead of blocking
bounded = solve(formula, SolverBudget(max_conflicts=5))
print("with a 5-conflict budget:", bounded.status.value)

print("\nsplit picks on this formula:")
for heuristic in SCORING_HEURISTICS:
    pick = choose_split(formula, heuristic)
    scores = literal_scores(formula, heuristic)
    print(
        f"  {heuristic:12s} -> variable {pick:3d} "
        f"(scores {scores.get(pick, 0.0):.3f} / {scores.get(-pick, 0.0):.3f})"
    )
print(f"  {'random':12s} -> variable {choose_split(formula, 'random', rng_seed=7):3d}")
