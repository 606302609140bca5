"""Grow a search tree over cubing decisions and flatten it into preference
records: per expanded node, the best and worst scoring polarity pairs."""

import random

from cubekit import MctsConfig, SolverBudget, run_mcts
from cubekit.cnf import CnfFormula
from cubekit.dataset import extract_preferences, node_pair_scores, prompt_units, render_jsonl


def random_3sat(rng, num_vars, num_clauses):
    clauses = []
    for _ in range(num_clauses):
        variables = rng.sample(range(1, num_vars + 1), k=3)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in variables))
    return CnfFormula(num_vars, tuple(clauses))


formula = random_3sat(random.Random(5), 40, 170)
config = MctsConfig(rollout_budget=SolverBudget(max_conflicts=12), iterations=150, seed=11)
tree = run_mcts(formula, config, cnf_id="demo")

print(f"root visits: {tree.root.visits}, children: {len(tree.root.children)}")
print("\nroot candidate pairs (positive/negative branch rewards and pair score):")
for pair in sorted(node_pair_scores(tree.root), key=lambda p: -p.score):
    print(
        f"  variable {pair.variable:3d}: "
        f"{pair.reward_pos:.4f} / {pair.reward_neg:.4f} -> score {pair.score:.4f}"
    )

records = extract_preferences(tree)
print(f"\nextracted {len(records)} preference records (breadth-first over expanded nodes)")
record = records[0]
print(f"first record: cnf_id={record.cnf_id}, node_path={record.node_path}")
print(f"  prompt length: {len(record.prompt)} chars = {prompt_units(record.prompt)} budget units")
print(f"  chosen   ({record.chosen_score:.4f}): {record.chosen.splitlines()[-2]}")
print(f"  rejected ({record.rejected_score:.4f}): {record.rejected.splitlines()[-2]}")

jsonl = render_jsonl(records)
print(f"\nrendered JSONL: {len(jsonl.splitlines())} lines, {len(jsonl)} bytes")
