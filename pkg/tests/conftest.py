"""Shared test helpers: random formula generation and brute-force oracles.

The oracles enumerate assignments directly (vectorized over all 2^n
candidates), so they share no code with the solver or simplifier they check.
"""

from __future__ import annotations

import random

import numpy as np
import pytest

from cubekit.cnf import CnfFormula


def random_3sat(rng: random.Random, num_vars: int, num_clauses: int) -> CnfFormula:
    clauses = []
    for _ in range(num_clauses):
        variables = rng.sample(range(1, num_vars + 1), k=min(3, num_vars))
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in variables))
    return CnfFormula(num_vars, tuple(clauses))


def random_mixed_cnf(rng: random.Random, num_vars: int, num_clauses: int) -> CnfFormula:
    """Clauses of mixed width 1..4 (deduplicated, non-tautological)."""
    clauses = []
    for _ in range(num_clauses):
        width = rng.randint(1, min(4, num_vars))
        variables = rng.sample(range(1, num_vars + 1), k=width)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in variables))
    return CnfFormula(num_vars, tuple(clauses))


def brute_force_satisfiable(formula: CnfFormula) -> bool:
    """Exhaustive satisfiability over all 2^num_vars assignments."""
    n = formula.num_vars
    assert n <= 22, "oracle is exponential; keep formulas small"
    assignments = np.arange(2**n, dtype=np.uint32)
    ok = np.ones(2**n, dtype=bool)
    for clause in formula.clauses:
        if not clause:
            return False
        satisfied = np.zeros(2**n, dtype=bool)
        for lit in clause:
            bit = (assignments >> (abs(lit) - 1)) & 1
            satisfied |= bit == (1 if lit > 0 else 0)
        ok &= satisfied
        if not ok.any():
            return False
    return bool(ok.any())


def brute_force_implied(formula: CnfFormula, clause: tuple[int, ...]) -> bool:
    """True iff every satisfying assignment of `formula` satisfies `clause`."""
    n = formula.num_vars
    assignments = np.arange(2**n, dtype=np.uint32)
    ok = np.ones(2**n, dtype=bool)
    for c in formula.clauses:
        satisfied = np.zeros(2**n, dtype=bool)
        for lit in c:
            bit = (assignments >> (abs(lit) - 1)) & 1
            satisfied |= bit == (1 if lit > 0 else 0)
        ok &= satisfied
    clause_sat = np.zeros(2**n, dtype=bool)
    for lit in clause:
        bit = (assignments >> (abs(lit) - 1)) & 1
        clause_sat |= bit == (1 if lit > 0 else 0)
    return bool(np.all(clause_sat[ok]))


def evaluate_clause(clause, model: dict[int, bool]) -> bool:
    return any(model.get(abs(lit)) == (lit > 0) for lit in clause)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)
