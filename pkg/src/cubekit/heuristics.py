"""Symbolic splitting heuristics for cube-and-conquer.

Each heuristic scores literals from formula structure; a variable's final
score combines both polarities through `mix_diff`, and the split variable is
the argmax with ties broken by lowest index.

`heuleu`, `heule_schur`, and `unit` follow the classic lookahead scoring
formulas exactly. `march_cu` and `ternary` are documented approximations of
the March-family rewards: both weight the clauses that the assignment would
shorten, with the `march_cu` weight table configurable per clause size.
"""

from __future__ import annotations

import random
from typing import Callable, Mapping

from .cnf import CnfFormula, Literal, LiteralOutOfRange

HEURISTIC_IDS = ("heuleu", "heule_schur", "unit", "march_cu", "ternary", "random")
SCORING_HEURISTICS = ("heuleu", "heule_schur", "unit", "march_cu", "ternary")
# proposal order used by the tree-search expansion step
CANDIDATE_HEURISTICS = ("march_cu", "ternary", "heuleu", "heule_schur", "unit")


class NoSplittableVariable(ValueError):
    pass


def mix_diff(pos_score: float, neg_score: float) -> float:
    """Combine the two polarity scores: product plus sum.

    The product favors variables whose both branches simplify; the sum keeps
    one-sided progress from scoring zero.
    """
    return pos_score * neg_score + pos_score + neg_score


def default_march_weight(size: int) -> float:
    return 2.0 ** (2 - size)


def _check_literal(formula: CnfFormula, literal: Literal) -> None:
    if literal == 0 or abs(literal) > formula.num_vars:
        raise LiteralOutOfRange(f"literal {literal} out of range")


def score_heuleu(formula: CnfFormula, literal: Literal) -> float:
    """Sum of 2^(1-|C|) over clauses C containing the literal."""
    _check_literal(formula, literal)
    return sum(2.0 ** (1 - len(c)) for c in formula.clauses if literal in c)


def score_heule_schur(formula: CnfFormula, literal: Literal) -> float:
    """Clause-size weights times the mean opposite-occurrence count of the
    other literals in each clause containing `literal`."""
    _check_literal(formula, literal)
    occs = formula.occurrence_index
    total = 0.0
    for clause in formula.clauses:
        if literal not in clause:
            continue
        inner = sum(occs.get(-other, 0) for other in clause if other != literal)
        total += 2.0 ** (1 - len(clause)) * inner / len(clause)
    return total


def score_unit(formula: CnfFormula, literal: Literal) -> float:
    """`heule_schur` plus the number of binary clauses that assigning the
    literal true would shrink to units."""
    _check_literal(formula, literal)
    created_units = sum(1 for c in formula.clauses if len(c) == 2 and -literal in c)
    return score_heule_schur(formula, literal) + created_units


def score_march_cu(
    formula: CnfFormula,
    literal: Literal,
    weights: Mapping[int, float] | None = None,
) -> float:
    """Weighted count of clauses the assignment shortens (clauses containing
    the opposite literal), binary clauses weighing 1 by default."""
    _check_literal(formula, literal)
    total = 0.0
    for clause in formula.clauses:
        if len(clause) >= 2 and -literal in clause:
            size = len(clause)
            total += weights[size] if weights is not None else default_march_weight(size)
    return total


def score_ternary(formula: CnfFormula, literal: Literal) -> float:
    """Number of 3-clauses the assignment would reduce to binary."""
    _check_literal(formula, literal)
    return float(sum(1 for c in formula.clauses if len(c) == 3 and -literal in c))


SCORERS: dict[str, Callable[[CnfFormula, Literal], float]] = {
    "heuleu": score_heuleu,
    "heule_schur": score_heule_schur,
    "unit": score_unit,
    "march_cu": score_march_cu,
    "ternary": score_ternary,
}


def literal_scores(formula: CnfFormula, heuristic: str) -> dict[int, float]:
    """All literal scores for `heuristic` in one pass over the clause list.

    Agrees exactly with the per-literal scorers; used wherever every variable
    must be ranked.
    """
    if heuristic not in SCORING_HEURISTICS:
        raise ValueError(f"unknown scoring heuristic {heuristic!r}")
    scores: dict[int, float] = {}
    occs = formula.occurrence_index

    if heuristic == "heuleu":
        for clause in formula.clauses:
            weight = 2.0 ** (1 - len(clause))
            for lit in clause:
                scores[lit] = scores.get(lit, 0.0) + weight
        return scores

    if heuristic in ("heule_schur", "unit"):
        for clause in formula.clauses:
            weight = 2.0 ** (1 - len(clause)) / len(clause)
            opposite_total = sum(occs.get(-lit, 0) for lit in clause)
            for lit in clause:
                part = weight * (opposite_total - occs.get(-lit, 0))
                scores[lit] = scores.get(lit, 0.0) + part
        if heuristic == "unit":
            for clause in formula.clauses:
                if len(clause) == 2:
                    for lit in clause:
                        scores[-lit] = scores.get(-lit, 0.0) + 1.0
        return scores

    if heuristic == "march_cu":
        for clause in formula.clauses:
            if len(clause) >= 2:
                weight = default_march_weight(len(clause))
                for lit in clause:
                    scores[-lit] = scores.get(-lit, 0.0) + weight
        return scores

    # ternary
    for clause in formula.clauses:
        if len(clause) == 3:
            for lit in clause:
                scores[-lit] = scores.get(-lit, 0.0) + 1.0
    return scores


def choose_split(
    formula: CnfFormula,
    heuristic: str,
    rng_seed: int = 0,
    *,
    mix: Callable[[float, float], float] = mix_diff,
) -> int:
    """Pick the splitting variable for `heuristic`.

    Scoring heuristics take the argmax of mixed polarity scores over the
    variables that occur in clauses (lowest index wins ties); `random` draws
    uniformly from those variables, seeded for reproducibility.
    """
    if heuristic not in HEURISTIC_IDS:
        raise ValueError(f"unknown heuristic {heuristic!r}")
    candidates = formula.variables
    if heuristic == "random":
        if not candidates:
            if formula.num_vars < 1:
                raise NoSplittableVariable("formula has no variables")
            candidates = tuple(range(1, formula.num_vars + 1))
        return random.Random(rng_seed).choice(candidates)
    if not candidates:
        raise NoSplittableVariable("no variable occurs in any clause")
    scores = literal_scores(formula, heuristic)
    best_var = None
    best_score = float("-inf")
    for var in candidates:
        combined = mix(scores.get(var, 0.0), scores.get(-var, 0.0))
        if combined > best_score:
            best_var, best_score = var, combined
    assert best_var is not None
    return best_var
