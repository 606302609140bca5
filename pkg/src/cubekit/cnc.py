"""Recursive cube-and-conquer driver.

Each node splits on one variable, builds both children by assignment plus
propagation, and tries to finish each child with a time- or conflict-bounded
CDCL rollout; children the rollout cannot decide are recursed into. A SAT
child short-circuits its sibling, and a global deadline turns unfinished
subtrees into UNKNOWN instead of blocking.
"""

from __future__ import annotations

import math
import random
import sys
import time
from dataclasses import dataclass, field, replace

from .cdcl import SolveResult, SolveStatus, SolverBudget, solve, verify_model
from .cnf import Assignment, CnfFormula, SimplifyStatus, assign_and_simplify
from .heuristics import HEURISTIC_IDS, choose_split
from .protocol import HeuristicSession, NodeAborted, TransportClosed

DEFAULT_TOTAL_SECONDS = 30 * 60.0
DEFAULT_ROLLOUT_SECONDS = 5.0


@dataclass(frozen=True)
class CncBudgets:
    """Wall-clock deadline for the whole run plus the per-rollout budget.

    `global_deadline` is a time.monotonic() instant; use `with_timeout` to
    build one relative to now. math.inf disables the deadline.
    """

    global_deadline: float
    rollout_budget: SolverBudget

    @classmethod
    def with_timeout(
        cls,
        total_seconds: float = DEFAULT_TOTAL_SECONDS,
        rollout_budget: SolverBudget | None = None,
    ) -> "CncBudgets":
        deadline = math.inf if math.isinf(total_seconds) else time.monotonic() + total_seconds
        if rollout_budget is None:
            rollout_budget = SolverBudget(max_wall_time=DEFAULT_ROLLOUT_SECONDS)
        if not rollout_budget.bounded:
            raise ValueError("rollout budget must set at least one bound")
        return cls(global_deadline=deadline, rollout_budget=rollout_budget)


@dataclass
class CncStats:
    """Outcome and accounting for one run (or one subtree during recursion)."""

    sat_status: SolveStatus
    cubing_decisions: int = 0
    decision_time: float = 0.0
    conquer_time: float = 0.0
    rollouts: int = 0
    aborted_nodes: int = 0
    first_cube_variable: int | None = None
    first_cube_literal: int | None = None
    max_depth: int = 0
    model: Assignment | None = None


def combine(stats_1: CncStats, stats_2: CncStats) -> CncStats:
    """Merge sibling subtree results.

    SAT wins if either side found a model; UNSAT needs both sides refuted
    (an unexplored branch may still hide a model); counters add up and depth
    grows by the one splitting level between parent and children.
    """
    if stats_1.sat_status is SolveStatus.SAT or stats_2.sat_status is SolveStatus.SAT:
        status = SolveStatus.SAT
    elif stats_1.sat_status is SolveStatus.UNSAT and stats_2.sat_status is SolveStatus.UNSAT:
        status = SolveStatus.UNSAT
    else:
        status = SolveStatus.UNKNOWN
    model = stats_1.model if stats_1.sat_status is SolveStatus.SAT else stats_2.model
    return CncStats(
        sat_status=status,
        cubing_decisions=stats_1.cubing_decisions + stats_2.cubing_decisions,
        decision_time=stats_1.decision_time + stats_2.decision_time,
        conquer_time=stats_1.conquer_time + stats_2.conquer_time,
        rollouts=stats_1.rollouts + stats_2.rollouts,
        aborted_nodes=stats_1.aborted_nodes + stats_2.aborted_nodes,
        first_cube_variable=None,
        first_cube_literal=None,
        max_depth=max(stats_1.max_depth, stats_2.max_depth) + 1,
        model=model,
    )


def rollout(formula: CnfFormula, budget: SolverBudget) -> SolveResult:
    """One bounded CDCL attempt on a node's formula."""
    return solve(formula, budget)


def cube_and_conquer(
    formula: CnfFormula,
    heuristic: str | HeuristicSession,
    budgets: CncBudgets | None = None,
    rng_seed: int = 0,
) -> CncStats:
    """Run the full recursive procedure on `formula`.

    `heuristic` is a symbolic heuristic name or an external session. SAT
    results carry a model verified against the input formula; a dead session
    or an abandoned node degrades the affected subtree to UNKNOWN.
    """
    if isinstance(heuristic, str) and heuristic not in HEURISTIC_IDS:
        raise ValueError(f"unknown heuristic {heuristic!r}")
    if budgets is None:
        budgets = CncBudgets.with_timeout()
    run = _CncRun(heuristic, budgets, random.Random(rng_seed), max_split_depth=formula.num_vars)

    # recursion needs a few frames per splitting level
    wanted = 4 * max(formula.num_vars, 64) + 1000
    old_limit = sys.getrecursionlimit()
    if wanted > old_limit:
        sys.setrecursionlimit(wanted)
    try:
        stats = run.node(formula)
    finally:
        if wanted > old_limit:
            sys.setrecursionlimit(old_limit)

    if stats.sat_status is SolveStatus.SAT:
        model = dict(stats.model or {})
        for var in range(1, formula.num_vars + 1):
            model.setdefault(var, False)
        assert verify_model(formula, model), "SAT result failed model verification"
        stats.model = model
    return stats


class _CncRun:
    def __init__(
        self,
        heuristic: str | HeuristicSession,
        budgets: CncBudgets,
        rng: random.Random,
        max_split_depth: int,
    ) -> None:
        self.heuristic = heuristic
        self.budgets = budgets
        self.rng = rng
        self.session_dead = False
        self.max_split_depth = max_split_depth

    def deadline_passed(self) -> bool:
        return time.monotonic() >= self.budgets.global_deadline

    def node(self, formula: CnfFormula, depth: int = 0) -> CncStats:
        if self.deadline_passed():
            return CncStats(sat_status=SolveStatus.UNKNOWN)
        if depth > self.max_split_depth:
            # only wasted splits (variables absent from every clause) can
            # outnumber the variables; stop instead of recursing forever
            return CncStats(sat_status=SolveStatus.UNKNOWN)
        if not formula.clauses:
            return CncStats(sat_status=SolveStatus.SAT, model={})
        if any(len(c) == 0 for c in formula.clauses):
            return CncStats(sat_status=SolveStatus.UNSAT)

        started = time.monotonic()
        split = self._choose(formula)
        decision_time = time.monotonic() - started
        if split is None:
            return CncStats(
                sat_status=SolveStatus.UNKNOWN,
                decision_time=decision_time,
                aborted_nodes=1,
            )
        variable, answered_first = split

        child_pos = assign_and_simplify(formula, variable)
        child_neg = assign_and_simplify(formula, -variable)

        stats_1 = self._child(child_pos, depth)
        if self.deadline_passed() and stats_1.sat_status is not SolveStatus.SAT:
            node_stats = replace(
                stats_1,
                sat_status=SolveStatus.UNKNOWN,
                max_depth=stats_1.max_depth + 1,
                model=None,
            )
        else:
            if stats_1.sat_status is SolveStatus.SAT:
                stats_2 = CncStats(sat_status=SolveStatus.UNKNOWN)  # sibling skipped
            else:
                stats_2 = self._child(child_neg, depth)
            node_stats = combine(stats_1, stats_2)
        node_stats.cubing_decisions += 1
        node_stats.decision_time += decision_time
        node_stats.first_cube_variable = variable
        node_stats.first_cube_literal = answered_first
        return node_stats

    def _choose(self, formula: CnfFormula) -> tuple[int, int] | None:
        """Returns (variable, answered first literal), or None when the node
        must be abandoned."""
        if isinstance(self.heuristic, str):
            variable = choose_split(formula, self.heuristic, rng_seed=self.rng.getrandbits(32))
            return variable, variable
        if self.session_dead:
            return None
        try:
            answer = self.heuristic.request_cube(formula)
        except TransportClosed:
            self.session_dead = True
            return None
        if isinstance(answer, NodeAborted):
            return None
        return answer.variable, answer.first

    def _child(self, outcome, depth: int) -> CncStats:
        # children come in positive-literal-first order; outcome.forced holds
        # the decision plus everything propagation pinned down
        if outcome.status is SimplifyStatus.CONFLICT_FOUND:
            return CncStats(sat_status=SolveStatus.UNSAT)
        if outcome.status is SimplifyStatus.SATISFIED_ALL:
            return CncStats(sat_status=SolveStatus.SAT, model=dict(outcome.forced))
        if self.deadline_passed():
            return CncStats(sat_status=SolveStatus.UNKNOWN)

        result = rollout(outcome.reduced, self.budgets.rollout_budget)
        if result.status is SolveStatus.SAT:
            model = dict(result.model or {})
            model.update(outcome.forced)
            return CncStats(
                sat_status=SolveStatus.SAT,
                conquer_time=result.stats.elapsed,
                rollouts=1,
                model=model,
            )
        if result.status is SolveStatus.UNSAT:
            return CncStats(
                sat_status=SolveStatus.UNSAT,
                conquer_time=result.stats.elapsed,
                rollouts=1,
            )

        sub = self.node(outcome.reduced, depth + 1)
        sub.rollouts += 1
        sub.conquer_time += result.stats.elapsed
        if sub.sat_status is SolveStatus.SAT and sub.model is not None:
            sub.model = {**sub.model, **outcome.forced}
        sub.first_cube_variable = None
        sub.first_cube_literal = None
        return sub
