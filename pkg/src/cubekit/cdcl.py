"""A small conflict-driven clause-learning solver.

Built for bounded rollouts inside cube-and-conquer and tree search rather
than competition use: two-watched-literal propagation, first-UIP learning
with non-chronological backjumping, activity-based branching with phase
saving, and Luby restarts. Branching is fully deterministic, so a run with
conflict/decision budgets is reproducible.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Optional

from .cnf import Assignment, CnfFormula

ACTIVITY_DECAY = 0.95
RESTART_BASE = 100
ACTIVITY_RESCALE = 1e100


@dataclass(frozen=True)
class SolverBudget:
    """Stop conditions; any unset bound is unlimited."""

    max_wall_time: float | None = None
    max_conflicts: int | None = None
    max_decisions: int | None = None

    def __post_init__(self) -> None:
        for name in ("max_wall_time", "max_conflicts", "max_decisions"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive when set")

    @property
    def bounded(self) -> bool:
        return any(
            v is not None for v in (self.max_wall_time, self.max_conflicts, self.max_decisions)
        )


@dataclass
class SolverStats:
    decisions: int = 0
    conflicts: int = 0
    propagations: int = 0
    restarts: int = 0
    elapsed: float = 0.0


class SolveStatus(Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"


@dataclass
class SolveResult:
    status: SolveStatus
    model: Assignment | None
    stats: SolverStats
    learned_clauses: tuple[tuple[int, ...], ...] | None = None


def verify_model(formula: CnfFormula, model: Assignment) -> bool:
    """True iff every clause contains at least one literal satisfied by `model`."""
    for clause in formula.clauses:
        for lit in clause:
            value = model.get(abs(lit))
            if value is not None and value == (lit > 0):
                break
        else:
            return False
    return True


def solve(
    formula: CnfFormula,
    budget: SolverBudget | None = None,
    *,
    clause_reduction: bool = False,
    record_learned: bool = False,
    trace: IO[str] | None = None,
) -> SolveResult:
    """Decide `formula` within `budget`.

    SAT results carry a model that assigns every variable occurring in a
    clause; UNSAT means the search space was exhausted; UNKNOWN means a
    budget ran out first. `clause_reduction` enables a geometric learned-
    clause cleanup schedule (off by default).
    """
    solver = _Solver(formula, budget or SolverBudget(), clause_reduction, trace)
    status, model = solver.run()
    solver.stats.elapsed = time.monotonic() - solver.start
    learned = tuple(tuple(c) for c in solver.learned) if record_learned else None
    return SolveResult(status=status, model=model, stats=solver.stats, learned_clauses=learned)


def luby(index: int) -> int:
    """Luby restart sequence 1,1,2,1,1,2,4,... (0-based index)."""
    size, seq = 1, 0
    while size < index + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != index:
        size = (size - 1) // 2
        seq -= 1
        index %= size
    return 2**seq


class _Solver:
    def __init__(
        self,
        formula: CnfFormula,
        budget: SolverBudget,
        clause_reduction: bool,
        trace: IO[str] | None,
    ) -> None:
        self.budget = budget
        self.trace = trace
        self.clause_reduction = clause_reduction
        self.start = time.monotonic()
        self.stats = SolverStats()

        self.variables = list(formula.variables)
        self.assigns: dict[int, bool] = {}
        self.level: dict[int, int] = {}
        self.reason: dict[int, Optional[list[int]]] = {}
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0

        self.activity: dict[int, float] = {v: 0.0 for v in self.variables}
        self.phase: dict[int, bool] = {v: False for v in self.variables}
        self.var_inc = 1.0
        self.order: list[tuple[float, int]] = [(0.0, v) for v in self.variables]
        heapq.heapify(self.order)

        self.watches: dict[int, list[list[int]]] = {}
        self.clauses: list[list[int]] = []
        self.learned: list[list[int]] = []
        self.units: list[int] = []
        self.empty_clause = False
        for clause in formula.clauses:
            lits = list(clause)
            if not lits:
                self.empty_clause = True
            elif len(lits) == 1:
                self.units.append(lits[0])
            else:
                self.clauses.append(lits)
                self._watch(lits)

        self.reduce_limit = 1000

    # -- assignment plumbing -------------------------------------------------

    def _watch(self, clause: list[int]) -> None:
        self.watches.setdefault(clause[0], []).append(clause)
        self.watches.setdefault(clause[1], []).append(clause)

    def value(self, lit: int) -> bool | None:
        assigned = self.assigns.get(abs(lit))
        if assigned is None:
            return None
        return assigned == (lit > 0)

    def current_level(self) -> int:
        return len(self.trail_lim)

    def enqueue(self, lit: int, reason: Optional[list[int]]) -> None:
        var = abs(lit)
        self.assigns[var] = lit > 0
        self.phase[var] = lit > 0
        self.level[var] = self.current_level()
        self.reason[var] = reason
        self.trail.append(lit)
        if reason is not None:
            self.stats.propagations += 1

    def backtrack(self, target_level: int) -> None:
        while self.current_level() > target_level:
            mark = self.trail_lim.pop()
            for lit in self.trail[mark:]:
                var = abs(lit)
                del self.assigns[var]
                del self.level[var]
                self.reason.pop(var, None)
                heapq.heappush(self.order, (-self.activity[var], var))
            del self.trail[mark:]
        self.qhead = len(self.trail)

    def bump(self, var: int) -> None:
        self.activity[var] += self.var_inc
        if self.activity[var] > ACTIVITY_RESCALE:
            for v in self.activity:
                self.activity[v] *= 1.0 / ACTIVITY_RESCALE
            self.var_inc *= 1.0 / ACTIVITY_RESCALE
            self.order = [(-self.activity[v], v) for v in self.variables if v not in self.assigns]
            heapq.heapify(self.order)
            return
        heapq.heappush(self.order, (-self.activity[var], var))

    def pick_branch_var(self) -> int | None:
        while self.order:
            neg_act, var = heapq.heappop(self.order)
            if var not in self.assigns and self.activity[var] == -neg_act:
                return var
        return None

    # -- propagation and conflict analysis ------------------------------------

    def propagate(self) -> list[int] | None:
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            watchers = self.watches.get(-p)
            if not watchers:
                continue
            i = j = 0
            conflict: list[int] | None = None
            while i < len(watchers):
                clause = watchers[i]
                i += 1
                if clause[0] == -p:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                if self.value(first) is True:
                    watchers[j] = clause
                    j += 1
                    continue
                for k in range(2, len(clause)):
                    if self.value(clause[k]) is not False:
                        clause[1], clause[k] = clause[k], clause[1]
                        self.watches.setdefault(clause[1], []).append(clause)
                        break
                else:
                    watchers[j] = clause
                    j += 1
                    if self.value(first) is False:
                        conflict = clause
                        while i < len(watchers):
                            watchers[j] = watchers[i]
                            j += 1
                            i += 1
                        self.qhead = len(self.trail)
                    else:
                        self.enqueue(first, clause)
            del watchers[j:]
            if conflict is not None:
                return conflict
        return None

    def analyze(self, conflict: list[int]) -> tuple[list[int], int]:
        """First-UIP learning; returns (learned clause, backjump level).

        The asserting literal ends up at position 0 and the highest-level
        remaining literal at position 1 so the clause can be watched directly.
        """
        learned: list[int] = []
        seen: set[int] = set()
        path_count = 0
        p: int | None = None
        idx = len(self.trail) - 1
        clause = conflict
        while True:
            lits = clause if p is None else clause[1:]
            for q in lits:
                var = abs(q)
                if var in seen or self.level[var] == 0:
                    continue
                seen.add(var)
                self.bump(var)
                if self.level[var] >= self.current_level():
                    path_count += 1
                else:
                    learned.append(q)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            seen.discard(abs(p))
            path_count -= 1
            if path_count == 0:
                break
            clause = self.reason[abs(p)]  # type: ignore[assignment]
        learned.insert(0, -p)
        if len(learned) == 1:
            return learned, 0
        # place the literal with the highest level second, for watching
        best = max(range(1, len(learned)), key=lambda i: self.level[abs(learned[i])])
        learned[1], learned[best] = learned[best], learned[1]
        return learned, self.level[abs(learned[1])]

    def reduce_learned(self) -> None:
        locked = {id(self.reason[abs(lit)]) for lit in self.trail if self.reason.get(abs(lit))}
        keep_always = [c for c in self.learned if len(c) <= 2 or id(c) in locked]
        candidates = [c for c in self.learned if not (len(c) <= 2 or id(c) in locked)]
        candidates.sort(key=len)
        kept = keep_always + candidates[: len(candidates) // 2]
        dropped = {id(c) for c in self.learned} - {id(c) for c in kept}
        self.learned = kept
        for watchers in self.watches.values():
            watchers[:] = [c for c in watchers if id(c) not in dropped]

    # -- main loop -------------------------------------------------------------

    def out_of_budget(self) -> bool:
        b = self.budget
        if b.max_conflicts is not None and self.stats.conflicts >= b.max_conflicts:
            return True
        if b.max_decisions is not None and self.stats.decisions >= b.max_decisions:
            return True
        if b.max_wall_time is not None and time.monotonic() - self.start >= b.max_wall_time:
            return True
        return False

    def run(self) -> tuple[SolveStatus, Assignment | None]:
        if self.empty_clause:
            return SolveStatus.UNSAT, None
        for lit in self.units:
            value = self.value(lit)
            if value is False:
                self.stats.conflicts += 1
                return SolveStatus.UNSAT, None
            if value is None:
                self.enqueue(lit, None)
        if self.propagate() is not None:
            self.stats.conflicts += 1
            return SolveStatus.UNSAT, None

        conflicts_at_restart = 0
        restart_limit = luby(0) * RESTART_BASE
        while True:
            conflict = self.propagate()
            if conflict is not None:
                self.stats.conflicts += 1
                conflicts_at_restart += 1
                if self.trace:
                    self.trace.write(f"conflict {self.stats.conflicts}\n")
                if self.current_level() == 0:
                    return SolveStatus.UNSAT, None
                learned, back_level = self.analyze(conflict)
                self.backtrack(back_level)
                if len(learned) == 1:
                    self.enqueue(learned[0], None)
                else:
                    self.learned.append(learned)
                    self._watch(learned)
                    self.enqueue(learned[0], learned)
                self.var_inc /= ACTIVITY_DECAY
                if self.clause_reduction and len(self.learned) > self.reduce_limit:
                    self.reduce_learned()
                    self.reduce_limit = int(self.reduce_limit * 1.5)
                if self.out_of_budget():
                    return SolveStatus.UNKNOWN, None
                continue

            if conflicts_at_restart >= restart_limit:
                self.stats.restarts += 1
                conflicts_at_restart = 0
                restart_limit = luby(self.stats.restarts) * RESTART_BASE
                self.backtrack(0)
                continue

            if self.out_of_budget():
                return SolveStatus.UNKNOWN, None
            var = self.pick_branch_var()
            if var is None:
                return SolveStatus.SAT, dict(self.assigns)
            self.stats.decisions += 1
            lit = var if self.phase[var] else -var
            if self.trace:
                self.trace.write(f"decide {lit}\n")
            self.trail_lim.append(len(self.trail))
            self.enqueue(lit, None)
