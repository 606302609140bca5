"""CNF formulas: DIMACS parsing and serialization, literal occurrence counts,
and decision simplification with propagation/elimination accounting.

Literals are nonzero signed integers; the sign is the polarity and the
magnitude is the variable index. Formulas are immutable once built, so they
can be shared freely between concurrent runs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Sequence

Literal = int
Clause = tuple[int, ...]
Assignment = dict[int, bool]


class DimacsError(ValueError):
    """Malformed DIMACS CNF input."""


class MissingHeader(DimacsError):
    pass


class LiteralOutOfRange(DimacsError):
    pass


class UnterminatedClause(DimacsError):
    pass


class NonIntegerToken(DimacsError):
    pass


class DecisionOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class CnfFormula:
    """A clause database over variables 1..num_vars.

    Clause order and literal order within clauses are preserved. Clauses are
    stored as tuples; the occurrence index is derived lazily and always agrees
    with a recount from the clause list.
    """

    num_vars: int
    clauses: tuple[Clause, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        if self.num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        for clause in self.clauses:
            for lit in clause:
                if lit == 0:
                    raise ValueError("zero literal inside clause")
                if abs(lit) > self.num_vars:
                    raise LiteralOutOfRange(f"literal {lit} exceeds num_vars={self.num_vars}")

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @cached_property
    def occurrence_index(self) -> dict[int, int]:
        """Clause-membership count per literal (duplicates never occur after parse)."""
        index: dict[int, int] = {}
        for clause in self.clauses:
            for lit in clause:
                index[lit] = index.get(lit, 0) + 1
        return index

    @cached_property
    def variables(self) -> tuple[int, ...]:
        """Variables that occur in at least one clause, ascending."""
        seen = {abs(lit) for clause in self.clauses for lit in clause}
        return tuple(sorted(seen))


def occurrence_count(formula: CnfFormula, literal: Literal) -> int:
    """Number of clauses containing `literal` exactly."""
    if literal == 0 or abs(literal) > formula.num_vars:
        raise LiteralOutOfRange(f"literal {literal} out of range")
    return formula.occurrence_index.get(literal, 0)


@dataclass
class ParseReport:
    """Diagnostics collected while reading DIMACS input."""

    header_vars: int = 0
    header_clauses: int = 0
    tautologies_dropped: int = 0
    duplicate_literals_removed: int = 0


def parse_dimacs(text: str | bytes) -> CnfFormula:
    formula, _ = parse_dimacs_with_report(text)
    return formula


def parse_dimacs_with_report(text: str | bytes) -> tuple[CnfFormula, ParseReport]:
    """Parse DIMACS CNF: comment lines starting with 'c', one 'p cnf V C'
    header, then clauses as integers terminated by 0.

    Tautological clauses are dropped and duplicate literals within a clause
    are removed; both are counted in the report. The emitted clause count may
    therefore differ from the header count.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    report = ParseReport()
    num_vars: int | None = None
    clauses: list[Clause] = []
    current: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise MissingHeader("duplicate 'p' header line")
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise MissingHeader(f"bad header line: {line!r}")
            try:
                num_vars = int(parts[2])
                report.header_clauses = int(parts[3])
            except ValueError as exc:
                raise MissingHeader(f"non-integer counts in header: {line!r}") from exc
            report.header_vars = num_vars
            continue
        if num_vars is None:
            raise MissingHeader("clause data before 'p cnf' header")
        for token in line.split():
            try:
                lit = int(token)
            except ValueError as exc:
                raise NonIntegerToken(f"non-integer token {token!r}") from exc
            if lit == 0:
                _append_normalized(clauses, current, report)
                current = []
                continue
            if abs(lit) > num_vars:
                raise LiteralOutOfRange(f"literal {lit} exceeds header num_vars={num_vars}")
            current.append(lit)
    if current:
        raise UnterminatedClause("last clause not terminated by 0")
    if num_vars is None:
        raise MissingHeader("no 'p cnf' header found")
    return CnfFormula(num_vars, tuple(clauses)), report


def _append_normalized(clauses: list[Clause], lits: list[int], report: ParseReport) -> None:
    seen: set[int] = set()
    normalized: list[int] = []
    for lit in lits:
        if lit in seen:
            report.duplicate_literals_removed += 1
            continue
        if -lit in seen:
            # v together with -v: the clause never constrains anything
            report.tautologies_dropped += 1
            return
        seen.add(lit)
        normalized.append(lit)
    clauses.append(tuple(normalized))


def serialize_dimacs(formula: CnfFormula) -> str:
    """Render DIMACS text; header counts always match the emitted clauses."""
    lines = [f"p cnf {formula.num_vars} {formula.num_clauses}"]
    for clause in formula.clauses:
        body = " ".join(str(lit) for lit in clause)
        lines.append(f"{body} 0" if body else "0")
    return "\n".join(lines) + "\n"


class SimplifyStatus(Enum):
    REDUCED = "reduced"
    SATISFIED_ALL = "satisfied_all"
    CONFLICT_FOUND = "conflict_found"


@dataclass
class SimplifyOutcome:
    """Result of assigning a decision literal and propagating to fixpoint.

    `units_propagated` counts forced assignments beyond the decision itself;
    `clauses_eliminated` counts clauses removed because a literal in them
    became satisfied.
    """

    reduced: CnfFormula
    units_propagated: int
    clauses_eliminated: int
    forced: Assignment
    status: SimplifyStatus


def assign_and_simplify(formula: CnfFormula, decision: Literal) -> SimplifyOutcome:
    """Assign `decision`, then repeat until fixpoint: drop satisfied clauses,
    delete falsified literals, and propagate any clause that shrinks to a
    single literal.

    Deciding a variable that occurs in no clause is legal and leaves the
    formula untouched. A clause shrinking to empty stops the propagation with
    CONFLICT_FOUND; counters reflect the work done up to that point.
    """
    if decision == 0 or abs(decision) > formula.num_vars:
        raise DecisionOutOfRange(f"decision {decision} out of range")

    forced: Assignment = {abs(decision): decision > 0}
    queue: deque[int] = deque([decision])
    clauses: list[tuple[int, ...]] = list(formula.clauses)
    units = 0
    eliminated = 0
    conflict = False

    while queue and not conflict:
        lit = queue.popleft()
        next_clauses: list[tuple[int, ...]] = []
        for pos, clause in enumerate(clauses):
            if lit in clause:
                eliminated += 1
                continue
            if -lit not in clause:
                next_clauses.append(clause)
                continue
            reduced = tuple(x for x in clause if x != -lit)
            next_clauses.append(reduced)
            if not reduced:
                conflict = True
                # keep the untouched remainder so the partial state is honest
                next_clauses.extend(clauses[pos + 1 :])
                break
            if len(reduced) == 1:
                unit = reduced[0]
                var = abs(unit)
                if var not in forced:
                    forced[var] = unit > 0
                    units += 1
                    queue.append(unit)
        clauses = next_clauses

    if conflict:
        status = SimplifyStatus.CONFLICT_FOUND
    elif clauses:
        status = SimplifyStatus.REDUCED
    else:
        status = SimplifyStatus.SATISFIED_ALL
    return SimplifyOutcome(
        reduced=CnfFormula(formula.num_vars, tuple(clauses)),
        units_propagated=units,
        clauses_eliminated=eliminated,
        forced=forced,
        status=status,
    )
