"""Walk through the CNF layer: parse a DIMACS formula, inspect occurrence
counts, and watch what a single splitting decision does to it."""

from cubekit import assign_and_simplify, occurrence_count, parse_dimacs, serialize_dimacs

TEXT = """\
c a small demonstration formula
p cnf 4 5
1 2 0
-1 3 0
-3 -2 0
2 3 4 0
-4 1 0
"""

formula = parse_dimacs(TEXT)
print(f"parsed {formula.num_clauses} clauses over {formula.num_vars} variables")
print("occurrences of 1 /-1:", occurrence_count(formula, 1), "/", occurrence_count(formula, -1))

# decide variable 1 positively: satisfied clauses vanish, falsified literals
# shrink their clauses, and anything reduced to a unit keeps propagating
outcome = assign_and_simplify(formula, 1)
print("\nafter deciding 1:")
print("  status:             ", outcome.status.name)
print("  units propagated:   ", outcome.units_propagated)
print("  clauses eliminated: ", outcome.clauses_eliminated)
print("  forced assignments: ", outcome.forced)
print("  remaining formula:")
print(serialize_dimacs(outcome.reduced))

outcome = assign_and_simplify(formula, -1)
print("after deciding -1 instead:")
print("  status:             ", outcome.status.name)
print("  forced assignments: ", outcome.forced)
