"""Monte Carlo tree search over cubing decisions.

Nodes hold reduced formulas; expansion proposes up to six candidate variables
(one per symbolic heuristic, padded with random clause-occurring variables)
and creates both polarity children per candidate. Every child is evaluated
once at creation: simplification counters plus a bounded CDCL rollout feed a
log-ratio reward in (0, 1], and later simulations reuse that stored value.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field

from .cdcl import SolverBudget, SolveStatus, solve
from .cnf import CnfFormula, SimplifyStatus, assign_and_simplify, parse_dimacs, serialize_dimacs
from .heuristics import CANDIDATE_HEURISTICS, choose_split

DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class RewardInputs:
    """Counters behind one reward evaluation: simplification gains
    (propagated units, eliminated clauses) against rollout effort
    (decisions, conflicts)."""

    units_propagated: int
    clauses_eliminated: int
    decisions: int
    conflicts: int

    def __post_init__(self) -> None:
        for name in ("units_propagated", "clauses_eliminated", "decisions", "conflicts"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def reward(inputs: RewardInputs, epsilon: float = DEFAULT_EPSILON) -> float:
    """Bounded log-ratio reward.

    Equals 1 exactly when the rollout needed no decisions and hit no
    conflicts, and decays toward 0 as rollout effort dwarfs the
    simplification gain. epsilon keeps both logarithms positive when every
    counter is zero.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    gain = 1.0 + epsilon + inputs.units_propagated + inputs.clauses_eliminated
    total = gain + inputs.decisions + inputs.conflicts
    return math.log(gain) / math.log(total)


def reward_variant(
    kind: str,
    inputs: RewardInputs,
    elapsed: float = 0.0,
    alpha: float = 1.0,
    beta: float = 1.0,
) -> float:
    """Alternative reward shapes kept for ablations: 'additive' (unbounded
    linear), 'multiplicative' (ratio of counts), 'time' (inverse solve time).
    None of them is used by default."""
    gain = inputs.units_propagated + inputs.clauses_eliminated
    effort = inputs.decisions + inputs.conflicts
    if kind == "additive":
        if alpha <= 0 or beta <= 0:
            raise ValueError("additive weights must be positive")
        return alpha * gain - beta * effort
    if kind == "multiplicative":
        return (gain + 1.0) / (effort + 1.0)
    if kind == "time":
        if elapsed < 0:
            raise ValueError("elapsed must be non-negative")
        return 1.0 / (1.0 + elapsed)
    raise ValueError(f"unknown reward variant {kind!r}")


@dataclass(frozen=True)
class MctsConfig:
    exploration_c: float = 2.0
    epsilon: float = DEFAULT_EPSILON
    candidates_per_node: int = 6
    rollout_budget: SolverBudget = field(
        default_factory=lambda: SolverBudget(max_wall_time=1.0)
    )
    iterations: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.exploration_c <= 0:
            raise ValueError("exploration_c must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.candidates_per_node < 1:
            raise ValueError("candidates_per_node must be >= 1")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")


@dataclass
class MctsNode:
    formula: CnfFormula
    applied_literal: int | None = None
    stats: RewardInputs | None = None
    reward: float | None = None
    visits: int = 0
    value_sum: float = 0.0
    terminal: bool = False
    children: list["MctsNode"] = field(default_factory=list)


@dataclass
class MctsTree:
    root: MctsNode
    config: MctsConfig
    cnf_id: str = "cnf"
    iterations_run: int = 0


class NothingToExpand(ValueError):
    pass


def expand(node: MctsNode, config: MctsConfig, rng: random.Random) -> list[MctsNode]:
    """Create and evaluate this node's children.

    Candidates are the deduplicated picks of the symbolic heuristics, padded
    with distinct random clause-occurring variables up to the configured
    count. Each candidate contributes a positive and a negative child, both
    rolled out immediately so their rewards exist before any selection.
    """
    if node.terminal:
        raise NothingToExpand("node is terminal")
    available = node.formula.variables
    if not available:
        raise NothingToExpand("formula has no clause-occurring variable")

    candidates: list[int] = []
    for heuristic in CANDIDATE_HEURISTICS:
        pick = choose_split(node.formula, heuristic)
        if pick not in candidates:
            candidates.append(pick)
        if len(candidates) >= config.candidates_per_node:
            break
    remaining = [v for v in available if v not in candidates]
    while len(candidates) < config.candidates_per_node and remaining:
        pick = remaining.pop(rng.randrange(len(remaining)))
        candidates.append(pick)

    children: list[MctsNode] = []
    for variable in candidates:
        for literal in (variable, -variable):
            children.append(_make_child(node.formula, literal, config))
    node.children = children
    return children


def _make_child(formula: CnfFormula, literal: int, config: MctsConfig) -> MctsNode:
    outcome = assign_and_simplify(formula, literal)
    if outcome.status is not SimplifyStatus.REDUCED:
        stats = RewardInputs(outcome.units_propagated, outcome.clauses_eliminated, 0, 0)
        terminal = True
    else:
        result = solve(outcome.reduced, config.rollout_budget)
        stats = RewardInputs(
            outcome.units_propagated,
            outcome.clauses_eliminated,
            result.stats.decisions,
            result.stats.conflicts,
        )
        terminal = result.status is not SolveStatus.UNKNOWN
    return MctsNode(
        formula=outcome.reduced,
        applied_literal=literal,
        stats=stats,
        reward=reward(stats, config.epsilon),
        terminal=terminal,
    )


def _uct(child: MctsNode, parent_visits: int, exploration_c: float) -> float:
    return child.value_sum / child.visits + exploration_c * math.sqrt(
        math.log(parent_visits) / child.visits
    )


def best_child(node: MctsNode, exploration_c: float) -> MctsNode:
    """UCT argmax; unvisited children outrank all visited ones, and ties
    resolve to creation order."""
    for child in node.children:
        if child.visits == 0:
            return child
    best = node.children[0]
    best_score = _uct(best, node.visits, exploration_c)
    for child in node.children[1:]:
        score = _uct(child, node.visits, exploration_c)
        if score > best_score:
            best, best_score = child, score
    return best


def select_leaf(tree: MctsTree) -> list[MctsNode]:
    """Walk down by UCT from the root; stops at a childless or unvisited node."""
    path = [tree.root]
    node = tree.root
    while node.children and node.visits > 0:
        node = best_child(node, tree.config.exploration_c)
        path.append(node)
        if node.visits == 0:
            break
    return path


def backpropagate(path: list[MctsNode], value: float) -> None:
    for node in path:
        node.visits += 1
        node.value_sum += value


def run_mcts(formula: CnfFormula, config: MctsConfig, cnf_id: str = "cnf") -> MctsTree:
    """Run the configured number of iterations and return the search tree.

    Per iteration: select a leaf, expand it on first visit, reuse the
    selected node's stored reward as the simulation value, and push that
    value back up the path. Deterministic for a fixed seed under
    conflict-bounded rollouts.
    """
    rng = random.Random(config.seed)
    root = MctsNode(formula=formula)
    if not formula.clauses:
        # an already-satisfied root: nothing to split, perfect reward
        root.terminal = True
        root.stats = RewardInputs(0, 0, 0, 0)
        root.reward = reward(root.stats, config.epsilon)
    tree = MctsTree(root=root, config=config, cnf_id=cnf_id)

    for _ in range(config.iterations):
        path = select_leaf(tree)
        leaf = path[-1]
        if not leaf.terminal and not leaf.children:
            try:
                children = expand(leaf, config, rng)
            except NothingToExpand:
                leaf.terminal = True
                children = []
            if leaf.reward is None and children:
                # the root has no stored reward; simulate its first child
                leaf = children[0]
                path.append(leaf)
        backpropagate(path, leaf.reward if leaf.reward is not None else 0.0)
        tree.iterations_run += 1
    return tree


# -- serialization -----------------------------------------------------------


def formula_digest(formula: CnfFormula) -> str:
    return hashlib.sha256(serialize_dimacs(formula).encode("utf-8")).hexdigest()


def node_to_dict(node: MctsNode, *, is_root: bool, embed_formulas: bool) -> dict:
    data: dict = {
        "applied_literal": node.applied_literal,
        "stats": None
        if node.stats is None
        else {
            "units_propagated": node.stats.units_propagated,
            "clauses_eliminated": node.stats.clauses_eliminated,
            "decisions": node.stats.decisions,
            "conflicts": node.stats.conflicts,
        },
        "reward": node.reward,
        "visits": node.visits,
        "value_sum": node.value_sum,
        "terminal": node.terminal,
    }
    if is_root or embed_formulas:
        data["dimacs"] = serialize_dimacs(node.formula)
    else:
        data["formula_digest"] = formula_digest(node.formula)
    data["children"] = [
        node_to_dict(child, is_root=False, embed_formulas=embed_formulas)
        for child in node.children
    ]
    return data


def tree_to_dict(tree: MctsTree, *, embed_formulas: bool = False) -> dict:
    return {
        "format": "cubekit-mcts-tree",
        "cnf_id": tree.cnf_id,
        "iterations": tree.iterations_run,
        "seed": tree.config.seed,
        "exploration_c": tree.config.exploration_c,
        "epsilon": tree.config.epsilon,
        "embed_formulas": embed_formulas,
        "root": node_to_dict(tree.root, is_root=True, embed_formulas=embed_formulas),
    }


def tree_to_json(tree: MctsTree, *, embed_formulas: bool = False, indent: int | None = None) -> str:
    return json.dumps(tree_to_dict(tree, embed_formulas=embed_formulas), indent=indent)


def _node_from_dict(data: dict, formula: CnfFormula | None) -> MctsNode:
    if "dimacs" in data:
        formula = parse_dimacs(data["dimacs"])
    if formula is None:
        raise ValueError("tree was serialized without embedded formulas")
    stats = data.get("stats")
    node = MctsNode(
        formula=formula,
        applied_literal=data.get("applied_literal"),
        stats=None if stats is None else RewardInputs(**stats),
        reward=data.get("reward"),
        visits=data.get("visits", 0),
        value_sum=data.get("value_sum", 0.0),
        terminal=data.get("terminal", False),
    )
    node.children = [_node_from_dict(child, None) for child in data.get("children", [])]
    return node


def tree_from_dict(data: dict) -> MctsTree:
    """Rebuild a tree from its JSON form; requires embedded formulas so the
    dataset builder can reconstruct node prompts."""
    if not data.get("embed_formulas", False):
        raise ValueError("tree file lacks embedded formulas; regenerate with embedding enabled")
    config = MctsConfig(
        exploration_c=data.get("exploration_c", 2.0),
        epsilon=data.get("epsilon", DEFAULT_EPSILON),
        seed=data.get("seed", 0),
        iterations=data.get("iterations", 0),
    )
    root = _node_from_dict(data["root"], None)
    return MctsTree(
        root=root,
        config=config,
        cnf_id=data.get("cnf_id", "cnf"),
        iterations_run=data.get("iterations", 0),
    )
