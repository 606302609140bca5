"""Flatten search trees into preference records and JSONL exports.

Every expanded node contributes at most one record: its candidate variables
are scored by pairing the two polarity rewards, and the best/worst scoring
pairs become the chosen/rejected completions for the node's prompt. Reasoning
text comes from an optional external source, with a deterministic stub as the
fallback so exports are reproducible byte for byte.
"""

from __future__ import annotations

import json
import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .cnf import CnfFormula, parse_dimacs, serialize_dimacs
from .mcts import MctsNode, MctsTree
from .protocol import build_prompt, render_answer

ReasoningSource = Callable[[str, str], str]


class ReasoningSourceFailure(UserWarning):
    """External reasoning lookup failed; the stub text was used instead."""


@dataclass(frozen=True)
class PairScore:
    variable: int
    reward_pos: float
    reward_neg: float
    score: float


def score_pair(reward_pos: float, reward_neg: float) -> float:
    """Combine both branch rewards: product plus sum.

    The product term peaks for balanced pairs, the sum credits individually
    strong branches; with rewards in (0,1] the result lies in (0,3].
    """
    for value in (reward_pos, reward_neg):
        if not 0.0 < value <= 1.0:
            raise ValueError(f"branch reward {value} outside (0, 1]")
    # product and sum grouped separately so the value is exactly symmetric
    return reward_pos * reward_neg + (reward_pos + reward_neg)


@dataclass
class PreferenceRecord:
    prompt: str
    chosen: str
    rejected: str
    chosen_score: float
    rejected_score: float
    cnf_id: str
    node_path: list[int]
    # pair details kept for re-rendering with an external reasoning source;
    # not part of the serialized schema
    chosen_pair: PairScore | None = None
    rejected_pair: PairScore | None = None


def node_pair_scores(node: MctsNode) -> list[PairScore]:
    """Score every candidate variable of an expanded node from its two
    polarity children."""
    by_variable: dict[int, dict[int, float]] = {}
    for child in node.children:
        if child.applied_literal is None or child.reward is None:
            continue
        variable = abs(child.applied_literal)
        polarity = 1 if child.applied_literal > 0 else -1
        by_variable.setdefault(variable, {})[polarity] = child.reward
    pairs = []
    for variable in sorted(by_variable):
        rewards = by_variable[variable]
        if 1 not in rewards or -1 not in rewards:
            continue
        pairs.append(
            PairScore(
                variable=variable,
                reward_pos=rewards[1],
                reward_neg=rewards[-1],
                score=score_pair(rewards[1], rewards[-1]),
            )
        )
    return pairs


def stub_reasoning(pair: PairScore) -> str:
    """Deterministic placeholder reasoning for exports without an external
    source."""
    return (
        f"Splitting on variable {pair.variable} gives branch rewards "
        f"{pair.reward_pos:.6f} and {pair.reward_neg:.6f} "
        f"(pair score {pair.score:.6f})."
    )


def _render_decision(pair: PairScore, reasoning: str) -> str:
    return render_answer(reasoning, pair.variable, -pair.variable)


def extract_preferences(tree: MctsTree, *, chosen_takes_max: bool = True) -> list[PreferenceRecord]:
    """Breadth-first pass over expanded nodes, one record per node with at
    least two scored candidates.

    The maximum-score pair becomes `chosen` and the minimum-score pair
    `rejected` (ties to the lowest variable index); `chosen_takes_max=False`
    flips the orientation.
    """
    records: list[PreferenceRecord] = []
    queue: deque[tuple[MctsNode, list[int]]] = deque([(tree.root, [])])
    while queue:
        node, path = queue.popleft()
        for child in node.children:
            if child.applied_literal is not None:
                queue.append((child, path + [child.applied_literal]))
        if not node.children:
            continue
        pairs = node_pair_scores(node)
        if len(pairs) < 2:
            continue
        best = max(pairs, key=lambda p: (p.score, -p.variable))
        # the two ends must reference distinct variables even on full ties
        rest = [p for p in pairs if p.variable != best.variable]
        worst = min(rest, key=lambda p: (p.score, p.variable))
        chosen, rejected = (best, worst) if chosen_takes_max else (worst, best)
        bundle = build_prompt(node.formula)
        records.append(
            PreferenceRecord(
                prompt=bundle.system_text + "\n\n" + bundle.task_text,
                chosen=_render_decision(chosen, stub_reasoning(chosen)),
                rejected=_render_decision(rejected, stub_reasoning(rejected)),
                chosen_score=chosen.score,
                rejected_score=rejected.score,
                cnf_id=tree.cnf_id,
                node_path=path,
                chosen_pair=chosen,
                rejected_pair=rejected,
            )
        )
    return records


def prompt_units(text: str) -> int:
    """Prompt length in budget units: ceil(chars / 4), a tokenizer-free
    approximation."""
    return math.ceil(len(text) / 4)


def filter_by_budget(records: list[PreferenceRecord], max_prompt_units: int) -> list[PreferenceRecord]:
    if max_prompt_units <= 0:
        raise ValueError("max_prompt_units must be positive")
    return [r for r in records if prompt_units(r.prompt) <= max_prompt_units]


def prompt_formula(prompt: str) -> CnfFormula:
    """Recover the formula from a record prompt (the DIMACS body is the
    trailing part, starting at the last header line)."""
    marker = prompt.rfind("p cnf ")
    if marker < 0:
        raise ValueError("prompt contains no DIMACS header")
    return parse_dimacs(prompt[marker:])


def _record_json(record: PreferenceRecord) -> str:
    return json.dumps(
        {
            "prompt": record.prompt,
            "chosen": record.chosen,
            "rejected": record.rejected,
            "chosen_score": record.chosen_score,
            "rejected_score": record.rejected_score,
            "cnf_id": record.cnf_id,
            "node_path": record.node_path,
        }
    )


def render_jsonl(
    records: Iterable[PreferenceRecord],
    reasoning_source: ReasoningSource | None = None,
) -> str:
    """One JSON object per line. With a reasoning source, each decision's
    reasoning is requested from it (passing only the formula and the cube,
    never the chosen/rejected label); on failure the stub text stays and a
    warning is emitted."""
    lines = []
    for record in records:
        if reasoning_source is not None:
            record = _with_sourced_reasoning(record, reasoning_source)
        lines.append(_record_json(record))
    return "".join(line + "\n" for line in lines)


def _with_sourced_reasoning(record: PreferenceRecord, source: ReasoningSource) -> PreferenceRecord:
    if record.chosen_pair is None or record.rejected_pair is None:
        return record
    dimacs_text = serialize_dimacs(prompt_formula(record.prompt))
    updates: dict[str, str] = {}
    for label, pair in (("chosen", record.chosen_pair), ("rejected", record.rejected_pair)):
        cube_text = f"({pair.variable}, {-pair.variable})"
        try:
            reasoning = source(dimacs_text, cube_text).strip()
        except Exception as exc:  # the export must not die on a flaky source
            warnings.warn(
                f"reasoning source failed for {record.cnf_id} {cube_text}: {exc}",
                ReasoningSourceFailure,
            )
            continue
        updates[label] = _render_decision(pair, reasoning)
    return PreferenceRecord(
        prompt=record.prompt,
        chosen=updates.get("chosen", record.chosen),
        rejected=updates.get("rejected", record.rejected),
        chosen_score=record.chosen_score,
        rejected_score=record.rejected_score,
        cnf_id=record.cnf_id,
        node_path=record.node_path,
        chosen_pair=record.chosen_pair,
        rejected_pair=record.rejected_pair,
    )


def parse_jsonl(text: str) -> list[PreferenceRecord]:
    records = []
    for line in text.splitlines():
        if not line.strip():
            continue
        data = json.loads(line)
        records.append(
            PreferenceRecord(
                prompt=data["prompt"],
                chosen=data["chosen"],
                rejected=data["rejected"],
                chosen_score=data["chosen_score"],
                rejected_score=data["rejected_score"],
                cnf_id=data["cnf_id"],
                node_path=list(data["node_path"]),
            )
        )
    return records


def render_sft_jsonl(records: Iterable[PreferenceRecord]) -> str:
    """Supervised-tuning shaped export: prompt plus the chosen completion."""
    lines = [
        json.dumps({"prompt": r.prompt, "completion": r.chosen}) for r in records
    ]
    return "".join(line + "\n" for line in lines)
