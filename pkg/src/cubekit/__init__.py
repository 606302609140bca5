"""Cube-and-conquer SAT experimentation toolkit."""

from .cdcl import (
    SolveResult,
    SolverBudget,
    SolverStats,
    SolveStatus,
    solve,
    verify_model,
)
from .cnc import CncBudgets, CncStats, combine, cube_and_conquer, rollout
from .cnf import (
    Assignment,
    CnfFormula,
    SimplifyOutcome,
    SimplifyStatus,
    assign_and_simplify,
    occurrence_count,
    parse_dimacs,
    parse_dimacs_with_report,
    serialize_dimacs,
)
from .dataset import (
    PairScore,
    PreferenceRecord,
    extract_preferences,
    filter_by_budget,
    render_jsonl,
    score_pair,
)
from .heuristics import HEURISTIC_IDS, choose_split, mix_diff
from .mcts import MctsConfig, MctsNode, MctsTree, RewardInputs, reward, reward_variant, run_mcts
from .protocol import (
    CubeAnswer,
    HeuristicSession,
    NodeAborted,
    PromptBundle,
    build_prompt,
    parse_answer,
    request_cube,
)
from .stats import (
    DiversityReport,
    RunMatrix,
    RunRecord,
    cohen_kappa,
    diversity,
    fleiss_kappa,
    freq_rank_percentile,
    paired_t_test,
    pass_at_k,
    pearson_r,
    per_run_summary,
    portfolio_gain,
)

__version__ = "0.1.0"
