"""Ludeme-based game modelling and analysis toolkit.

Parse rule descriptions into ludeme trees, compile and play them with
search agents, score how well they play, reconstruct plausible complete
rule sets from partial ones, and relate games through genotype distances
and phylogenetic trees.
"""

from .grammar import (
    ArgSet,
    Hole,
    LudemeNode,
    LudemeTree,
    NamedArg,
    ParseError,
    PlayerRef,
    hole_count,
    node_count,
    parse,
    to_text,
)
from .catalog import Catalog, ValidationReport, v1_catalog, validate
from .engine import (
    CompileError,
    GameModel,
    GameState,
    IllegalMoveError,
    Move,
    Outcome,
    Trial,
    apply_move,
    compile_game,
    initial_state,
    legal_moves,
    playout,
)
from .agents import AgentConfig, SearchStats, derive_seed, make_agent, matchup, select_move
from .metrics import (
    AnalysisJob,
    MetricsReport,
    MetricThresholds,
    MetricWeights,
    compute_metrics,
    quality_score,
    run_analysis,
)
from .reconstruct import (
    CandidateRuleSet,
    PlausibilityPrior,
    PlayabilityThresholds,
    RankedCandidates,
    enumerate_completions,
    playability_filter,
    reconstruct_rank,
)
from .phylo import (
    DistanceMatrix,
    PhyloTree,
    distance_matrix,
    genotype_distance,
    neighbor_joining,
    parse_newick,
    to_newick,
)
from .classify import ClassLabel, FeatureVector, assign_class, extract_features
from .corpus import CorpusGame, load_corpus

__version__ = "0.1.0"

__all__ = [
    "AgentConfig",
    "AnalysisJob",
    "ArgSet",
    "CandidateRuleSet",
    "Catalog",
    "ClassLabel",
    "CompileError",
    "CorpusGame",
    "DistanceMatrix",
    "FeatureVector",
    "GameModel",
    "GameState",
    "Hole",
    "IllegalMoveError",
    "LudemeNode",
    "LudemeTree",
    "MetricThresholds",
    "MetricWeights",
    "MetricsReport",
    "Move",
    "NamedArg",
    "Outcome",
    "ParseError",
    "PhyloTree",
    "PlausibilityPrior",
    "PlayabilityThresholds",
    "PlayerRef",
    "RankedCandidates",
    "SearchStats",
    "Trial",
    "ValidationReport",
    "apply_move",
    "assign_class",
    "compile_game",
    "compute_metrics",
    "derive_seed",
    "distance_matrix",
    "enumerate_completions",
    "extract_features",
    "genotype_distance",
    "hole_count",
    "initial_state",
    "legal_moves",
    "load_corpus",
    "make_agent",
    "matchup",
    "neighbor_joining",
    "node_count",
    "parse",
    "parse_newick",
    "playability_filter",
    "playout",
    "quality_score",
    "reconstruct_rank",
    "run_analysis",
    "select_move",
    "to_newick",
    "to_text",
    "v1_catalog",
    "validate",
]
