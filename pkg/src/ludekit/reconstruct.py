"""Completion, playability filtering and ranking of partial games.

The workflow: enumerate the Cartesian product of every hole's options
(explicit options, else all catalog members of the hole's category),
discard candidates that fail static or probe-based playability checks,
run the full analysis job on the survivors, and rank by a geometric blend
of play quality and historical plausibility.  Unplayable candidates are
retained at the tail with their reason codes so an expert can see why
they fell out.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .agents import AgentConfig, derive_seed, matchup
from .catalog import Catalog, v1_catalog, validate
from .engine import CompileError, compile_game
from .grammar import (
    ArgSet,
    Hole,
    LudemeNode,
    LudemeTree,
    NamedArg,
    hole_count,
    iter_holes,
    to_text,
)
from .metrics import AnalysisJob, MetricsReport, quality_score, run_analysis

HARD_PRODUCT_CAP = 10**6


class EmptyOptionSetError(Exception):
    pass


class CombinatorialOverflowError(Exception):
    pass


# ---------------------------------------------------------------------------
# Priors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlausibilityPrior:
    """Per-keyword plausibility weights (> 0), default 1.0, with free-text
    provenance notes recorded per weight."""

    weights: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for kw, w in self.weights.items():
            if w <= 0:
                raise ValueError(f"prior weight for {kw!r} must be > 0")

    def weight_of(self, keyword: str) -> float:
        return float(self.weights.get(keyword, 1.0))


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HoleSpec:
    hole_id: str
    category: str
    options: tuple[LudemeNode, ...]


@dataclass(frozen=True)
class Completion:
    tree: LudemeTree
    choices: dict  # hole_id -> chosen LudemeNode


def hole_specs(partial: LudemeTree, catalog: Optional[Catalog] = None) -> list[HoleSpec]:
    catalog = catalog or v1_catalog()
    specs = []
    for i, hole in enumerate(iter_holes(partial)):
        options = hole.options
        if not options:
            options = tuple(catalog.default_node(sig) for sig in catalog.members(hole.category))
        if not options:
            raise EmptyOptionSetError(f"hole {i} of category {hole.category!r} has no options")
        specs.append(HoleSpec(f"{i}:{hole.category}", hole.category, options))
    return specs


def _substitute(tree: LudemeTree, assignment: list[LudemeNode]) -> LudemeTree:
    it = iter(assignment)

    def rebuild_arg(arg):
        if isinstance(arg, LudemeNode):
            return rebuild(arg)
        if isinstance(arg, Hole):
            return next(it)
        if isinstance(arg, NamedArg):
            return NamedArg(arg.name, rebuild_arg(arg.value))
        if isinstance(arg, ArgSet):
            return ArgSet(tuple(rebuild_arg(a) for a in arg.items))
        return arg

    def rebuild(node: LudemeNode) -> LudemeNode:
        return LudemeNode(node.keyword, tuple(rebuild_arg(a) for a in node.args), node.span)

    return LudemeTree(rebuild(tree.root))


def enumerate_completions(
    partial: LudemeTree,
    catalog: Optional[Catalog] = None,
    max_candidates: int = 10_000,
) -> tuple[list[Completion], list[str]]:
    """All hole completions in lexicographic hole order, plus warnings.

    Raises ``CombinatorialOverflowError`` when the full product exceeds the
    hard cap; truncates with a warning when it merely exceeds
    ``max_candidates``.
    """
    if hole_count(partial) < 1:
        raise ValueError("tree has no holes to complete")
    specs = hole_specs(partial, catalog)
    product_size = math.prod(len(s.options) for s in specs)
    if product_size > HARD_PRODUCT_CAP:
        raise CombinatorialOverflowError(
            f"completion space of {product_size} exceeds the hard cap {HARD_PRODUCT_CAP}"
        )
    warnings = []
    completions = []
    for combo in itertools.product(*(s.options for s in specs)):
        if len(completions) >= max_candidates:
            warnings.append(
                f"truncated to {max_candidates} of {product_size} completions"
            )
            break
        tree = _substitute(partial, list(combo))
        choices = {spec.hole_id: option for spec, option in zip(specs, combo)}
        completions.append(Completion(tree, choices))
    return completions, warnings


# ---------------------------------------------------------------------------
# Playability
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlayabilityThresholds:
    probe_trials: int = 200
    move_cap: int = 300
    min_completion: float = 0.95
    min_branching: float = 1.5
    min_decided_for_win_check: int = 20


def playability_filter(
    tree: LudemeTree,
    thresholds: PlayabilityThresholds = PlayabilityThresholds(),
    seed: int = 0,
    catalog: Optional[Catalog] = None,
) -> tuple[bool, list[str]]:
    """Static reachability plus a seeded random-probe batch.

    Reason codes: does-not-compile, unreachable goal, non-terminating,
    no-decisions, one-sided.
    """
    catalog = catalog or v1_catalog()
    report = validate(tree, catalog)
    if not report.is_complete:
        return False, ["does-not-compile: " + "; ".join(report.messages()[:3])]
    try:
        model = compile_game(tree, catalog)
    except CompileError as err:
        return False, [f"does-not-compile: {err.issues[0][0]}"]

    reasons: list[str] = []
    # Static: a bear-off goal is unreachable if a track never exits.
    if any(r.kind == "bearOffAll" for r in model.end_rules):
        for track in model.board.tracks:
            if track is not None and not track.has_off:
                reasons.append("unreachable goal")
                break

    config = AgentConfig("random")
    trials = matchup(
        model,
        config,
        config,
        thresholds.probe_trials,
        seed,
        swap_seats=True,
        move_cap=thresholds.move_cap,
    )
    completed = [t for t in trials if t.outcome.kind != "timeout"]
    completion_rate = len(completed) / len(trials)
    if completion_rate < thresholds.min_completion:
        reasons.append("non-terminating")
    plies = [b for t in trials for b in t.branching]
    mean_branching = sum(plies) / len(plies) if plies else 0.0
    if mean_branching <= thresholds.min_branching:
        reasons.append("no-decisions")
    wins1 = sum(1 for t in completed if t.outcome.winner == 1)
    wins2 = sum(1 for t in completed if t.outcome.winner == 2)
    if wins1 + wins2 >= thresholds.min_decided_for_win_check and (wins1 == 0 or wins2 == 0):
        reasons.append("one-sided")
    return (not reasons), reasons


# ---------------------------------------------------------------------------
# Ranking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CandidateRuleSet:
    text: str  # canonical completed rule text
    hole_choices: dict  # hole_id -> canonical option text
    playable: bool
    reasons: tuple[str, ...]
    report: Optional[MetricsReport]
    quality: float
    prior_score: float
    combined: float
    normalized: Optional[float] = None  # share of the playable distribution
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "holeChoices": dict(self.hole_choices),
            "playable": self.playable,
            "reasons": list(self.reasons),
            "qualityScore": self.quality,
            "priorScore": self.prior_score,
            "combinedScore": self.combined,
            "normalized": self.normalized,
            "flags": list(self.flags),
            "report": self.report.to_dict() if self.report else None,
        }


@dataclass(frozen=True)
class RankedCandidates:
    candidates: tuple[CandidateRuleSet, ...]
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "warnings": list(self.warnings),
            "candidates": [c.to_dict() for c in self.candidates],
        }

    def to_table(self) -> str:
        lines = ["rank  combined  quality   prior     playable  text"]
        for i, c in enumerate(self.candidates, 1):
            flagtext = ",".join(c.flags + c.reasons) or "-"
            lines.append(
                f"{i:<5d} {c.combined:<9.4f} {c.quality:<9.4f} {c.prior_score:<9.4f} "
                f"{'yes' if c.playable else 'NO':<9s} {c.text[:70]}  [{flagtext}]"
            )
        return "\n".join(lines)


def prior_score_of(
    choices: dict, specs: list[HoleSpec], prior: PlausibilityPrior
) -> float:
    """Geometric mean of chosen-option weights, each normalized by the max
    weight among that hole's options (so rescaling all weights is a no-op)."""
    if not specs:
        return 1.0
    log_total = 0.0
    for spec in specs:
        max_w = max(prior.weight_of(opt.keyword) for opt in spec.options)
        chosen = choices[spec.hole_id]
        w = prior.weight_of(chosen.keyword) / max_w
        log_total += math.log(w)
    return math.exp(log_total / len(specs))


def combined_score(quality: float, prior_score: float, alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    q = quality ** alpha if alpha > 0 else 1.0
    p = prior_score ** (1.0 - alpha) if alpha < 1.0 else 1.0
    return q * p


def reconstruct_rank(
    partial: LudemeTree,
    catalog: Optional[Catalog] = None,
    prior: PlausibilityPrior = PlausibilityPrior(),
    job_template: Optional[dict] = None,
    alpha: float = 0.5,
    max_candidates: int = 256,
    master_seed: int = 0,
    thresholds: PlayabilityThresholds = PlayabilityThresholds(),
    threads: int = 1,
) -> RankedCandidates:
    """Rank hole completions by combined quality and plausibility.

    Each candidate's probe and analysis seeds derive from
    ``(master_seed, candidate_index)``; ranking ties break on canonical
    text, so the output is deterministic.
    """
    catalog = catalog or v1_catalog()
    specs = hole_specs(partial, catalog)
    completions, warnings = enumerate_completions(partial, catalog, max_candidates)
    template = dict(job_template or {"metricsVersion": 1, "games": 200})

    rows: list[CandidateRuleSet] = []
    for index, completion in enumerate(completions):
        text = to_text(completion.tree)
        choices_text = {hid: _fmt(node) for hid, node in completion.choices.items()}
        p_score = prior_score_of(completion.choices, specs, prior)
        playable, reasons = playability_filter(
            completion.tree, thresholds, derive_seed(master_seed, index), catalog
        )
        report = None
        quality = 0.0
        flags: tuple[str, ...] = ()
        if playable:
            job = AnalysisJob.from_dict(
                {**template, "masterSeed": derive_seed(master_seed, (1 << 20) + index)},
                lud_text=text,
            )
            report = run_analysis(job, threads=threads)
            quality = quality_score(report, job.weights)
            flags = report.flags
        rows.append(
            CandidateRuleSet(
                text=text,
                hole_choices=choices_text,
                playable=playable,
                reasons=tuple(reasons),
                report=report,
                quality=quality,
                prior_score=p_score,
                combined=combined_score(quality, p_score, alpha) if playable else 0.0,
                flags=flags,
            )
        )

    rows.sort(key=lambda c: (not c.playable, -c.combined, c.text))
    playable_rows = [c for c in rows if c.playable]
    total = sum(c.combined for c in playable_rows)
    normalized: list[CandidateRuleSet] = []
    for c in rows:
        if not c.playable:
            normalized.append(c)
            continue
        share = (c.combined / total) if total > 0 else 1.0 / len(playable_rows)
        normalized.append(replace(c, normalized=share))
    return RankedCandidates(tuple(normalized), tuple(warnings))


def _fmt(node: LudemeNode) -> str:
    from .grammar import _fmt_node

    return _fmt_node(node)
