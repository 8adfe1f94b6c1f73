"""Game-quality indicators computed from batches of recorded trials.

Indicator definitions (metricsVersion 1):

* balance      — agent A's win rate minus agent B's over completed trials,
                 with seats swapped per game (A sits P1 in even-indexed
                 games) so first-move advantage cancels; reported with a
                 Wilson-score (Newcombe) 95% half-width.  A self-mirror
                 matchup on a fair game centres this at zero.
* sideBalance  — seat P1's win rate minus seat P2's over completed trials:
                 the structural advantage of one side's role and equipment.
                 One-sided rule sets are flagged from this value.
* drawishness  — draws / completed trials.
* completion   — fraction of trials that did not time out.
* duration     — mean and population std of completed trials' move counts.
* decisiveness — mean over decided trials of ``1 - lock/len`` where lock is
                 the earliest ply after which the winner's value estimate
                 stays at or above the decided threshold.
* uncertainty  — mean fraction of plies whose estimate sits inside the
                 uncertain band.
* drama        — fraction of decided trials where the eventual winner's
                 estimate dipped below the drama threshold at some ply.
* strategic depth — win-rate gap between a high-budget and a low-budget
                 UCT agent over paired probe matches.
* complexity   — ludeme node count of the rule description (a proxy for
                 how hard the rules are to pass on).

Trace-based indicators use only value-bearing search statistics; when a
batch carries none they are reported absent and flagged, never fabricated.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from dataclasses import dataclass, field
from typing import Callable, Optional

from .agents import AgentConfig, derive_seed, matchup
from .catalog import validate, v1_catalog
from .engine import GameModel, Trial, compile_game
from .grammar import LudemeTree, node_count, parse

METRICS_VERSION = 1

_Z95 = 1.959963984540054


class MissingFieldError(Exception):
    pass


@dataclass(frozen=True)
class MetricThresholds:
    decided: float = 0.9
    uncertain_band: tuple[float, float] = (0.4, 0.6)
    drama_dip: float = 0.4


@dataclass(frozen=True)
class MetricWeights:
    """Reward weights (non-negative, sum 1) plus penalty multipliers.

    The quality score is the clamped weighted reward sum minus the balance,
    drawishness-excess and complexity-excess penalties.
    """

    rewards: dict = field(
        default_factory=lambda: {
            "completion": 0.15,
            "duration": 0.20,
            "uncertainty": 0.20,
            "drama": 0.10,
            "decisiveness": 0.10,
            "depth": 0.25,
        }
    )
    balance_penalty: float = 1.0
    draw_penalty: float = 0.6
    complexity_penalty: float = 0.3
    duration_window: tuple[float, float, float, float] = (2.0, 5.0, 200.0, 400.0)
    # Nearest-rank 90th percentile of the bundled corpus node counts.
    complexity_p90: float = 28.0

    def __post_init__(self) -> None:
        total = sum(self.rewards.values())
        if any(w < 0 for w in self.rewards.values()):
            raise ValueError("reward weights must be non-negative")
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"reward weights must sum to 1, got {total}")
        if min(self.balance_penalty, self.draw_penalty, self.complexity_penalty) < 0:
            raise ValueError("penalties must be non-negative")


@dataclass(frozen=True)
class MetricsReport:
    games: int
    completed: int
    decided: int
    wins_seat1: int
    wins_seat2: int
    draws: int
    timeouts: int
    balance: float
    balance_ci: float
    side_balance: float
    drawishness: float
    completion_rate: float
    duration_mean: float
    duration_std: float
    decisiveness: Optional[float]
    uncertainty: Optional[float]
    drama: Optional[float]
    strategic_depth: Optional[float]
    complexity: int
    flags: tuple[str, ...] = ()
    metrics_version: int = METRICS_VERSION

    def to_dict(self) -> dict:
        return {
            "metricsVersion": self.metrics_version,
            "games": self.games,
            "completed": self.completed,
            "decided": self.decided,
            "winsSeat1": self.wins_seat1,
            "winsSeat2": self.wins_seat2,
            "draws": self.draws,
            "timeouts": self.timeouts,
            "balance": self.balance,
            "balanceCI": self.balance_ci,
            "sideBalance": self.side_balance,
            "drawishness": self.drawishness,
            "completionRate": self.completion_rate,
            "durationMean": self.duration_mean,
            "durationStd": self.duration_std,
            "decisiveness": self.decisiveness,
            "uncertainty": self.uncertainty,
            "drama": self.drama,
            "strategicDepth": self.strategic_depth,
            "complexity": self.complexity,
            "flags": list(self.flags),
        }

    def to_table(self) -> str:
        rows = []
        for key, value in self.to_dict().items():
            if isinstance(value, float):
                text = f"{value:.4f}"
            elif isinstance(value, list):
                text = ", ".join(value) if value else "-"
            elif value is None:
                text = "absent"
            else:
                text = str(value)
            rows.append((key, text))
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


# ---------------------------------------------------------------------------
# Wilson / Newcombe interval for a difference of proportions
# ---------------------------------------------------------------------------

def _wilson(successes: int, n: int) -> tuple[float, float]:
    if n == 0:
        return (0.0, 0.0)
    p = successes / n
    z2 = _Z95 * _Z95
    denom = 1 + z2 / n
    centre = (p + z2 / (2 * n)) / denom
    half = _Z95 * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    return (centre - half, centre + half)


def _newcombe_halfwidth(wins1: int, wins2: int, n: int) -> float:
    if n == 0:
        return 0.0
    p1, p2 = wins1 / n, wins2 / n
    l1, u1 = _wilson(wins1, n)
    l2, u2 = _wilson(wins2, n)
    d = p1 - p2
    lower = d - math.sqrt((p1 - l1) ** 2 + (u2 - p2) ** 2)
    upper = d + math.sqrt((u1 - p1) ** 2 + (p2 - l2) ** 2)
    return max(upper - d, d - lower)


# ---------------------------------------------------------------------------
# Trace helpers
# ---------------------------------------------------------------------------

def trial_movers(trial: Trial) -> list[int]:
    """Mover of each recorded ply (P1 always opens; alternation is a core
    engine invariant)."""
    return [1 + (i % 2) for i in range(trial.move_count)]


def _valued_plies(trial: Trial) -> list[tuple[int, int, float]]:
    """(ply index, mover, estimate) for plies with real value estimates."""
    out = []
    for i, stats in enumerate(trial.stats):
        if stats is not None and getattr(stats, "has_value", False):
            out.append((i, 1 + (i % 2), stats.root_value_estimate))
    return out


def _decisiveness_of(trial: Trial, decided_at: float) -> Optional[float]:
    if trial.outcome.kind != "win":
        return None
    winner = trial.outcome.winner
    plies = [(i, est) for i, mover, est in _valued_plies(trial) if mover == winner]
    if not plies:
        return None
    length = trial.move_count
    lock = 0
    for i, est in plies:
        if est < decided_at:
            lock = min(length, i + 1)
    return 1.0 - lock / length if length else 0.0


def _drama_of(trial: Trial, dip: float) -> Optional[bool]:
    if trial.outcome.kind != "win":
        return None
    winner = trial.outcome.winner
    plies = [est for i, mover, est in _valued_plies(trial) if mover == winner]
    if not plies:
        return None
    return min(plies) < dip


def _uncertainty_of(trial: Trial, band: tuple[float, float]) -> Optional[float]:
    plies = _valued_plies(trial)
    if not plies:
        return None
    lo, hi = band
    inside = sum(1 for _, _, est in plies if lo <= est <= hi)
    return inside / len(plies)


def _depth_gap(probe_trials: list[Trial]) -> Optional[float]:
    if not probe_trials:
        return None
    configs = {probe_trials[0].config_p1, probe_trials[0].config_p2}
    if len(configs) != 2:
        return 0.0
    high = max(configs, key=lambda c: c.iteration_budget)
    score_high = 0.0
    score_low = 0.0
    for t in probe_trials:
        if t.outcome.kind == "win":
            high_won = (t.outcome.winner == 1) == (t.config_p1 == high)
            score_high += 1.0 if high_won else 0.0
            score_low += 0.0 if high_won else 1.0
        else:
            score_high += 0.5
            score_low += 0.5
    n = len(probe_trials)
    gap = score_high / n - score_low / n
    return max(0.0, min(1.0, gap))


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def compute_metrics(
    trials: list[Trial],
    tree: LudemeTree,
    probe_trials: Optional[list[Trial]] = None,
    thresholds: MetricThresholds = MetricThresholds(),
) -> MetricsReport:
    """Reduce a batch of trials (all from one model) to a MetricsReport.

    The reduction is a deterministic fold over the canonically ordered
    trial list, so shuffled input produces a bit-identical report.
    """
    if not trials:
        raise ValueError("trials must be non-empty")
    trials = sorted(trials, key=lambda t: (t.game_index, t.seed))
    probe_trials = sorted(probe_trials or [], key=lambda t: (t.game_index, t.seed))

    completed = [t for t in trials if t.outcome.kind != "timeout"]
    wins1 = sum(1 for t in completed if t.outcome.winner == 1)
    wins2 = sum(1 for t in completed if t.outcome.winner == 2)
    draws = sum(1 for t in completed if t.outcome.kind == "draw")
    n_completed = len(completed)
    completion_rate = n_completed / len(trials)
    drawishness = draws / n_completed if n_completed else 0.0
    # Matchup convention: agent A holds seat P1 in even-indexed games.
    wins_a = sum(
        1
        for t in completed
        if t.outcome.kind == "win" and (t.outcome.winner == 1) == (t.game_index % 2 == 0)
    )
    wins_b = (wins1 + wins2) - wins_a
    balance = (wins_a - wins_b) / n_completed if n_completed else 0.0
    side_balance = (wins1 - wins2) / n_completed if n_completed else 0.0
    balance_ci = _newcombe_halfwidth(wins_a, wins_b, n_completed)
    durations = [t.move_count for t in completed]
    duration_mean = statistics.fmean(durations) if durations else 0.0
    duration_std = statistics.pstdev(durations) if len(durations) > 1 else 0.0

    traced = [t for t in trials + probe_trials if _valued_plies(t)]
    flags: list[str] = []
    if traced:
        unc = [u for u in (_uncertainty_of(t, thresholds.uncertain_band) for t in traced) if u is not None]
        uncertainty: Optional[float] = statistics.fmean(unc) if unc else 0.0
        dec = [d for d in (_decisiveness_of(t, thresholds.decided) for t in traced) if d is not None]
        decisiveness: Optional[float] = statistics.fmean(dec) if dec else 0.0
        dra = [d for d in (_drama_of(t, thresholds.drama_dip) for t in traced) if d is not None]
        drama: Optional[float] = (sum(1 for d in dra if d) / len(dra)) if dra else 0.0
    else:
        uncertainty = decisiveness = drama = None
        flags.append("traces-absent")

    strategic_depth = _depth_gap(probe_trials)
    if strategic_depth is None:
        flags.append("depth-absent")

    if n_completed >= 20 and max(abs(balance), abs(side_balance)) > 0.9:
        flags.append("outlier: one-sided")
    if n_completed > 0 and drawishness == 1.0:
        flags.append("all-draw")
    if completion_rate < 0.5:
        flags.append("rarely-completes")

    return MetricsReport(
        games=len(trials),
        completed=n_completed,
        decided=wins1 + wins2,
        wins_seat1=wins1,
        wins_seat2=wins2,
        draws=draws,
        timeouts=len(trials) - n_completed,
        balance=balance,
        balance_ci=balance_ci,
        side_balance=side_balance,
        drawishness=drawishness,
        completion_rate=completion_rate,
        duration_mean=duration_mean,
        duration_std=duration_std,
        decisiveness=decisiveness,
        uncertainty=uncertainty,
        drama=drama,
        strategic_depth=strategic_depth,
        complexity=node_count(tree),
        flags=tuple(flags),
    )


def _trapezoid(x: float, window: tuple[float, float, float, float]) -> float:
    a, b, c, d = window
    if x <= a or x >= d:
        return 0.0
    if x < b:
        return (x - a) / (b - a)
    if x <= c:
        return 1.0
    return (d - x) / (d - c)


def quality_score(report: MetricsReport, weights: MetricWeights = MetricWeights()) -> float:
    """Scalar desirability in [0, 1]; the balance penalty (the worse of the
    agent and side imbalance) saturates the score to zero for one-sided
    games."""
    rewards = {
        "completion": report.completion_rate,
        "duration": _trapezoid(report.duration_mean, weights.duration_window),
        "uncertainty": report.uncertainty,
        "drama": report.drama,
        "decisiveness": report.decisiveness,
        "depth": report.strategic_depth,
    }
    total = 0.0
    for name, w in weights.rewards.items():
        if w == 0:
            continue
        value = rewards.get(name)
        if value is None:
            raise MissingFieldError(f"report field for {name!r} is absent but weighted")
        total += w * value
    total -= weights.balance_penalty * max(abs(report.balance), abs(report.side_balance))
    total -= weights.draw_penalty * max(0.0, 2.0 * (report.drawishness - 0.5))
    if report.complexity > weights.complexity_p90 > 0:
        total -= weights.complexity_penalty * (
            (report.complexity - weights.complexity_p90) / weights.complexity_p90
        )
    return max(0.0, min(1.0, total))


# ---------------------------------------------------------------------------
# Analysis jobs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DepthProbe:
    low_budget: int = 100
    high_budget: int = 2000
    games: int = 20
    exploration_constant: float = 1.414


@dataclass(frozen=True)
class AnalysisJob:
    lud_text: str
    games: int
    master_seed: int = 0
    move_cap: int = 300
    agent_a: AgentConfig = AgentConfig("random")
    agent_b: AgentConfig = AgentConfig("random")
    depth_probe: Optional[DepthProbe] = DepthProbe()
    weights: MetricWeights = MetricWeights()
    thresholds: MetricThresholds = MetricThresholds()
    metrics_version: int = METRICS_VERSION

    def __post_init__(self) -> None:
        if self.games < 1:
            raise ValueError("games must be >= 1")
        if self.metrics_version != METRICS_VERSION:
            raise ValueError(f"unsupported metricsVersion {self.metrics_version}")

    def total_trials(self) -> int:
        return self.games + (self.depth_probe.games if self.depth_probe else 0)

    def to_dict(self) -> dict:
        data = {
            "metricsVersion": self.metrics_version,
            "ludText": self.lud_text,
            "games": self.games,
            "masterSeed": self.master_seed,
            "moveCap": self.move_cap,
            "agents": {"a": self.agent_a.to_dict(), "b": self.agent_b.to_dict()},
            "thresholds": {
                "decided": self.thresholds.decided,
                "uncertainBand": list(self.thresholds.uncertain_band),
                "dramaDip": self.thresholds.drama_dip,
            },
            "weights": {
                "rewards": dict(self.weights.rewards),
                "balancePenalty": self.weights.balance_penalty,
                "drawPenalty": self.weights.draw_penalty,
                "complexityPenalty": self.weights.complexity_penalty,
                "durationWindow": list(self.weights.duration_window),
                "complexityP90": self.weights.complexity_p90,
            },
        }
        if self.depth_probe:
            data["depthProbe"] = {
                "lowBudget": self.depth_probe.low_budget,
                "highBudget": self.depth_probe.high_budget,
                "games": self.depth_probe.games,
                "explorationConstant": self.depth_probe.exploration_constant,
            }
        return data

    @classmethod
    def from_dict(cls, data: dict, lud_text: Optional[str] = None) -> "AnalysisJob":
        if "metricsVersion" not in data:
            raise ValueError("job config requires metricsVersion")
        text = lud_text if lud_text is not None else data.get("ludText")
        if text is None:
            raise ValueError("job config requires ludText (or a lud path resolved by the caller)")
        agents = data.get("agents", {})
        probe = None
        if data.get("depthProbe"):
            dp = data["depthProbe"]
            probe = DepthProbe(
                low_budget=int(dp.get("lowBudget", 100)),
                high_budget=int(dp.get("highBudget", 2000)),
                games=int(dp.get("games", 20)),
                exploration_constant=float(dp.get("explorationConstant", 1.414)),
            )
        weights = MetricWeights()
        if data.get("weights"):
            w = data["weights"]
            weights = MetricWeights(
                rewards=dict(w.get("rewards", MetricWeights().rewards)),
                balance_penalty=float(w.get("balancePenalty", 1.0)),
                draw_penalty=float(w.get("drawPenalty", 0.6)),
                complexity_penalty=float(w.get("complexityPenalty", 0.3)),
                duration_window=tuple(w.get("durationWindow", (2.0, 5.0, 200.0, 400.0))),
                complexity_p90=float(w.get("complexityP90", MetricWeights().complexity_p90)),
            )
        thresholds = MetricThresholds()
        if data.get("thresholds"):
            t = data["thresholds"]
            thresholds = MetricThresholds(
                decided=float(t.get("decided", 0.9)),
                uncertain_band=tuple(t.get("uncertainBand", (0.4, 0.6))),
                drama_dip=float(t.get("dramaDip", 0.4)),
            )
        return cls(
            lud_text=text,
            games=int(data["games"]),
            master_seed=int(data.get("masterSeed", 0)),
            move_cap=int(data.get("moveCap", 300)),
            agent_a=AgentConfig.from_dict(agents.get("a", {"kind": "random"})),
            agent_b=AgentConfig.from_dict(agents.get("b", {"kind": "random"})),
            depth_probe=probe,
            weights=weights,
            thresholds=thresholds,
            metrics_version=int(data["metricsVersion"]),
        )


_PROBE_STREAM = 0x7D0BE  # offset so probe seeds never collide with main trials


def run_analysis(
    job: AnalysisJob,
    threads: int = 1,
    progress: Optional[Callable[[int, int], None]] = None,
    model: Optional[GameModel] = None,
    tree: Optional[LudemeTree] = None,
) -> MetricsReport:
    """Run the job's matchup plus embedded depth probes and reduce them.

    Deterministic per master seed and independent of the worker count.
    """
    if tree is None:
        tree = parse(job.lud_text)
    if model is None:
        report = validate(tree, v1_catalog())
        if not report.is_complete:
            raise ValueError("analysis requires a complete, valid game: " + "; ".join(report.messages()))
        model = compile_game(tree)

    total = job.total_trials()
    done = 0

    def tick(i: int, n: int) -> None:
        nonlocal done
        done += 1
        if progress:
            progress(done, total)

    main = matchup(
        model,
        job.agent_a,
        job.agent_b,
        job.games,
        job.master_seed,
        swap_seats=True,
        move_cap=job.move_cap,
        threads=threads,
        progress=tick,
    )
    probes: list[Trial] = []
    if job.depth_probe and job.depth_probe.games > 0:
        dp = job.depth_probe
        high = AgentConfig("uct", dp.high_budget, dp.exploration_constant)
        low = AgentConfig("uct", dp.low_budget, dp.exploration_constant)
        probes = matchup(
            model,
            high,
            low,
            dp.games,
            derive_seed(job.master_seed, _PROBE_STREAM),
            swap_seats=True,
            move_cap=job.move_cap,
            threads=threads,
            progress=tick,
        )
    return compute_metrics(main, tree, probes, job.thresholds)


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def trials_to_csv(trials: list[Trial]) -> str:
    """Per-trial rows: index, seed, outcome, winner, moves, configs."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["gameIndex", "seed", "outcome", "winner", "moveCount", "p1", "p2"]
    )
    for t in sorted(trials, key=lambda t: (t.game_index, t.seed)):
        writer.writerow(
            [
                t.game_index,
                t.seed,
                t.outcome.kind,
                t.outcome.winner if t.outcome.winner else "",
                t.move_count,
                _config_label(t.config_p1),
                _config_label(t.config_p2),
            ]
        )
    return buf.getvalue()


def _config_label(config) -> str:
    if config is None:
        return "?"
    if config.kind == "random":
        return "random"
    return f"{config.kind}:{config.iteration_budget}"


def report_to_json(report: MetricsReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True)
