"""Decision policies over game states: uniform random, flat Monte Carlo,
and UCT Monte Carlo tree search.

Every agent emits :class:`SearchStats` per decision so the analysis module
can trace value estimates through a game.  Random agents report the
conventional 0.5 estimate and are marked ``has_value=False`` so trace-based
indicators are never fabricated from them.

Terminal values are Win=1, Draw=0.5, Loss=0, Timeout=0.5 from the
evaluated player's perspective.  UCT handles chance states open-loop: the
tree is keyed by moves and dice are resampled on every descent, while
deterministic games cache child states for speed (the two are equivalent
when there is no chance).  Ties are broken by the lowest stable move-order
index for reproducibility.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

from .engine import (
    GameModel,
    GameState,
    Move,
    Outcome,
    Trial,
    apply_move,
    initial_state,
    playout,
)

DEFAULT_EXPLORATION = 1.414
DEFAULT_MOVE_CAP = 300

_MASK64 = (1 << 64) - 1


class NoLegalMovesError(Exception):
    pass


@dataclass(frozen=True)
class AgentConfig:
    kind: str  # "random" | "flatmc" | "uct"
    iteration_budget: int = 1
    exploration_constant: float = DEFAULT_EXPLORATION
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("random", "flatmc", "uct"):
            raise ValueError(f"unknown agent kind {self.kind!r}")
        if self.kind in ("flatmc", "uct") and self.iteration_budget < 1:
            raise ValueError("iteration_budget must be >= 1 for search agents")
        if self.exploration_constant <= 0:
            raise ValueError("exploration_constant must be > 0")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "iterationBudget": self.iteration_budget,
            "explorationConstant": self.exploration_constant,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AgentConfig":
        return cls(
            kind=data["kind"],
            iteration_budget=int(data.get("iterationBudget", 1)),
            exploration_constant=float(data.get("explorationConstant", DEFAULT_EXPLORATION)),
            seed=int(data.get("seed", 0)),
        )


@dataclass(frozen=True)
class SearchStats:
    root_value_estimate: float  # in [0, 1], from the mover's perspective
    visit_counts: tuple[int, ...]  # aligned with the root's legal move order
    chosen_move: Move
    has_value: bool = True  # False when the estimate is conventional


def _terminal_value(outcome: Outcome, player: int) -> float:
    if outcome.kind == "win":
        return 1.0 if outcome.winner == player else 0.0
    return 0.5  # draw or timeout


def _rollout(model: GameModel, state: GameState, rng: random.Random, cap: int) -> Outcome:
    steps = 0
    while state.outcome is None:
        if steps >= cap:
            return Outcome("timeout")
        legal = state.legal
        state = apply_move(model, state, legal[rng.randrange(len(legal))], rng)
        steps += 1
    return state.outcome


# ---------------------------------------------------------------------------
# Agents
# ---------------------------------------------------------------------------

class RandomAgent:
    def __init__(self, config: AgentConfig, move_cap: int = DEFAULT_MOVE_CAP):
        self.config = config
        self.move_cap = move_cap

    def select(self, model: GameModel, state: GameState, rng: random.Random):
        legal = state.legal
        if not legal:
            raise NoLegalMovesError("no legal moves")
        move = legal[rng.randrange(len(legal))]
        return move, SearchStats(0.5, (), move, has_value=False)


class FlatMCAgent:
    def __init__(self, config: AgentConfig, move_cap: int = DEFAULT_MOVE_CAP):
        self.config = config
        self.move_cap = move_cap

    def select(self, model: GameModel, state: GameState, rng: random.Random):
        legal = state.legal
        if not legal:
            raise NoLegalMovesError("no legal moves")
        budget = self.config.iteration_budget
        k = len(legal)
        base, extra = divmod(budget, k)
        me = state.mover
        visits = []
        sums = []
        for i, move in enumerate(legal):
            n = base + (1 if i < extra else 0)
            total = 0.0
            for _ in range(n):
                nxt = apply_move(model, state, move, rng)
                out = nxt.outcome or _rollout(model, nxt, rng, self.move_cap)
                total += _terminal_value(out, me)
            visits.append(n)
            sums.append(total)
        best_i = 0
        best_mean = -1.0
        for i, (n, total) in enumerate(zip(visits, sums)):
            mean = total / n if n else 0.0
            if mean > best_mean:
                best_mean = mean
                best_i = i
        root_value = sum(sums) / budget if budget else 0.5
        return legal[best_i], SearchStats(root_value, tuple(visits), legal[best_i])


class _Node:
    __slots__ = ("state", "children", "visits", "value", "untried")

    def __init__(self, state: Optional[GameState]):
        self.state = state  # cached only for deterministic games
        self.children: dict[Move, _Node] = {}
        self.visits = 0
        self.value = 0.0  # from the perspective of the player who moved in
        self.untried = 0  # index into the node state's legal list (deterministic)


class UCTAgent:
    def __init__(self, config: AgentConfig, move_cap: int = DEFAULT_MOVE_CAP):
        self.config = config
        self.move_cap = move_cap

    def select(self, model: GameModel, state: GameState, rng: random.Random):
        legal = state.legal
        if not legal:
            raise NoLegalMovesError("no legal moves")
        budget = self.config.iteration_budget
        c = self.config.exploration_constant
        deterministic = model.chance is None
        root = _Node(state if deterministic else None)
        cap = self.move_cap

        for _ in range(budget):
            node = root
            cur = state
            path: list[tuple[_Node, int]] = []  # (child node, mover who moved in)

            # Selection / expansion
            while True:
                if cur.outcome is not None:
                    outcome = cur.outcome
                    break
                cur_legal = cur.legal
                mover = cur.mover
                child = None
                move = None
                if deterministic:
                    if node.untried < len(cur_legal):
                        move = cur_legal[node.untried]
                        node.untried += 1
                        nxt = apply_move(model, cur, move, rng)
                        child = _Node(nxt)
                        node.children[move] = child
                        path.append((child, mover))
                        outcome = nxt.outcome or _rollout(model, nxt, rng, cap)
                        break
                else:
                    for m in cur_legal:
                        if m not in node.children:
                            move = m
                            nxt = apply_move(model, cur, m, rng)
                            child = _Node(None)
                            node.children[m] = child
                            path.append((child, mover))
                            outcome = nxt.outcome or _rollout(model, nxt, rng, cap)
                            break
                    if move is not None:
                        break
                # All moves tried here: UCB1 descent
                log_n = math.log(node.visits) if node.visits > 0 else 0.0
                best = None
                best_score = -1.0
                for m in cur_legal:
                    ch = node.children.get(m)
                    if ch is None or ch.visits == 0:
                        best = (m, ch)
                        break
                    score = ch.value / ch.visits + c * math.sqrt(log_n / ch.visits)
                    if score > best_score:
                        best_score = score
                        best = (m, ch)
                assert best is not None
                move, child = best
                if child is None:  # chance game: move known but unexpanded here
                    child = _Node(None)
                    node.children[move] = child
                nxt = apply_move(model, cur, move, rng) if not deterministic else child.state
                if deterministic and nxt is None:  # pragma: no cover - defensive
                    nxt = apply_move(model, cur, move, rng)
                path.append((child, cur.mover))
                node = child
                cur = nxt

            # Backpropagation
            root.visits += 1
            for child, mover in path:
                child.visits += 1
                child.value += _terminal_value(outcome, mover)

        visit_counts = tuple(
            root.children[m].visits if m in root.children else 0 for m in legal
        )
        best_i = 0
        best_visits = -1
        for i, m in enumerate(legal):
            v = visit_counts[i]
            if v > best_visits:
                best_visits = v
                best_i = i
        total_value = sum(ch.value for ch in root.children.values())
        total_visits = sum(visit_counts)
        root_value = total_value / total_visits if total_visits else 0.5
        return legal[best_i], SearchStats(root_value, visit_counts, legal[best_i])


_AGENTS = {"random": RandomAgent, "flatmc": FlatMCAgent, "uct": UCTAgent}


def make_agent(config: AgentConfig, move_cap: int = DEFAULT_MOVE_CAP):
    return _AGENTS[config.kind](config, move_cap)


def select_move(
    config: AgentConfig,
    model: GameModel,
    state: GameState,
    rng: random.Random,
    move_cap: int = DEFAULT_MOVE_CAP,
) -> tuple[Move, SearchStats]:
    """One decision with a throwaway agent; deterministic given the rng state."""
    return make_agent(config, move_cap).select(model, state, rng)


# ---------------------------------------------------------------------------
# Matchups
# ---------------------------------------------------------------------------

def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Stable per-trial seed; independent of execution order and platform."""
    return _splitmix64((master_seed & _MASK64) ^ _splitmix64(index & _MASK64))


def _run_one_trial(args) -> Trial:
    model, config_p1, config_p2, seed, move_cap, game_index = args
    a1 = make_agent(config_p1, move_cap)
    a2 = make_agent(config_p2, move_cap)
    return playout(model, a1, a2, seed, move_cap, game_index)


def matchup(
    model: GameModel,
    config_a: AgentConfig,
    config_b: AgentConfig,
    games: int,
    master_seed: int,
    swap_seats: bool = True,
    move_cap: int = DEFAULT_MOVE_CAP,
    threads: int = 1,
    progress: Optional[Callable[[int, int], None]] = None,
) -> list[Trial]:
    """Play ``games`` independent trials; reproducible from the master seed.

    With ``swap_seats`` the A config sits P1 in even-indexed games and P2 in
    odd-indexed ones.  The result is sorted by game index, so the trial list
    is identical for any worker count.
    """
    if games < 1:
        raise ValueError("games must be >= 1")
    tasks = []
    for g in range(games):
        p1, p2 = (config_a, config_b)
        if swap_seats and g % 2 == 1:
            p1, p2 = config_b, config_a
        tasks.append((model, p1, p2, derive_seed(master_seed, g), move_cap, g))

    trials: list[Trial] = []
    if threads <= 1:
        for i, task in enumerate(tasks):
            trials.append(_run_one_trial(task))
            if progress:
                progress(i + 1, games)
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for i, trial in enumerate(pool.map(_run_one_trial, tasks, chunksize=8)):
                trials.append(trial)
                if progress:
                    progress(i + 1, games)
    trials.sort(key=lambda t: t.game_index)
    return trials

