"""Agent policies: legality, determinism, search sanity, matchup contracts."""

from __future__ import annotations

import random

import pytest

from ludekit.agents import (
    AgentConfig,
    NoLegalMovesError,
    derive_seed,
    make_agent,
    matchup,
    select_move,
)
from ludekit.corpus import corpus_game
from ludekit.engine import apply_move, compile_game, initial_state
from ludekit.grammar import parse

from .test_engine import play_sites


def block_position(model):
    """P1 to move; P2 threatens 0,1 -> 2; blocking at 2 is the unique
    non-losing move (verified against the minimax oracle)."""
    state = play_sites(model, initial_state(model, random.Random(0)), [4, 0, 8, 1])
    import random as _random

    from .oracles import minimax_value

    from ludekit.engine import apply_move as _apply

    rng = _random.Random(0)
    non_losing = [
        m for m in state.legal if minimax_value(model, _apply(model, state, m, rng)) >= 0
    ]
    assert [m.to for m in non_losing] == [2]
    return state


def forced_position(model):
    """Exactly one empty site and the game still ongoing."""
    state = play_sites(
        model, initial_state(model, random.Random(0)), [0, 2, 1, 3, 5, 4, 6, 7]
    )
    assert state.outcome is None
    assert len(state.legal) == 1
    return state


class TestConfig:
    def test_bad_kind_rejected(self):
        with pytest.raises(ValueError):
            AgentConfig("alphabeta")

    def test_search_agents_need_budget(self):
        with pytest.raises(ValueError):
            AgentConfig("uct", 0)

    def test_exploration_positive(self):
        with pytest.raises(ValueError):
            AgentConfig("uct", 10, exploration_constant=0.0)

    def test_round_trips_through_dict(self):
        config = AgentConfig("uct", 500, 1.25, seed=3)
        assert AgentConfig.from_dict(config.to_dict()) == config


class TestSelectMove:
    def test_forced_move_is_taken(self, ttt_model):
        state = forced_position(ttt_model)
        for kind, budget in (("random", 1), ("flatmc", 50), ("uct", 200)):
            move, stats = select_move(AgentConfig(kind, budget), ttt_model, state, random.Random(1))
            assert move == state.legal[0]
            assert stats.chosen_move == move

    def test_uct_blocks_the_threat(self, ttt_model):
        state = block_position(ttt_model)
        hits = 0
        for seed in range(10):
            move, stats = select_move(AgentConfig("uct", 2000), ttt_model, state, random.Random(seed))
            hits += move.to == 2
            assert sum(stats.visit_counts) == 2000
        assert hits == 10

    def test_random_is_deterministic_per_seed(self, ttt_model):
        state = initial_state(ttt_model, random.Random(0))
        m1, _ = select_move(AgentConfig("random"), ttt_model, state, random.Random(5))
        m2, _ = select_move(AgentConfig("random"), ttt_model, state, random.Random(5))
        assert m1 == m2

    def test_uct_is_deterministic_per_seed(self, ttt_model):
        state = initial_state(ttt_model, random.Random(0))
        r1 = select_move(AgentConfig("uct", 300), ttt_model, state, random.Random(9))
        r2 = select_move(AgentConfig("uct", 300), ttt_model, state, random.Random(9))
        assert r1 == r2

    def test_no_legal_moves_raises(self, ttt_model):
        state = play_sites(ttt_model, initial_state(ttt_model, random.Random(0)), [0, 3, 1, 4, 2])
        assert state.outcome is not None
        with pytest.raises(NoLegalMovesError):
            select_move(AgentConfig("random"), ttt_model, state, random.Random(0))

    def test_visit_counts_align_with_legal_moves(self, ttt_model):
        state = initial_state(ttt_model, random.Random(0))
        _, stats = select_move(AgentConfig("uct", 90), ttt_model, state, random.Random(2))
        assert len(stats.visit_counts) == len(state.legal)
        assert sum(stats.visit_counts) == 90
        assert all(v >= 0 for v in stats.visit_counts)

    def test_value_estimates_stay_in_unit_interval(self, ttt_model):
        rng = random.Random(3)
        state = initial_state(ttt_model, rng)
        while state.outcome is None:
            move, stats = select_move(AgentConfig("uct", 60), ttt_model, state, rng)
            assert 0.0 <= stats.root_value_estimate <= 1.0
            state = apply_move(ttt_model, state, move, rng)

    def test_flatmc_splits_budget_evenly(self, ttt_model):
        state = initial_state(ttt_model, random.Random(0))
        _, stats = select_move(AgentConfig("flatmc", 93), ttt_model, state, random.Random(2))
        assert sum(stats.visit_counts) == 93
        assert max(stats.visit_counts) - min(stats.visit_counts) <= 1

    def test_random_stats_are_marked_conventional(self, ttt_model):
        state = initial_state(ttt_model, random.Random(0))
        _, stats = select_move(AgentConfig("random"), ttt_model, state, random.Random(2))
        assert stats.root_value_estimate == 0.5
        assert not stats.has_value

    def test_uct_handles_chance_games(self):
        model = compile_game(parse(corpus_game("Royal Race").text))
        rng = random.Random(8)
        state = initial_state(model, rng)
        while state.legal == () or state.pending_dice == 0:
            state = initial_state(model, rng)
        move, stats = select_move(AgentConfig("uct", 120), model, state, rng)
        assert move in state.legal
        assert sum(stats.visit_counts) == 120

    def test_agents_never_return_illegal_moves(self, ttt_model):
        rng = random.Random(17)
        for kind, budget in (("random", 1), ("flatmc", 20), ("uct", 40)):
            agent = make_agent(AgentConfig(kind, budget))
            for _ in range(15):
                state = initial_state(ttt_model, rng)
                while state.outcome is None:
                    move, _ = agent.select(ttt_model, state, rng)
                    assert move in state.legal
                    state = apply_move(ttt_model, state, move, rng)


class TestMatchup:
    def test_single_game(self, ttt_model):
        trials = matchup(ttt_model, AgentConfig("random"), AgentConfig("random"), 1, 0)
        assert len(trials) == 1

    def test_games_must_be_positive(self, ttt_model):
        with pytest.raises(ValueError):
            matchup(ttt_model, AgentConfig("random"), AgentConfig("random"), 0, 0)

    def test_seats_swap(self, ttt_model):
        a = AgentConfig("flatmc", 4)
        b = AgentConfig("random")
        trials = matchup(ttt_model, a, b, 4, 0, swap_seats=True)
        assert [t.config_p1 for t in trials] == [a, b, a, b]

    def test_derived_seeds_are_stable(self):
        assert derive_seed(1, 0) == derive_seed(1, 0)
        assert derive_seed(1, 0) != derive_seed(1, 1)
        assert derive_seed(1, 0) != derive_seed(2, 0)

    def test_worker_counts_produce_identical_trials(self, ttt_model):
        a = AgentConfig("flatmc", 8)
        b = AgentConfig("random")
        seq = matchup(ttt_model, a, b, 8, 5, threads=1)
        par = matchup(ttt_model, a, b, 8, 5, threads=2)
        assert seq == par

    def test_uct_rarely_loses_to_random(self, ttt_model):
        uct = AgentConfig("uct", 300)
        trials = matchup(ttt_model, uct, AgentConfig("random"), 30, 1)
        losses = 0
        for t in trials:
            if t.outcome.kind == "win":
                loser_config = t.config_p2 if t.outcome.winner == 1 else t.config_p1
                losses += loser_config == uct
        assert losses <= 2

    def test_eight_workers_match_sequential(self, ttt_model):
        a = AgentConfig("flatmc", 4)
        b = AgentConfig("random")
        seq = matchup(ttt_model, a, b, 8, 3, threads=1)
        par = matchup(ttt_model, a, b, 8, 3, threads=8)
        assert sorted(seq, key=lambda t: t.game_index) == sorted(par, key=lambda t: t.game_index)

    def test_bigger_budget_is_not_worse(self, ttt_model):
        # statistical monotonicity: (wins + draws) rate of the larger budget
        # stays within 0.05 of the smaller one's from above; frozen seed
        small = AgentConfig("uct", 24)
        big = AgentConfig("uct", 192)
        trials = matchup(ttt_model, big, small, 200, 77)
        big_points = small_points = 0.0
        for t in trials:
            if t.outcome.kind == "win":
                big_won = (t.outcome.winner == 1) == (t.config_p1 == big)
                big_points += 1.0 if big_won else 0.0
                small_points += 0.0 if big_won else 1.0
            else:
                big_points += 1.0
                small_points += 1.0
        assert big_points / 200 >= small_points / 200 - 0.05
