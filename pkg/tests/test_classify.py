"""Feature extraction and taxonomy assignment."""

from __future__ import annotations

import itertools

import pytest

from ludekit.classify import (
    BALANCES,
    CAPTURE_METHODS,
    CONFLICTS,
    DETERMINATIONS,
    MOVE_KINDS,
    OBJECTIVES,
    PIECE_NATURES,
    ClassLabel,
    FeatureVector,
    UnderivableFeatureError,
    assign_class,
    extract_features,
)
from ludekit.corpus import corpus_game
from ludekit.engine import compile_game
from ludekit.grammar import parse, to_text


def features_of(name: str) -> FeatureVector:
    game = corpus_game(name)
    return extract_features(compile_game(game.tree), game.tree)


class TestExtractFeatures:
    def test_tictactoe_vector(self):
        f = features_of("Tic-Tac-Toe")
        assert f.as_tuple() == (
            "Deterministic", "Alignment", "Symmetric", "Identical", "Placement", "None", "None",
        )

    def test_dice_race_with_hit_to_start(self):
        f = features_of("Royal Race")
        assert f.as_tuple() == (
            "Stochastic", "Race", "Symmetric", "Identical", "DiceDriven", "SentBack", "Other",
        )

    def test_asymmetric_custodial_game(self):
        f = features_of("Kings Table")
        assert f.balance_of_forces == "Asymmetric"
        assert f.capture_method == "Custodial"
        assert f.piece_nature == "Differentiated"

    def test_mixed_capture_styles_are_underivable(self):
        text = ('(game "X" (mode 2) (equipment {(board (square 4) (square)) '
                "(disc P1) (disc P2) (place disc P1 0 1) (place disc P2 14 15)}) "
                "(rules (play (step (custodial)) (step (replace))) (end (capturedAll))))")
        tree = parse(text)
        with pytest.raises(UnderivableFeatureError) as err:
            extract_features(compile_game(tree), tree)
        assert err.value.feature == "captureMethod"

    def test_invariant_under_print_parse_compile(self, corpus):
        for game in corpus:
            f1 = extract_features(compile_game(game.tree), game.tree)
            reparsed = parse(to_text(game.tree))
            f2 = extract_features(compile_game(reparsed), reparsed)
            assert f1 == f2, game.name


class TestAssignClass:
    def test_tictactoe_is_alignment(self):
        assert str(assign_class(features_of("Tic-Tac-Toe"))) == "PureSkill(Alignment)"

    def test_simple_race(self):
        f = features_of("Goose Chase")
        assert f.conflict_resolution == "None"
        assert str(assign_class(f)) == "SimpleRace"

    def test_hit_to_start_race(self):
        assert str(assign_class(features_of("Royal Race"))) == "ComplexRace(ReenterFromStart)"

    def test_total_over_the_entire_feature_domain(self):
        count = 0
        for combo in itertools.product(
            DETERMINATIONS, OBJECTIVES, BALANCES, PIECE_NATURES, MOVE_KINDS, CONFLICTS, CAPTURE_METHODS
        ):
            label = assign_class(FeatureVector(*combo))
            assert isinstance(label, ClassLabel)
            assert label.main in ("SimpleRace", "ComplexRace", "PureSkill")
            count += 1
        assert count == 2 * 7 * 2 * 2 * 4 * 3 * 5

    def test_deterministic_function(self):
        f = features_of("Leapfrog")
        assert assign_class(f) == assign_class(f)

    def test_corpus_games_match_hand_assigned_labels(self, corpus):
        for game in corpus:
            model = compile_game(game.tree)
            label = str(assign_class(extract_features(model, game.tree)))
            assert label == game.label, game.name

    def test_bad_feature_values_rejected(self):
        with pytest.raises(ValueError):
            FeatureVector("Quantum", "Alignment", "Symmetric", "Identical", "Placement", "None", "None")
