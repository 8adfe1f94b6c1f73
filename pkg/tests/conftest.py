from __future__ import annotations

import pytest

from ludekit.catalog import v1_catalog
from ludekit.corpus import corpus_game, load_corpus
from ludekit.engine import compile_game
from ludekit.grammar import parse

TTT_TEXT = corpus_game("Tic-Tac-Toe").text


@pytest.fixture(scope="session")
def catalog():
    return v1_catalog()


@pytest.fixture(scope="session")
def ttt_text():
    return TTT_TEXT


@pytest.fixture(scope="session")
def ttt_tree():
    return parse(TTT_TEXT)


@pytest.fixture(scope="session")
def ttt_model(ttt_tree):
    return compile_game(ttt_tree)


@pytest.fixture(scope="session")
def corpus():
    return load_corpus()
