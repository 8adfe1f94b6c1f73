"""The bundled game corpus: a dozen rule descriptions spanning alignment,
capture, and dice-race families, with hand-assigned taxonomy labels.

Also provides a seeded generator of random catalog-valid trees for
property tests and corpus-scale experiments.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .grammar import LudemeNode, LudemeTree, NamedArg, PlayerRef, parse


@dataclass(frozen=True)
class CorpusGame:
    name: str
    file: str
    family: str
    label: str
    text: str
    tree: LudemeTree


@lru_cache(maxsize=1)
def load_corpus() -> tuple[CorpusGame, ...]:
    pkg = resources.files(__package__) / "corpus"
    index = json.loads((pkg / "index.json").read_text(encoding="utf-8"))
    games = []
    for entry in index["games"]:
        text = (pkg / entry["file"]).read_text(encoding="utf-8")
        games.append(
            CorpusGame(
                name=entry["name"],
                file=entry["file"],
                family=entry["family"],
                label=entry["label"],
                text=text,
                tree=parse(text),
            )
        )
    return tuple(games)


def corpus_game(name: str) -> CorpusGame:
    for game in load_corpus():
        if game.name == name or game.file == name:
            return game
    raise KeyError(f"no corpus game named {name!r}")


def corpus_complexities() -> list[int]:
    from .grammar import node_count

    return sorted(node_count(g.tree) for g in load_corpus())


# ---------------------------------------------------------------------------
# Random catalog-valid trees
# ---------------------------------------------------------------------------

def _node(keyword: str, *args) -> LudemeNode:
    return LudemeNode(keyword, tuple(args))


def random_tree(rng: random.Random) -> LudemeTree:
    """A random complete tree that validates against the v1 catalog.

    Drawn from the same construct space as the corpus: placement, step,
    leap and dice-race games with assorted boards, pieces, and end rules.
    """
    dice_game = rng.random() < 0.3
    if rng.random() < 0.6:
        size = rng.randint(3, 6)
        board_args: list = [_node("square", size)]
        rows = cols = size
    else:
        rows, cols = rng.randint(2, 5), rng.randint(3, 6)
        board_args = [_node("rect", rows, cols)]
    if rng.random() < 0.5:
        board_args.append(_node("square"))

    n_sites = rows * cols
    equipment: list = []
    piece_kinds = ["ball", "cross", "disc", "king"]
    p1_kind = rng.choice(piece_kinds)
    p2_kind = rng.choice(piece_kinds)

    if dice_game:
        lane = list(range(cols))
        lane2 = [n_sites - 1 - s for s in lane]
        board_args.append(
            _node("track", PlayerRef(1), *lane, *([_node("off")] if rng.random() < 0.8 else []))
        )
        board_args.append(
            _node("track", PlayerRef(2), *lane2, *([_node("off")] if rng.random() < 0.8 else []))
        )
        count = rng.randint(1, 3)
        equipment.append(_node("board", *board_args))
        equipment.append(_node(p1_kind, PlayerRef(1), NamedArg("count", count)))
        equipment.append(_node(p2_kind, PlayerRef(2), NamedArg("count", count)))
        equipment.append(_node("dice", rng.randint(1, 3), *sorted(rng.sample(range(4), 2))))
        play = _node("play", _node("moveByDice"))
        ends = [_node("end", _node("bearOffAll"), _node("result", _node("mover"), _node("Win")))]
    else:
        equipment.append(_node("board", *board_args))
        style = rng.choice(["place", "place", "step", "leap"])
        if style == "place":
            equipment.append(_node(p1_kind, PlayerRef(1)))
            equipment.append(_node(p2_kind, PlayerRef(2)))
            play = _node("play", _node("to", _node("mover"), _node("empty")))
            k = rng.randint(1, min(rows, cols) + 1)
            ends = [_node("end", _node("line", NamedArg("length", k)), _node("result", _node("mover"), _node("Win")))]
            if rng.random() < 0.5:
                ends.append(_node("end", _node("fullBoard", _node("Draw"))))
        else:
            per_side = rng.randint(2, min(4, n_sites // 2 - 1))
            p1_sites = list(range(per_side))
            p2_sites = [n_sites - 1 - s for s in p1_sites]
            equipment.append(_node(p1_kind, PlayerRef(1)))
            equipment.append(_node(p2_kind, PlayerRef(2)))
            equipment.append(_node("place", _node(p1_kind), PlayerRef(1), *p1_sites))
            equipment.append(_node("place", _node(p2_kind), PlayerRef(2), *p2_sites))
            if style == "step":
                mod = rng.choice([None, "custodial", "replace"])
                gen = _node("step", *( [_node(mod)] if mod else [] ))
            else:
                gen = _node("leap")
            play = _node("play", gen)
            ends = [
                _node(
                    "end",
                    rng.choice([_node("capturedAll"), _node("noMoves")]),
                    _node("result", _node("mover"), _node("Win")),
                )
            ]

    mode_args: list = [2]
    if rng.random() < 0.5:
        mode_args.append(_node("addToEmpty"))
    root = _node(
        "game",
        f"Random {rng.randrange(1_000_000)}",
        _node("mode", *mode_args),
        _node("equipment", _args_set(equipment)),
        _node("rules", play, *ends),
    )
    return LudemeTree(root)


def _args_set(items):
    from .grammar import ArgSet

    return ArgSet(tuple(items))
