"""Compile complete ludeme trees into executable game models and run them.

A compiled :class:`GameModel` is immutable and shareable; a
:class:`GameState` is an immutable position snapshot carrying its legal
moves, terminal status and a 64-bit position hash.  ``apply_move`` returns
a new snapshot and never mutates its input, so concurrent playouts need no
coordination beyond independent seeded generators.

Rule semantics fixed here (the description language shows them by example
only):

* ``(to (mover) (empty))`` places a new piece of the mover's first
  declared type on any empty site.
* ``(step)`` moves a piece to an adjacent empty site; ``(step (replace))``
  may also move onto an enemy piece, capturing it; ``(step (custodial))``
  captures enemy pieces flanked orthogonally between the moved piece and
  another friendly piece.
* ``(leap)`` jumps an adjacent enemy piece to the empty site directly
  beyond, capturing it.
* ``(moveByDice)`` advances a piece along the mover's track by the pending
  dice sum, entering from the pool onto track position ``pips - 1``;
  landing on an enemy piece applies the ``hit:`` policy (``start`` returns
  it to its entry pool, ``remove`` eliminates it, ``none`` blocks the
  move).  Tracks ending in ``off`` allow bearing off, overshoot permitted.
* End rules are evaluated in declaration order; the first that fires
  decides.  ``(result (mover) X)`` awards X relative to the player who
  made the last move.  If no end rule fires and the mover has no generated
  move, chance games insert a forced Pass (the turn is lost) and
  deterministic games end in a Draw.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple, Optional

from .grammar import ArgSet, LudemeNode, LudemeTree, NamedArg, PlayerRef, hole_count
from .catalog import Catalog, v1_catalog

ENGINE_VERSION = "0.1.0"

# Move kinds, in stable sort order names
PLACE, STEP, LEAP, TRACK, PASS = 0, 1, 2, 3, 4
KIND_NAMES = ("Place", "Step", "Leap", "TrackMove", "Pass")

OFF_BOARD = -1  # `to` for bear-off moves, `frm` for pool entries / placements


class Move(NamedTuple):
    kind: int
    frm: int
    to: int
    captures: tuple[int, ...] = ()

    @property
    def kind_name(self) -> str:
        return KIND_NAMES[self.kind]


PASS_MOVE = Move(PASS, OFF_BOARD, OFF_BOARD, ())

_SORT_KEY = lambda m: (m.frm, m.to, m.kind, m.captures)  # noqa: E731


@dataclass(frozen=True)
class Outcome:
    kind: str  # "win" | "draw" | "timeout"
    winner: Optional[int] = None  # 1 or 2 for wins


class CompileError(Exception):
    """Raised by ``compile_game``; carries coded issues.

    Codes: UnknownLudeme, ContradictoryRules, NoEndRule, NoPlayRule.
    """

    def __init__(self, issues: list[tuple[str, str]]):
        self.issues = list(issues)
        super().__init__("; ".join(f"{code}: {msg}" for code, msg in issues))


class IllegalMoveError(Exception):
    pass


class OverlappingPlacementsError(Exception):
    pass


# ---------------------------------------------------------------------------
# Board geometry
# ---------------------------------------------------------------------------

_ORTH_DIRS = ((0, 1), (0, -1), (1, 0), (-1, 0))
_DIAG_DIRS = ((1, 1), (-1, -1), (1, -1), (-1, 1))
_ALL_DIRS = _ORTH_DIRS + _DIAG_DIRS


@dataclass(frozen=True)
class Track:
    owner: int
    sites: tuple[int, ...]
    has_off: bool


@dataclass(frozen=True)
class BoardGraph:
    rows: int
    cols: int
    site_count: int
    orth: tuple[tuple[int, ...], ...]
    diag: tuple[tuple[int, ...], ...]
    adjacent: tuple[tuple[int, ...], ...]  # orth + diag
    rays: tuple[tuple[tuple[int, ...], ...], ...]  # per site, 8 outward rays
    jumps: tuple[tuple[tuple[int, int], ...], ...]  # per site, (mid, land) pairs
    flanks: tuple[tuple[tuple[int, int], ...], ...]  # per site, orth (victim, support)
    tracks: tuple[Optional[Track], Optional[Track]] = (None, None)

    def track_for(self, player: int) -> Optional[Track]:
        return self.tracks[player - 1]


def build_board(rows: int, cols: int, tracks: tuple[Optional[Track], Optional[Track]] = (None, None)) -> BoardGraph:
    n = rows * cols

    def site(r: int, c: int) -> int:
        return r * cols + c

    def valid(r: int, c: int) -> bool:
        return 0 <= r < rows and 0 <= c < cols

    orth, diag, adjacent, rays, jumps, flanks = [], [], [], [], [], []
    for r in range(rows):
        for c in range(cols):
            o = tuple(sorted(site(r + dr, c + dc) for dr, dc in _ORTH_DIRS if valid(r + dr, c + dc)))
            d = tuple(sorted(site(r + dr, c + dc) for dr, dc in _DIAG_DIRS if valid(r + dr, c + dc)))
            orth.append(o)
            diag.append(d)
            adjacent.append(tuple(sorted(o + d)))
            site_rays = []
            site_jumps = []
            for dr, dc in _ALL_DIRS:
                ray = []
                rr, cc = r + dr, c + dc
                while valid(rr, cc):
                    ray.append(site(rr, cc))
                    rr += dr
                    cc += dc
                site_rays.append(tuple(ray))
                if len(ray) >= 2:
                    site_jumps.append((ray[0], ray[1]))
            rays.append(tuple(site_rays))
            jumps.append(tuple(sorted(site_jumps, key=lambda p: p[1])))
            site_flanks = []
            for dr, dc in _ORTH_DIRS:
                if valid(r + dr, c + dc) and valid(r + 2 * dr, c + 2 * dc):
                    site_flanks.append((site(r + dr, c + dc), site(r + 2 * dr, c + 2 * dc)))
            flanks.append(tuple(site_flanks))
    return BoardGraph(
        rows=rows,
        cols=cols,
        site_count=n,
        orth=tuple(orth),
        diag=tuple(diag),
        adjacent=tuple(adjacent),
        rays=tuple(rays),
        jumps=tuple(jumps),
        flanks=tuple(flanks),
        tracks=tracks,
    )


# ---------------------------------------------------------------------------
# Occupants: 0 = empty, otherwise (player << 3) | piece_type_index
# ---------------------------------------------------------------------------

def occupant(player: int, type_index: int) -> int:
    return (player << 3) | type_index

def occ_player(occ: int) -> int:
    return occ >> 3

def occ_type(occ: int) -> int:
    return occ & 7


# ---------------------------------------------------------------------------
# Move generators
# ---------------------------------------------------------------------------

# Placement and track movement always use the player's first declared
# piece type (index 0); multi-type sides move all their types by step/leap.
_MAIN_TYPE = 0


@dataclass(frozen=True)
class PlaceGen:
    kind = "place"
    capture_style: Optional[str] = None
    presorted = True

    def moves(self, model: "GameModel", state: "GameState") -> list[Move]:
        mover = state.mover
        pool = state.pools[mover - 1][_MAIN_TYPE]
        if pool is not None and pool <= 0:
            return []
        sites = state.sites
        cache = model.move_cache["place"]
        return [cache[s] for s in range(len(sites)) if not sites[s]]


@dataclass(frozen=True)
class StepGen:
    capture_style: Optional[str] = None  # None | "custodial" | "replace"
    kind = "step"
    presorted = True  # adjacency lists are stored in ascending site order

    def moves(self, model: "GameModel", state: "GameState") -> list[Move]:
        sites = state.sites
        mover = state.mover
        adjacent = model.board.adjacent
        flanks = model.board.flanks
        style = self.capture_style
        step_cache = model.move_cache["step"]
        out: list[Move] = []
        for s, occ in enumerate(sites):
            if not occ or (occ >> 3) != mover:
                continue
            cached = step_cache[s]
            for i, t in enumerate(adjacent[s]):
                tgt = sites[t]
                if not tgt:
                    if style == "custodial":
                        caps = _custodial_captures(sites, flanks[t], s, mover)
                        out.append(cached[i] if not caps else Move(STEP, s, t, caps))
                    else:
                        out.append(cached[i])
                elif style == "replace" and (tgt >> 3) != mover:
                    out.append(Move(STEP, s, t, (t,)))
        return out


def _custodial_captures(
    sites: tuple[int, ...], flank_pairs: tuple[tuple[int, int], ...], frm: int, mover: int
) -> tuple[int, ...]:
    # Post-move occupancy: the mover's piece sits at the destination (the
    # site whose flank pairs these are) and `frm` is vacated.
    caps = []
    for victim, support in flank_pairs:
        v_occ = 0 if victim == frm else sites[victim]
        if not v_occ or (v_occ >> 3) == mover:
            continue
        if support == frm:
            continue  # the vacated square no longer supports a flank
        s_occ = sites[support]
        if s_occ and (s_occ >> 3) == mover:
            caps.append(victim)
    return tuple(sorted(caps))


@dataclass(frozen=True)
class LeapGen:
    kind = "leap"
    capture_style: Optional[str] = "leap"
    presorted = True  # jump tables are stored in ascending landing order

    def moves(self, model: "GameModel", state: "GameState") -> list[Move]:
        sites = state.sites
        mover = state.mover
        jumps = model.board.jumps
        out: list[Move] = []
        for s, occ in enumerate(sites):
            if not occ or (occ >> 3) != mover:
                continue
            for mid, land in jumps[s]:
                m_occ = sites[mid]
                if m_occ and (m_occ >> 3) != mover and not sites[land]:
                    out.append(Move(LEAP, s, land, (mid,)))
        return out


@dataclass(frozen=True)
class TrackGen:
    hit: str = "start"  # "start" | "remove" | "none"
    kind = "dice"
    capture_style: Optional[str] = None
    presorted = False  # track order is the author's, not site order

    def moves(self, model: "GameModel", state: "GameState") -> list[Move]:
        pips = state.pending_dice
        if not pips:
            return []
        mover = state.mover
        track = model.board.track_for(mover)
        if track is None:
            return []
        sites = state.sites
        t = _MAIN_TYPE
        tlen = len(track.sites)
        out: list[Move] = []

        def landing(frm: int, idx: int) -> None:
            if idx >= tlen:
                if track.has_off:
                    out.append(Move(TRACK, frm, OFF_BOARD))
                return
            dest = track.sites[idx]
            occ = sites[dest]
            if not occ:
                out.append(Move(TRACK, frm, dest))
            elif (occ >> 3) != mover and self.hit in ("start", "remove"):
                out.append(Move(TRACK, frm, dest, (dest,)))

        pool = state.pools[mover - 1][t]
        if pool is not None and pool > 0:
            landing(OFF_BOARD, pips - 1)
        for idx, s in enumerate(track.sites):
            occ = sites[s]
            if occ and (occ >> 3) == mover:
                landing(s, idx + pips)
        return out


# ---------------------------------------------------------------------------
# End conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EndRule:
    kind: str  # line | fullBoard | noMoves | capturedAll | bearOffAll
    outcome: str  # "Win" | "Loss" | "Draw", relative to the condition's subject
    line_length: int = 0
    piece: Optional[str] = None  # capturedAll target type name


@dataclass(frozen=True)
class Dice:
    count: int
    faces: tuple[int, ...]

    def roll(self, rng: random.Random) -> int:
        faces = self.faces
        n = len(faces)
        return sum(faces[rng.randrange(n)] for _ in range(self.count))

    @property
    def max_sum(self) -> int:
        return self.count * max(self.faces)


@dataclass(frozen=True)
class PieceType:
    name: str
    pool: Optional[int]  # None = unlimited supply


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------

_ZOBRIST_SEED = 0x5EEDC0DE


@dataclass(frozen=True)
class GameModel:
    name: str
    board: BoardGraph
    piece_types: tuple[tuple[PieceType, ...], tuple[PieceType, ...]]
    placements: tuple[tuple[int, int, int], ...]  # (player, type_index, site)
    play_rules: tuple[Any, ...]
    end_rules: tuple[EndRule, ...]
    chance: Optional[Dice] = None
    track_hit: str = "start"
    player_count: int = 2
    zobrist: dict = field(default_factory=dict, compare=False, repr=False)
    move_cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        rng = random.Random(_ZOBRIST_SEED)
        z_board = [
            [rng.getrandbits(64) for _ in range(32)] for _ in range(self.board.site_count)
        ]
        z_mover = (0, rng.getrandbits(64), rng.getrandbits(64))
        max_dice = self.chance.max_sum if self.chance else 0
        z_dice = [rng.getrandbits(64) for _ in range(max_dice + 2)]
        z_pool = [
            [[rng.getrandbits(64) for _ in range(66)] for _ in range(8)] for _ in range(2)
        ]
        z_off = [[rng.getrandbits(64) for _ in range(130)] for _ in range(2)]
        object.__setattr__(
            self,
            "zobrist",
            {"board": z_board, "mover": z_mover, "dice": z_dice, "pool": z_pool, "off": z_off},
        )
        n = self.board.site_count
        object.__setattr__(
            self,
            "move_cache",
            {
                "place": tuple(Move(PLACE, OFF_BOARD, s) for s in range(n)),
                "step": tuple(
                    tuple(Move(STEP, s, t) for t in self.board.adjacent[s]) for s in range(n)
                ),
            },
        )

    def initial_material(self, player: int, type_index: Optional[int] = None) -> int:
        total = 0
        for ti, pt in enumerate(self.piece_types[player - 1]):
            if type_index is not None and ti != type_index:
                continue
            if pt.pool is not None:
                total += pt.pool
        for p, ti, _site in self.placements:
            if p == player and (type_index is None or ti == type_index):
                total += 1
        return total

    def type_index(self, player: int, name: str) -> Optional[int]:
        for i, pt in enumerate(self.piece_types[player - 1]):
            if pt.name == name:
                return i
        return None

    def type_name(self, player: int, index: int) -> str:
        return self.piece_types[player - 1][index].name


# ---------------------------------------------------------------------------
# State
# ---------------------------------------------------------------------------

class GameState:
    """Immutable position snapshot.  Build via ``initial_state``/``apply_move``."""

    __slots__ = (
        "sites",
        "mover",
        "pending_dice",
        "move_number",
        "pools",
        "off",
        "board_counts",
        "empties",
        "outcome",
        "legal",
        "hash",
    )

    def __init__(
        self,
        sites: tuple[int, ...],
        mover: int,
        pending_dice: Optional[int],
        move_number: int,
        pools: tuple[tuple[Optional[int], ...], ...],
        off: tuple[int, int],
        board_counts: tuple[tuple[int, ...], ...],
        empties: int,
        outcome: Optional[Outcome],
        legal: tuple[Move, ...],
        state_hash: int,
    ):
        self.sites = sites
        self.mover = mover
        self.pending_dice = pending_dice
        self.move_number = move_number
        self.pools = pools
        self.off = off
        self.board_counts = board_counts
        self.empties = empties
        self.outcome = outcome
        self.legal = legal
        self.hash = state_hash

    @property
    def is_ongoing(self) -> bool:
        return self.outcome is None

    def occupant_at(self, site: int) -> Optional[tuple[int, int]]:
        occ = self.sites[site]
        return None if not occ else (occ >> 3, occ & 7)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GameState):
            return NotImplemented
        return (
            self.sites == other.sites
            and self.mover == other.mover
            and self.pending_dice == other.pending_dice
            and self.move_number == other.move_number
            and self.pools == other.pools
            and self.off == other.off
            and self.outcome == other.outcome
        )

    def __hash__(self) -> int:
        return self.hash

    def __repr__(self) -> str:
        status = "ongoing" if self.outcome is None else self.outcome.kind
        return f"GameState(move={self.move_number}, mover=P{self.mover}, {status})"


def _state_hash(model: GameModel, sites, mover, dice, pools, off) -> int:
    z = model.zobrist
    h = z["mover"][mover]
    zb = z["board"]
    for s, occ in enumerate(sites):
        if occ:
            h ^= zb[s][occ]
    h ^= z["dice"][dice + 1 if dice is not None else 0]
    zp = z["pool"]
    for p in (0, 1):
        for t, cnt in enumerate(pools[p]):
            if cnt is not None:
                h ^= zp[p][t][cnt]
        h ^= z["off"][p][off[p]]
    return h


def _line_through(model: GameModel, sites, site: int, player: int, k: int) -> bool:
    rays = model.board.rays[site]
    for axis in range(4):
        run = 1
        for s in rays[2 * axis]:
            if sites[s] and (sites[s] >> 3) == player:
                run += 1
            else:
                break
        for s in rays[2 * axis + 1]:
            if sites[s] and (sites[s] >> 3) == player:
                run += 1
            else:
                break
        if run >= k:
            return True
    return False


def _line_anywhere(model: GameModel, sites, player: int, k: int) -> bool:
    for s, occ in enumerate(sites):
        if occ and (occ >> 3) == player and _line_through(model, sites, s, player, k):
            return True
    return False


def _material(state_counts, pools, player: int, type_index: Optional[int]) -> int:
    p = player - 1
    total = 0
    for t, cnt in enumerate(state_counts[p]):
        if type_index is not None and t != type_index:
            continue
        total += cnt
        pool = pools[p][t]
        if pool is not None:
            total += pool
    return total


def _evaluate_end(
    model: GameModel,
    sites,
    pools,
    off,
    board_counts,
    empties: int,
    mover: int,
    last_mover: Optional[int],
    last_move: Optional[Move],
    raw_moves: Callable[[], list[Move]],
) -> Optional[Outcome]:
    for rule in model.end_rules:
        fired = False
        subject: Optional[int] = None
        if rule.kind == "line":
            k = rule.line_length
            if last_mover is not None:
                if (
                    last_move is not None
                    and last_move.to >= 0
                    and _line_through(model, sites, last_move.to, last_mover, k)
                ):
                    fired, subject = True, last_mover
            else:
                for p in (1, 2):
                    if _line_anywhere(model, sites, p, k):
                        fired, subject = True, p
                        break
        elif rule.kind == "fullBoard":
            if empties == 0:
                fired, subject = True, last_mover
        elif rule.kind == "noMoves":
            if not raw_moves():
                fired = True
                subject = last_mover if last_mover is not None else 3 - mover
        elif rule.kind == "capturedAll":
            victims = (3 - last_mover,) if last_mover is not None else (1, 2)
            for victim in victims:
                ti = model.type_index(victim, rule.piece) if rule.piece else None
                if rule.piece and ti is None:
                    continue  # victim never had this piece type
                if model.initial_material(victim, ti) == 0:
                    continue
                if _material(board_counts, pools, victim, ti) == 0:
                    fired, subject = True, 3 - victim
                    break
        elif rule.kind == "bearOffAll":
            players = (last_mover, 3 - last_mover) if last_mover is not None else (1, 2)
            for p in players:
                if off[p - 1] > 0 and _material(board_counts, pools, p, None) == 0:
                    fired, subject = True, p
                    break
        if not fired:
            continue
        if rule.outcome == "Draw":
            return Outcome("draw")
        if subject is None:
            subject = last_mover if last_mover is not None else 3 - mover
        winner = subject if rule.outcome == "Win" else 3 - subject
        return Outcome("win", winner)
    return None


def _generate_raw(model: GameModel, state: GameState) -> list[Move]:
    rules = model.play_rules
    if len(rules) == 1 and rules[0].presorted:
        return rules[0].moves(model, state)
    moves: list[Move] = []
    for gen in rules:
        moves.extend(gen.moves(model, state))
    if len(moves) > 1:
        moves = sorted(set(moves), key=_SORT_KEY)
    return moves


def _finish_state(model: GameModel, state: GameState, last_mover, last_move) -> GameState:
    """Fill in outcome and legal moves (state arrives with placeholders)."""
    raw_cache: list = []

    def raw() -> list[Move]:
        if not raw_cache:
            raw_cache.append(_generate_raw(model, state))
        return raw_cache[0]

    outcome = _evaluate_end(
        model,
        state.sites,
        state.pools,
        state.off,
        state.board_counts,
        state.empties,
        state.mover,
        last_mover,
        last_move,
        raw,
    )
    if outcome is not None:
        state.outcome = outcome
        state.legal = ()
        return state
    moves = raw()
    if not moves:
        if model.chance is not None:
            state.legal = (PASS_MOVE,)
        else:
            # Totality default: a deterministic game with no move and no
            # applicable end rule is a draw.
            state.outcome = Outcome("draw")
            state.legal = ()
        return state
    state.legal = tuple(moves)
    return state


def initial_state(model: GameModel, rng: random.Random) -> GameState:
    sites = [0] * model.board.site_count
    counts = [[0] * len(model.piece_types[0]), [0] * len(model.piece_types[1])]
    for player, ti, site in model.placements:
        if sites[site]:
            raise OverlappingPlacementsError(f"two placements on site {site}")
        sites[site] = occupant(player, ti)
        counts[player - 1][ti] += 1
    pools = tuple(
        tuple(pt.pool for pt in model.piece_types[p]) for p in (0, 1)
    )
    dice = model.chance.roll(rng) if model.chance else None
    sites_t = tuple(sites)
    off = (0, 0)
    board_counts = (tuple(counts[0]), tuple(counts[1]))
    empties = sites_t.count(0)
    state = GameState(
        sites_t,
        1,
        dice,
        0,
        pools,
        off,
        board_counts,
        empties,
        None,
        (),
        _state_hash(model, sites_t, 1, dice, pools, off),
    )
    return _finish_state(model, state, None, None)


def legal_moves(model: GameModel, state: GameState) -> tuple[Move, ...]:
    """Deterministic, duplicate-free, stably ordered (from, to, kind)."""
    return state.legal


def apply_move(
    model: GameModel, state: GameState, move: Move, rng: random.Random
) -> GameState:
    if move not in state.legal:
        raise IllegalMoveError(f"{move} is not legal in {state!r}")
    mover = state.mover
    sites = list(state.sites)
    pools = [list(state.pools[0]), list(state.pools[1])]
    counts = [list(state.board_counts[0]), list(state.board_counts[1])]
    off = list(state.off)

    if move.kind == PLACE:
        t = _MAIN_TYPE
        sites[move.to] = occupant(mover, t)
        counts[mover - 1][t] += 1
        if pools[mover - 1][t] is not None:
            pools[mover - 1][t] -= 1
    elif move.kind in (STEP, LEAP):
        for victim in move.captures:
            v_occ = sites[victim]
            if v_occ:
                counts[(v_occ >> 3) - 1][v_occ & 7] -= 1
                sites[victim] = 0
        piece = sites[move.frm]
        sites[move.frm] = 0
        sites[move.to] = piece
    elif move.kind == TRACK:
        t = _MAIN_TYPE
        for victim in move.captures:
            v_occ = sites[victim]
            if v_occ:
                vp, vt = v_occ >> 3, v_occ & 7
                counts[vp - 1][vt] -= 1
                sites[victim] = 0
                if model.track_hit == "start" and pools[vp - 1][vt] is not None:
                    pools[vp - 1][vt] += 1
        if move.frm == OFF_BOARD:
            pools[mover - 1][t] -= 1
        else:
            sites[move.frm] = 0
        if move.to == OFF_BOARD:
            if move.frm != OFF_BOARD:
                counts[mover - 1][t] -= 1
                off[mover - 1] += 1
            else:
                off[mover - 1] += 1  # entry directly off a short track
        else:
            sites[move.to] = occupant(mover, t)
            if move.frm == OFF_BOARD:
                counts[mover - 1][t] += 1
    # PASS: no board change

    new_mover = 3 - mover
    dice = model.chance.roll(rng) if model.chance else None
    sites_t = tuple(sites)
    pools_t = (tuple(pools[0]), tuple(pools[1]))
    counts_t = (tuple(counts[0]), tuple(counts[1]))
    off_t = (off[0], off[1])
    empties = sites_t.count(0)
    new_state = GameState(
        sites_t,
        new_mover,
        dice,
        state.move_number + 1,
        pools_t,
        off_t,
        counts_t,
        empties,
        None,
        (),
        _state_hash(model, sites_t, new_mover, dice, pools_t, off_t),
    )
    return _finish_state(model, new_state, mover, move)


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Trial:
    """One recorded playout: reproducible from (model, agent configs, seed)."""

    game_index: int
    seed: int
    config_p1: Any
    config_p2: Any
    moves: tuple[Move, ...]
    hashes: tuple[int, ...]
    stats: tuple[Any, ...]
    branching: tuple[int, ...]
    outcome: Outcome
    move_count: int


def playout(
    model: GameModel,
    agent_p1: Any,
    agent_p2: Any,
    seed: int,
    move_cap: int,
    game_index: int = 0,
) -> Trial:
    """Self-play one game; agents expose ``select(model, state, rng)``."""
    if move_cap < 1:
        raise ValueError("move_cap must be >= 1")
    rng = random.Random(seed)
    state = initial_state(model, rng)
    moves: list[Move] = []
    hashes: list[int] = [state.hash]
    stats: list[Any] = []
    branching: list[int] = []
    outcome: Optional[Outcome] = state.outcome
    while outcome is None:
        if state.move_number >= move_cap:
            outcome = Outcome("timeout")
            break
        agent = agent_p1 if state.mover == 1 else agent_p2
        move, move_stats = agent.select(model, state, rng)
        branching.append(len(state.legal))
        moves.append(move)
        stats.append(move_stats)
        state = apply_move(model, state, move, rng)
        hashes.append(state.hash)
        outcome = state.outcome
    return Trial(
        game_index=game_index,
        seed=seed,
        config_p1=getattr(agent_p1, "config", None),
        config_p2=getattr(agent_p2, "config", None),
        moves=tuple(moves),
        hashes=tuple(hashes),
        stats=tuple(stats),
        branching=tuple(branching),
        outcome=outcome,
        move_count=len(moves),
    )


# ---------------------------------------------------------------------------
# Compilation
# ---------------------------------------------------------------------------

def _named(node: LudemeNode, name: str) -> Any:
    for arg in node.args:
        if isinstance(arg, NamedArg) and arg.name == name:
            return arg.value
    return None


def _child_nodes(args) -> list[LudemeNode]:
    return [a for a in args if isinstance(a, LudemeNode)]


def compile_game(tree: LudemeTree, catalog: Catalog | None = None) -> GameModel:
    """Compile a complete, catalog-valid tree into an executable model."""
    catalog = catalog or v1_catalog()
    issues: list[tuple[str, str]] = []
    root = tree.root
    name = next((a for a in root.args if isinstance(a, str)), "unnamed")

    equipment = next((a for a in root.args if isinstance(a, LudemeNode) and a.keyword == "equipment"), None)
    rules = next((a for a in root.args if isinstance(a, LudemeNode) and a.keyword == "rules"), None)
    if equipment is None or rules is None:
        raise CompileError([("UnknownLudeme", "game requires (equipment ...) and (rules ...)")])
    if hole_count(tree) > 0:
        raise CompileError([("UnknownLudeme", "tree has unresolved holes; complete it first")])

    items: list[LudemeNode] = []
    for arg in equipment.args:
        if isinstance(arg, ArgSet):
            items.extend(a for a in arg.items if isinstance(a, LudemeNode))
        elif isinstance(arg, LudemeNode):
            items.append(arg)

    rows = cols = 0
    track_nodes: list[LudemeNode] = []
    piece_decls: list[tuple[Optional[PieceType], Optional[PieceType]]] = []
    piece_types: tuple[list[PieceType], list[PieceType]] = ([], [])
    place_nodes: list[LudemeNode] = []
    dice: Optional[Dice] = None

    for item in items:
        kw = item.keyword
        if kw == "board":
            shape = _child_nodes(item.args)[0] if _child_nodes(item.args) else None
            if shape is None:
                issues.append(("UnknownLudeme", "board requires a shape"))
                continue
            ints = [a for a in shape.args if isinstance(a, int)]
            if shape.keyword == "square" and ints:
                rows = cols = ints[0]
            elif shape.keyword == "rect" and len(ints) >= 2:
                rows, cols = ints[0], ints[1]
            else:
                issues.append(("UnknownLudeme", f"unsupported board shape {shape.keyword!r}"))
            track_nodes = [n for n in _child_nodes(item.args)[1:] if n.keyword == "track"]
        elif kw in ("ball", "cross", "disc", "king"):
            owner = next((a for a in item.args if isinstance(a, PlayerRef)), None)
            if owner is None:
                issues.append(("UnknownLudeme", f"piece {kw!r} requires an owner"))
                continue
            count = _named(item, "count")
            piece_types[owner.player - 1].append(PieceType(kw, count))
        elif kw == "place":
            place_nodes.append(item)
        elif kw == "dice":
            ints = [a for a in item.args if isinstance(a, int)]
            if len(ints) >= 2:
                dice = Dice(ints[0], tuple(ints[1:]))
            else:
                issues.append(("UnknownLudeme", "dice requires a count and at least one face"))
        else:
            issues.append(("UnknownLudeme", f"unknown equipment {kw!r}"))

    if rows == 0 or cols == 0:
        issues.append(("UnknownLudeme", "no board declared"))
        raise CompileError(issues)
    site_count = rows * cols

    tracks: list[Optional[Track]] = [None, None]
    for tn in track_nodes:
        owner = next((a for a in tn.args if isinstance(a, PlayerRef)), None)
        sites = [a for a in tn.args if isinstance(a, int)]
        has_off = any(isinstance(a, LudemeNode) and a.keyword == "off" for a in tn.args)
        if owner is None or not sites:
            issues.append(("ContradictoryRules", "track requires an owner and sites"))
            continue
        if len(set(sites)) != len(sites):
            issues.append(("ContradictoryRules", f"track for P{owner.player} repeats a site"))
        if any(s >= site_count for s in sites):
            issues.append(("ContradictoryRules", f"track for P{owner.player} leaves the board"))
        if tracks[owner.player - 1] is not None:
            issues.append(("ContradictoryRules", f"P{owner.player} has two tracks"))
        tracks[owner.player - 1] = Track(owner.player, tuple(sites), has_off)

    board = build_board(rows, cols, (tracks[0], tracks[1]))

    placements: list[tuple[int, int, int]] = []
    for pn in place_nodes:
        piece = next((a for a in pn.args if isinstance(a, LudemeNode)), None)
        owner = next((a for a in pn.args if isinstance(a, PlayerRef)), None)
        sites = [a for a in pn.args if isinstance(a, int)]
        if piece is None or owner is None:
            issues.append(("UnknownLudeme", "place requires a piece and an owner"))
            continue
        ti = next(
            (i for i, pt in enumerate(piece_types[owner.player - 1]) if pt.name == piece.keyword),
            None,
        )
        if ti is None:
            issues.append(
                ("UnknownLudeme", f"piece {piece.keyword!r} is not declared for P{owner.player}")
            )
            continue
        for s in sites:
            if s >= site_count:
                issues.append(("ContradictoryRules", f"placement site {s} is off the board"))
            else:
                placements.append((owner.player, ti, s))

    if not piece_types[0] or not piece_types[1]:
        issues.append(("UnknownLudeme", "both players need a declared piece type"))

    play_rules: list[Any] = []
    end_rules: list[EndRule] = []
    for rule in _child_nodes(rules.args):
        if rule.keyword == "play":
            for gen in _child_nodes(rule.args):
                g = _compile_generator(gen, issues)
                if g is not None:
                    play_rules.append(g)
        elif rule.keyword == "end":
            er = _compile_end(rule, issues)
            if er is not None:
                end_rules.append(er)
        else:
            issues.append(("UnknownLudeme", f"unknown rule {rule.keyword!r}"))

    if not play_rules:
        issues.append(("NoPlayRule", "no (play ...) rule"))
    if not end_rules:
        issues.append(("NoEndRule", "no (end ...) rule"))

    uses_dice = any(isinstance(g, TrackGen) for g in play_rules)
    if uses_dice:
        if dice is None:
            issues.append(("ContradictoryRules", "(moveByDice) requires (dice ...) equipment"))
        if tracks[0] is None or tracks[1] is None:
            issues.append(("ContradictoryRules", "(moveByDice) requires a (track ...) per player on the board"))
    if any(r.kind == "bearOffAll" for r in end_rules) and (tracks[0] is None or tracks[1] is None):
        issues.append(("ContradictoryRules", "(bearOffAll) requires tracks"))
    for r in end_rules:
        if r.kind == "capturedAll" and r.piece is not None:
            declared = any(
                pt.name == r.piece for side in piece_types for pt in side
            )
            if not declared:
                issues.append(
                    ("ContradictoryRules", f"(capturedAll {r.piece}) references an undeclared piece")
                )

    if issues:
        raise CompileError(issues)

    track_hit = next((g.hit for g in play_rules if isinstance(g, TrackGen)), "start")
    return GameModel(
        name=name,
        board=board,
        piece_types=(tuple(piece_types[0]), tuple(piece_types[1])),
        placements=tuple(placements),
        play_rules=tuple(play_rules),
        end_rules=tuple(end_rules),
        chance=dice,
        track_hit=track_hit,
    )


def _compile_generator(node: LudemeNode, issues: list) -> Optional[Any]:
    kw = node.keyword
    if kw == "to":
        return PlaceGen()
    if kw == "step":
        mod = next((a.keyword for a in node.args if isinstance(a, LudemeNode)), None)
        if mod == "custodial":
            return StepGen("custodial")
        if mod == "replace":
            return StepGen("replace")
        if mod is None:
            return StepGen(None)
        issues.append(("UnknownLudeme", f"unknown capture modifier {mod!r}"))
        return None
    if kw == "leap":
        return LeapGen()
    if kw == "moveByDice":
        hit = _named(node, "hit")
        policy = hit.keyword if isinstance(hit, LudemeNode) else "start"
        return TrackGen(policy)
    issues.append(("UnknownLudeme", f"unknown move generator {kw!r}"))
    return None


_DEFAULT_END_OUTCOME = {
    "line": "Win",
    "fullBoard": "Draw",
    "noMoves": "Win",
    "capturedAll": "Win",
    "bearOffAll": "Win",
}


def _compile_end(node: LudemeNode, issues: list) -> Optional[EndRule]:
    children = _child_nodes(node.args)
    if not children:
        issues.append(("UnknownLudeme", "(end ...) requires a condition"))
        return None
    cond = children[0]
    result = next((c for c in children[1:] if c.keyword == "result"), None)
    kind = cond.keyword
    if kind not in _DEFAULT_END_OUTCOME:
        issues.append(("UnknownLudeme", f"unknown end condition {kind!r}"))
        return None
    outcome = _DEFAULT_END_OUTCOME[kind]
    if kind == "fullBoard":
        embedded = next((c.keyword for c in _child_nodes(cond.args)), None)
        if embedded in ("Win", "Loss", "Draw"):
            outcome = embedded
    if result is not None:
        out_node = next(
            (c for c in _child_nodes(result.args) if c.keyword in ("Win", "Loss", "Draw")), None
        )
        if out_node is not None:
            outcome = out_node.keyword
    line_length = 0
    if kind == "line":
        ll = _named(cond, "length")
        if not isinstance(ll, int) or ll < 1:
            issues.append(("UnknownLudeme", "(line ...) requires length: >= 1"))
            return None
        line_length = ll
    piece = None
    if kind == "capturedAll":
        ref = next((c.keyword for c in _child_nodes(cond.args)), None)
        piece = ref
    return EndRule(kind=kind, outcome=outcome, line_length=line_length, piece=piece)
