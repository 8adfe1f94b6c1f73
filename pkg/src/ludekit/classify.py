"""Seven-feature rule taxonomy and class assignment.

``extract_features`` reads everything from the compiled rules, never from
play statistics: chance from dice equipment, objective from the first end
rule, symmetry from the two sides' material, movement from the play-rule
kinds, and conflict/capture from the capture machinery.  ``assign_class``
is a total decision table from feature vectors to the taxonomy labels;
sowing and territory rows are reserved (nothing in the v1 vocabulary can
express them) but remain valid labels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .engine import GameModel
from .grammar import LudemeTree

DETERMINATIONS = ("Deterministic", "Stochastic")
OBJECTIVES = ("Alignment", "Capture", "Race", "Blockade", "Territory", "Traversal", "Other")
BALANCES = ("Symmetric", "Asymmetric")
PIECE_NATURES = ("Identical", "Differentiated")
MOVE_KINDS = ("Placement", "Regular", "Sowing", "DiceDriven")
CONFLICTS = ("None", "SentBack", "Removed")
CAPTURE_METHODS = ("None", "Replacement", "Leaping", "Custodial", "Other")


class UnderivableFeatureError(Exception):
    def __init__(self, feature: str, reason: str):
        self.feature = feature
        super().__init__(f"feature {feature!r} is not derivable: {reason}")


@dataclass(frozen=True)
class FeatureVector:
    determination: str
    main_objective: str
    balance_of_forces: str
    piece_nature: str
    move_kind: str
    conflict_resolution: str
    capture_method: str

    def __post_init__(self) -> None:
        checks = (
            (self.determination, DETERMINATIONS),
            (self.main_objective, OBJECTIVES),
            (self.balance_of_forces, BALANCES),
            (self.piece_nature, PIECE_NATURES),
            (self.move_kind, MOVE_KINDS),
            (self.conflict_resolution, CONFLICTS),
            (self.capture_method, CAPTURE_METHODS),
        )
        for value, allowed in checks:
            if value not in allowed:
                raise ValueError(f"{value!r} not in {allowed}")

    def as_tuple(self) -> tuple[str, ...]:
        return (
            self.determination,
            self.main_objective,
            self.balance_of_forces,
            self.piece_nature,
            self.move_kind,
            self.conflict_resolution,
            self.capture_method,
        )

    def __str__(self) -> str:
        return "(" + ", ".join(self.as_tuple()) + ")"


@dataclass(frozen=True)
class ClassLabel:
    main: str  # "SimpleRace" | "ComplexRace" | "PureSkill"
    subtype: Optional[str] = None

    def __str__(self) -> str:
        return self.main if self.subtype is None else f"{self.main}({self.subtype})"


COMPLEX_RACE_SUBTYPES = ("ReenterFromStart", "Immobilised", "Eliminated")
PURE_SKILL_SUBTYPES = (
    "Traversal",
    "Alignment",
    "Blockade",
    "Sowing",
    "SymmetricElimination",
    "AsymmetricElimination",
    "SelectiveCaptureSymmetric",
    "SelectiveCaptureAsymmetric",
    "TerritorialContest",
)

_OBJECTIVE_OF_END = {
    "line": "Alignment",
    "capturedAll": "Capture",
    "bearOffAll": "Race",
    "noMoves": "Blockade",
    "fullBoard": "Other",
}


def _tracks_overlap(model: GameModel) -> bool:
    t1, t2 = model.board.tracks
    if t1 is None or t2 is None:
        return False
    return bool(set(t1.sites) & set(t2.sites))


def extract_features(model: GameModel, tree: LudemeTree) -> FeatureVector:
    """Features are purely rule-derived; raises when genuinely ambiguous."""
    determination = "Stochastic" if model.chance is not None else "Deterministic"

    main_objective = _OBJECTIVE_OF_END[model.end_rules[0].kind]

    side_counts = tuple(model.initial_material(p) for p in (1, 2))
    side_types = tuple(len(model.piece_types[p - 1]) for p in (1, 2))
    symmetric = side_counts[0] == side_counts[1] and side_types[0] == side_types[1]
    balance = "Symmetric" if symmetric else "Asymmetric"

    piece_nature = "Identical" if max(side_types) <= 1 else "Differentiated"

    kinds = {g.kind for g in model.play_rules}
    if "dice" in kinds:
        move_kind = "DiceDriven"
    elif "step" in kinds or "leap" in kinds:
        move_kind = "Regular"
    else:
        move_kind = "Placement"

    styles = {g.capture_style for g in model.play_rules if g.capture_style}
    hits = move_kind == "DiceDriven" and model.track_hit in ("start", "remove") and _tracks_overlap(model)
    if hits:
        styles.add("dice")
    if len(styles) > 1:
        raise UnderivableFeatureError(
            "captureMethod", f"mixed capture styles {sorted(styles)}"
        )
    style = next(iter(styles), None)
    capture_method = {
        None: "None",
        "replace": "Replacement",
        "leap": "Leaping",
        "custodial": "Custodial",
        "dice": "Other",
    }[style]

    if hits:
        conflict = "SentBack" if model.track_hit == "start" else "Removed"
    elif capture_method != "None":
        conflict = "Removed"
    else:
        conflict = "None"

    return FeatureVector(
        determination=determination,
        main_objective=main_objective,
        balance_of_forces=balance,
        piece_nature=piece_nature,
        move_kind=move_kind,
        conflict_resolution=conflict,
        capture_method=capture_method,
    )


def assign_class(f: FeatureVector) -> ClassLabel:
    """Total decision table over the feature-vector domain.

    Row mapping, documented against the taxonomy's example games:

    * Race + no conflict            -> SimpleRace       (Game of the Goose)
    * Race + hits re-entered        -> ComplexRace(ReenterFromStart) (Pachisi)
    * Race + hits removed           -> ComplexRace(Eliminated)       (Tab)
    * Traversal                     -> PureSkill(Traversal)   (Chinese Checkers)
    * Alignment                     -> PureSkill(Alignment)   (Merels)
    * Blockade                      -> PureSkill(Blockade)    (Mu Torere)
    * Sowing moves                  -> PureSkill(Sowing)      (Mancala; reserved)
    * Territory                     -> PureSkill(TerritorialContest) (Go; reserved)
    * Capture + leaping + symmetric -> PureSkill(SymmetricElimination)  (Draughts)
    * Capture + leaping + asymmetric-> PureSkill(AsymmetricElimination) (Fox & Geese)
    * Capture + other + symmetric   -> PureSkill(SelectiveCaptureSymmetric)  (Chess)
    * Capture + other + asymmetric  -> PureSkill(SelectiveCaptureAsymmetric) (Hnefatafl)
    * Other objective               -> Alignment row for placement games,
                                       Blockade row otherwise (nearest rows;
                                       the taxonomy has no mixed/other class)
    """
    if f.move_kind == "Sowing":
        return ClassLabel("PureSkill", "Sowing")
    if f.main_objective == "Race":
        if f.conflict_resolution == "SentBack":
            return ClassLabel("ComplexRace", "ReenterFromStart")
        if f.conflict_resolution == "Removed":
            return ClassLabel("ComplexRace", "Eliminated")
        return ClassLabel("SimpleRace")
    if f.main_objective == "Traversal":
        return ClassLabel("PureSkill", "Traversal")
    if f.main_objective == "Alignment":
        return ClassLabel("PureSkill", "Alignment")
    if f.main_objective == "Blockade":
        return ClassLabel("PureSkill", "Blockade")
    if f.main_objective == "Territory":
        return ClassLabel("PureSkill", "TerritorialContest")
    if f.main_objective == "Capture":
        symmetric = f.balance_of_forces == "Symmetric"
        if f.capture_method == "Leaping":
            return ClassLabel(
                "PureSkill", "SymmetricElimination" if symmetric else "AsymmetricElimination"
            )
        return ClassLabel(
            "PureSkill",
            "SelectiveCaptureSymmetric" if symmetric else "SelectiveCaptureAsymmetric",
        )
    # "Other" objective (e.g. a bare fullBoard rule)
    if f.move_kind == "Placement":
        return ClassLabel("PureSkill", "Alignment")
    return ClassLabel("PureSkill", "Blockade")


def classify_line(name: str, model: GameModel, tree: LudemeTree) -> str:
    """One CLI output line: name<TAB>class<TAB>feature-vector."""
    features = extract_features(model, tree)
    return f"{name}\t{assign_class(features)}\t{features}"
