"""The fixed v1 ludeme vocabulary and tree validation against it.

The catalog maps category ids to ludeme signatures (keyword, positional
parameter specs, named-argument specs).  Validation walks a parsed tree
top-down, matching every node against the signature its position expects,
and collects issues as data rather than failing fast.  Holes are counted
and their explicit options are checked against the hole's category.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .grammar import (
    Arg,
    ArgSet,
    Hole,
    LudemeNode,
    LudemeTree,
    NamedArg,
    PlayerRef,
    Span,
    _lex,
    _Parser,
)

CATALOG_VERSION = "1"


# ---------------------------------------------------------------------------
# Signature model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamSpec:
    kind: str  # "int" | "str" | "player" | "node" | "set"
    label: str
    category: str | None = None  # node/set item category
    min_count: int = 1
    max_count: int | None = 1  # None = unbounded
    int_range: tuple[int, int] | None = None


@dataclass(frozen=True)
class NamedSpec:
    name: str
    required: bool = False
    int_range: tuple[int, int] | None = None
    enum: tuple[str, ...] | None = None


@dataclass(frozen=True)
class Signature:
    keyword: str
    category: str
    params: tuple[ParamSpec, ...] = ()
    named: tuple[NamedSpec, ...] = ()
    default: str = ""  # canonical instantiation used for open hole expansion

    def named_spec(self, name: str) -> NamedSpec | None:
        for spec in self.named:
            if spec.name == name:
                return spec
        return None


@dataclass(frozen=True)
class Catalog:
    categories: dict[str, tuple[Signature, ...]]

    def __post_init__(self) -> None:
        for cat, sigs in self.categories.items():
            seen: set[str] = set()
            for sig in sigs:
                if sig.keyword in seen:
                    raise ValueError(f"duplicate keyword {sig.keyword!r} in category {cat!r}")
                seen.add(sig.keyword)
                for p in sig.params:
                    if p.category is not None and p.category not in self.categories:
                        raise ValueError(
                            f"signature {sig.keyword!r} references unknown category {p.category!r}"
                        )

    def lookup(self, category: str, keyword: str) -> Signature | None:
        for sig in self.categories.get(category, ()):
            if sig.keyword == keyword:
                return sig
        return None

    def members(self, category: str) -> tuple[Signature, ...]:
        return self.categories.get(category, ())

    def default_node(self, sig: Signature) -> LudemeNode:
        return _parse_fragment(sig.default or f"({sig.keyword})")


def _parse_fragment(text: str) -> LudemeNode:
    issues: list = []
    tokens = _lex(text, issues)
    node = _Parser(tokens, issues).parse_form()
    if node is None or issues:
        raise ValueError(f"bad catalog fragment {text!r}")
    return node


# ---------------------------------------------------------------------------
# The v1 vocabulary
# ---------------------------------------------------------------------------

def _piece_decl(keyword: str) -> Signature:
    return Signature(
        keyword,
        "equipmentItem",
        params=(ParamSpec("player", "owner"),),
        named=(NamedSpec("count", int_range=(1, 64)),),
        default=f"({keyword} P1)",
    )


def _zero_arg(keyword: str, category: str) -> Signature:
    return Signature(keyword, category, default=f"({keyword})")


@lru_cache(maxsize=1)
def v1_catalog() -> Catalog:
    node = ParamSpec  # alias for brevity below
    categories: dict[str, tuple[Signature, ...]] = {
        "game": (
            Signature(
                "game",
                "game",
                params=(
                    node("str", "name"),
                    node("node", "mode", category="mode"),
                    node("node", "equipment", category="equipment"),
                    node("node", "rules", category="rules"),
                ),
                default='(game "Untitled" (mode 2) (equipment {(board (square 3) (square))'
                " (ball P1) (cross P2)}) (rules (play (to (mover) (empty)))"
                " (end (line length:3) (result (mover) Win))))",
            ),
        ),
        "mode": (
            Signature(
                "mode",
                "mode",
                params=(
                    node("int", "players", int_range=(2, 2)),
                    node("node", "flag", category="modeFlag", min_count=0),
                ),
                default="(mode 2)",
            ),
        ),
        "modeFlag": (_zero_arg("addToEmpty", "modeFlag"),),
        "equipment": (
            Signature(
                "equipment",
                "equipment",
                params=(node("set", "items", category="equipmentItem", max_count=1),),
                default="(equipment {(board (square 3) (square)) (ball P1) (cross P2)})",
            ),
        ),
        "equipmentItem": (
            Signature(
                "board",
                "equipmentItem",
                params=(
                    node("node", "shape", category="shape"),
                    node("node", "tiling", category="tiling", min_count=0),
                    node("node", "track", category="track", min_count=0, max_count=2),
                ),
                default="(board (square 3) (square))",
            ),
            _piece_decl("ball"),
            _piece_decl("cross"),
            _piece_decl("disc"),
            _piece_decl("king"),
            Signature(
                "place",
                "equipmentItem",
                params=(
                    node("node", "piece", category="pieceRef"),
                    node("player", "owner"),
                    node("int", "site", int_range=(0, 4095), max_count=None),
                ),
                default="(place disc P1 0)",
            ),
            Signature(
                "dice",
                "equipmentItem",
                params=(
                    node("int", "count", int_range=(1, 8)),
                    node("int", "face", int_range=(0, 64), max_count=None),
                ),
                default="(dice 2 0 1)",
            ),
        ),
        "shape": (
            Signature(
                "square", "shape", params=(node("int", "size", int_range=(1, 12)),),
                default="(square 3)",
            ),
            Signature(
                "rect",
                "shape",
                params=(
                    node("int", "rows", int_range=(1, 12)),
                    node("int", "cols", int_range=(1, 12)),
                ),
                default="(rect 3 4)",
            ),
        ),
        "tiling": (_zero_arg("square", "tiling"),),
        "track": (
            Signature(
                "track",
                "track",
                params=(
                    node("player", "owner"),
                    node("int", "site", int_range=(0, 4095), max_count=None),
                    node("node", "exit", category="offMark", min_count=0),
                ),
                default="(track P1 0 1 2 off)",
            ),
        ),
        "offMark": (_zero_arg("off", "offMark"),),
        "pieceRef": (
            _zero_arg("ball", "pieceRef"),
            _zero_arg("cross", "pieceRef"),
            _zero_arg("disc", "pieceRef"),
            _zero_arg("king", "pieceRef"),
        ),
        "rules": (
            Signature(
                "rules",
                "rules",
                params=(node("node", "rule", category="ruleItem", max_count=None),),
                default="(rules (play (to (mover) (empty))) (end (line length:3)"
                " (result (mover) Win)))",
            ),
        ),
        "ruleItem": (
            Signature(
                "play",
                "ruleItem",
                params=(node("node", "move", category="moveGen", max_count=None),),
                default="(play (to (mover) (empty)))",
            ),
            Signature(
                "end",
                "ruleItem",
                params=(
                    node("node", "condition", category="end"),
                    node("node", "result", category="resultSpec", min_count=0),
                ),
                default="(end (line length:3) (result (mover) Win))",
            ),
        ),
        "moveGen": (
            Signature(
                "to",
                "moveGen",
                params=(
                    node("node", "who", category="who"),
                    node("node", "where", category="where"),
                ),
                default="(to (mover) (empty))",
            ),
            Signature(
                "step",
                "moveGen",
                params=(node("node", "capture", category="captureMod", min_count=0),),
                default="(step)",
            ),
            _zero_arg("leap", "moveGen"),
            Signature(
                "moveByDice",
                "moveGen",
                named=(NamedSpec("hit", enum=("start", "remove", "none")),),
                default="(moveByDice)",
            ),
        ),
        "who": (_zero_arg("mover", "who"),),
        "where": (_zero_arg("empty", "where"),),
        "captureMod": (
            _zero_arg("custodial", "captureMod"),
            _zero_arg("replace", "captureMod"),
        ),
        "end": (
            Signature(
                "line",
                "end",
                named=(NamedSpec("length", required=True, int_range=(1, 12)),),
                default="(line length:3)",
            ),
            Signature(
                "fullBoard",
                "end",
                params=(node("node", "outcome", category="outcome", min_count=0),),
                default="(fullBoard Draw)",
            ),
            _zero_arg("noMoves", "end"),
            Signature(
                "capturedAll",
                "end",
                params=(node("node", "piece", category="pieceRef", min_count=0),),
                default="(capturedAll)",
            ),
            _zero_arg("bearOffAll", "end"),
        ),
        "resultSpec": (
            Signature(
                "result",
                "resultSpec",
                params=(
                    node("node", "who", category="who"),
                    node("node", "outcome", category="outcome"),
                ),
                default="(result (mover) Win)",
            ),
        ),
        "outcome": (
            _zero_arg("Win", "outcome"),
            _zero_arg("Loss", "outcome"),
            _zero_arg("Draw", "outcome"),
        ),
    }
    return Catalog(categories)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationIssue:
    code: str  # unknown-keyword | arity | out-of-range | bad-argument | hole
    message: str
    span: Span


@dataclass(frozen=True)
class ValidationReport:
    is_complete: bool
    hole_count: int
    issues: tuple[ValidationIssue, ...] = ()

    def messages(self) -> list[str]:
        return [f"{i.code}: {i.message}" for i in self.issues]


class _Validator:
    def __init__(self, catalog: Catalog):
        self.catalog = catalog
        self.issues: list[ValidationIssue] = []
        self.holes = 0

    def issue(self, code: str, message: str, span: Span) -> None:
        self.issues.append(ValidationIssue(code, message, span))

    def check_node(self, node: LudemeNode, category: str) -> None:
        sig = self.catalog.lookup(category, node.keyword)
        if sig is None:
            self.issue(
                "unknown-keyword",
                f"unknown ludeme {node.keyword!r} where {category!r} expected",
                node.span,
            )
            return
        positional = [a for a in node.args if not isinstance(a, NamedArg)]
        named = [a for a in node.args if isinstance(a, NamedArg)]
        self.match_positional(node, sig, positional)
        self.match_named(node, sig, named)

    def match_positional(self, node: LudemeNode, sig: Signature, args: list[Arg]) -> None:
        idx = 0
        for spec in sig.params:
            taken = 0
            while idx < len(args) and (spec.max_count is None or taken < spec.max_count):
                arg = args[idx]
                if not self.accepts(spec, arg):
                    break
                idx += 1
                taken += 1
                self.check_arg(spec, arg, node)
            if taken < spec.min_count:
                self.issue(
                    "arity",
                    f"{node.keyword!r} is missing argument {spec.label!r}",
                    node.span,
                )
        for arg in args[idx:]:
            span = arg.span if isinstance(arg, (LudemeNode, Hole)) else node.span
            self.issue("arity", f"unexpected argument in {node.keyword!r}", span)

    def accepts(self, spec: ParamSpec, arg: Arg) -> bool:
        if isinstance(arg, Hole):
            # Accept into the slot so the category mismatch is reported as a
            # hole issue rather than an opaque arity pair.
            return spec.kind in ("node", "set")
        if spec.kind == "int":
            return isinstance(arg, int)
        if spec.kind == "str":
            return isinstance(arg, str)
        if spec.kind == "player":
            return isinstance(arg, PlayerRef)
        if spec.kind == "node":
            return isinstance(arg, LudemeNode) and self.catalog.lookup(
                spec.category or "", arg.keyword
            ) is not None
        if spec.kind == "set":
            return isinstance(arg, ArgSet)
        return False

    def check_arg(self, spec: ParamSpec, arg: Arg, parent: LudemeNode) -> None:
        if isinstance(arg, Hole):
            self.check_hole(arg, spec.category or "")
            return
        if spec.kind == "int":
            assert isinstance(arg, int)
            lo, hi = spec.int_range or (0, 1 << 31)
            if arg < lo:
                self.issue("out-of-range", f"integer out of range, {spec.label} ≥ {lo}", parent.span)
            elif arg > hi:
                self.issue("out-of-range", f"integer out of range, {spec.label} ≤ {hi}", parent.span)
        elif spec.kind == "node":
            assert isinstance(arg, LudemeNode)
            self.check_node(arg, spec.category or "")
        elif spec.kind == "set":
            assert isinstance(arg, ArgSet)
            for item in arg.items:
                if isinstance(item, LudemeNode):
                    self.check_node(item, spec.category or "")
                elif isinstance(item, Hole):
                    if item.category != spec.category:
                        self.issue(
                            "hole",
                            f"hole category {item.category!r} where {spec.category!r} expected",
                            item.span,
                        )
                    self.check_hole(item, spec.category or "")
                else:
                    self.issue("bad-argument", f"set in {parent.keyword!r} may only hold ludemes", parent.span)

    def match_named(self, node: LudemeNode, sig: Signature, named: list[NamedArg]) -> None:
        seen: set[str] = set()
        for arg in named:
            seen.add(arg.name)
            spec = sig.named_spec(arg.name)
            if spec is None:
                self.issue("bad-argument", f"{node.keyword!r} has no named argument {arg.name!r}", node.span)
                continue
            if spec.int_range is not None:
                if not isinstance(arg.value, int):
                    self.issue("bad-argument", f"{arg.name!r} must be an integer", node.span)
                else:
                    lo, hi = spec.int_range
                    if arg.value < lo:
                        self.issue("out-of-range", f"integer out of range, {arg.name} ≥ {lo}", node.span)
                    elif arg.value > hi:
                        self.issue("out-of-range", f"integer out of range, {arg.name} ≤ {hi}", node.span)
            elif spec.enum is not None:
                ok = isinstance(arg.value, LudemeNode) and not arg.value.args and arg.value.keyword in spec.enum
                if not ok:
                    self.issue(
                        "bad-argument",
                        f"{arg.name!r} must be one of {', '.join(spec.enum)}",
                        node.span,
                    )
        for spec in sig.named:
            if spec.required and spec.name not in seen:
                self.issue("arity", f"{node.keyword!r} requires {spec.name}:", node.span)

    def check_hole(self, hole: Hole, expected_category: str) -> None:
        self.holes += 1
        if hole.category != expected_category:
            self.issue(
                "hole",
                f"hole category {hole.category!r} where {expected_category!r} expected",
                hole.span,
            )
            return
        if hole.category not in self.catalog.categories:
            self.issue("hole", f"unknown hole category {hole.category!r}", hole.span)
            return
        for option in hole.options:
            self.check_node(option, hole.category)


def validate(tree: LudemeTree, catalog: Catalog | None = None) -> ValidationReport:
    """Check a parsed tree against the catalog.

    ``is_complete`` holds exactly when the tree has no holes and no issues;
    unknown keywords, arity mismatches and out-of-range integers each
    produce one issue carrying the offending node's source span.
    """
    catalog = catalog or v1_catalog()
    v = _Validator(catalog)
    v.check_node(tree.root, "game")
    return ValidationReport(
        is_complete=(v.holes == 0 and not v.issues),
        hole_count=v.holes,
        issues=tuple(v.issues),
    )
