"""Lexer, parser and canonical printer for the ludeme description language.

A game is written as a single S-expression whose head keyword is ``game``.
Forms contain keywords, integers, double-quoted strings, ``name:value``
named arguments, ``{...}`` space-separated sets, ``P1``/``P2`` player
references, and ``?category{option|option}`` holes marking unknown rules
in a partial description.  ``#`` starts a line comment.

Parsing collects every problem it finds instead of stopping at the first
one; a failed parse raises :class:`ParseError` carrying the full issue
list with line/column positions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

Span = tuple[int, int]  # byte offsets into the source text, half-open

KEYWORD_FIRST = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
KEYWORD_REST = KEYWORD_FIRST | set("0123456789")

# Zero-argument keywords printed without parentheses (outcome values and
# the track bear-off marker); ``(Win)`` and ``Win`` parse to the same node.
ATOM_KEYWORDS = frozenset({"Win", "Loss", "Draw", "off"})

# Issue codes
UNBALANCED_PAREN = "UnbalancedParen"
EMPTY_FORM = "EmptyForm"
BAD_TOKEN = "BadToken"
ROOT_NOT_GAME = "RootNotGame"


# ---------------------------------------------------------------------------
# Syntax tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlayerRef:
    player: int  # 1 or 2


@dataclass(frozen=True)
class LudemeNode:
    keyword: str
    args: tuple["Arg", ...] = ()
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class NamedArg:
    name: str
    value: "Arg"


@dataclass(frozen=True)
class ArgSet:
    items: tuple["Arg", ...]


@dataclass(frozen=True)
class Hole:
    """An unknown rule slot: a catalog category plus optional explicit options.

    No explicit options means "every catalog member of the category".
    """

    category: str
    options: tuple[LudemeNode, ...] = ()
    span: Span = field(default=(0, 0), compare=False, repr=False)


Arg = Union[LudemeNode, NamedArg, ArgSet, Hole, PlayerRef, str, int]


@dataclass(frozen=True)
class LudemeTree:
    root: LudemeNode


@dataclass(frozen=True)
class ParseIssue:
    code: str
    message: str
    line: int  # 1-based
    col: int  # 1-based, in characters


class ParseError(Exception):
    """Raised when parsing fails; carries every issue found."""

    def __init__(self, issues: list[ParseIssue]):
        self.issues = list(issues)
        summary = "; ".join(
            f"{i.line}:{i.col} {i.code}: {i.message}" for i in self.issues
        )
        super().__init__(f"{len(self.issues)} parse issue(s): {summary}")


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_PUNCT = {"(", ")", "{", "}", "|", "?"}


@dataclass(frozen=True)
class _Token:
    kind: str  # one of ( ) { } | ? INT STRING IDENT NAME EOF
    text: str
    span: Span
    line: int
    col: int


def _lex(source: str, issues: list[ParseIssue]) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(source)
    line = 1
    col = 1
    byte = 0

    def bump(ch: str) -> None:
        nonlocal line, col, byte
        byte += len(ch.encode("utf-8"))
        if ch == "\n":
            line += 1
            col = 1
        else:
            col += 1

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            bump(ch)
            i += 1
            continue
        if ch == "#":  # line comment
            while i < n and source[i] != "\n":
                bump(source[i])
                i += 1
            continue
        start_byte, start_line, start_col = byte, line, col
        if ch in _PUNCT:
            bump(ch)
            i += 1
            tokens.append(_Token(ch, ch, (start_byte, byte), start_line, start_col))
            continue
        if ch == '"':
            bump(ch)
            i += 1
            buf = []
            closed = False
            while i < n:
                c = source[i]
                if c == "\n":
                    break
                bump(c)
                i += 1
                if c == "\\" and i < n and source[i] in ('"', "\\"):
                    buf.append(source[i])
                    bump(source[i])
                    i += 1
                elif c == '"':
                    closed = True
                    break
                else:
                    buf.append(c)
            if not closed:
                issues.append(
                    ParseIssue(BAD_TOKEN, "unterminated string literal", start_line, start_col)
                )
                continue
            tokens.append(
                _Token("STRING", "".join(buf), (start_byte, byte), start_line, start_col)
            )
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and source[i + 1].isdigit()):
            j = i + 1 if ch == "-" else i
            while j < n and source[j].isdigit():
                j += 1
            text = source[i:j]
            while i < j:
                bump(source[i])
                i += 1
            tokens.append(_Token("INT", text, (start_byte, byte), start_line, start_col))
            continue
        if ch in KEYWORD_FIRST:
            j = i
            while j < n and source[j] in KEYWORD_REST:
                j += 1
            text = source[i:j]
            while i < j:
                bump(source[i])
                i += 1
            # name:value named argument (colon must follow immediately)
            if i < n and source[i] == ":":
                bump(":")
                i += 1
                tokens.append(_Token("NAME", text, (start_byte, byte), start_line, start_col))
            else:
                tokens.append(_Token("IDENT", text, (start_byte, byte), start_line, start_col))
            continue
        issues.append(
            ParseIssue(BAD_TOKEN, f"unexpected character {ch!r}", start_line, start_col)
        )
        bump(ch)
        i += 1

    tokens.append(_Token("EOF", "", (byte, byte), line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[_Token], issues: list[ParseIssue]):
        self.tokens = tokens
        self.pos = 0
        self.issues = issues

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def issue(self, code: str, message: str, tok: _Token) -> None:
        self.issues.append(ParseIssue(code, message, tok.line, tok.col))

    # -- forms ---------------------------------------------------------------

    def parse_form(self) -> LudemeNode | None:
        open_tok = self.advance()  # caller guarantees "("
        tok = self.peek()
        if tok.kind == ")":
            self.advance()
            self.issue(EMPTY_FORM, "empty form ()", open_tok)
            return None
        if tok.kind != "IDENT":
            self.issue(BAD_TOKEN, "form must start with a keyword", tok)
            self.skip_form_body()
            return None
        head = self.advance()
        args: list[Arg] = []
        names_seen: set[str] = set()
        while True:
            tok = self.peek()
            if tok.kind == ")":
                close = self.advance()
                return LudemeNode(head.text, tuple(args), (open_tok.span[0], close.span[1]))
            if tok.kind == "EOF":
                self.issue(UNBALANCED_PAREN, "missing ')' before end of input", open_tok)
                return LudemeNode(head.text, tuple(args), (open_tok.span[0], tok.span[0]))
            arg = self.parse_arg()
            if arg is not None:
                if isinstance(arg, NamedArg):
                    if arg.name in names_seen:
                        self.issue(BAD_TOKEN, f"duplicate named argument {arg.name!r}", tok)
                        continue
                    names_seen.add(arg.name)
                args.append(arg)

    def skip_form_body(self) -> None:
        depth = 1
        while depth > 0:
            tok = self.advance()
            if tok.kind == "EOF":
                return
            if tok.kind == "(":
                depth += 1
            elif tok.kind == ")":
                depth -= 1

    def parse_arg(self) -> Arg | None:
        tok = self.peek()
        if tok.kind == "(":
            return self.parse_form()
        if tok.kind == "INT":
            self.advance()
            return int(tok.text)
        if tok.kind == "STRING":
            self.advance()
            return tok.text
        if tok.kind == "IDENT":
            self.advance()
            if tok.text in ("P1", "P2"):
                return PlayerRef(1 if tok.text == "P1" else 2)
            return LudemeNode(tok.text, (), tok.span)
        if tok.kind == "NAME":
            self.advance()
            nxt = self.peek()
            if nxt.kind in (")", "}", "|", "EOF"):
                self.issue(BAD_TOKEN, f"named argument {tok.text!r} has no value", tok)
                return None
            value = self.parse_arg()
            if value is None:
                return None
            return NamedArg(tok.text, value)
        if tok.kind == "{":
            return self.parse_set()
        if tok.kind == "?":
            return self.parse_hole()
        # stray ) } | handled by callers; anything else is a bad token
        self.advance()
        self.issue(BAD_TOKEN, f"unexpected {tok.text!r}", tok)
        return None

    def parse_set(self) -> ArgSet:
        self.advance()  # "{"
        items: list[Arg] = []
        while True:
            tok = self.peek()
            if tok.kind == "}":
                self.advance()
                return ArgSet(tuple(items))
            if tok.kind == "EOF":
                self.issue(UNBALANCED_PAREN, "missing '}' before end of input", tok)
                return ArgSet(tuple(items))
            if tok.kind in (")", "|"):
                self.issue(BAD_TOKEN, f"unexpected {tok.text!r} inside set", tok)
                self.advance()
                continue
            item = self.parse_arg()
            if item is not None:
                items.append(item)

    def parse_hole(self) -> Hole | None:
        q = self.advance()  # "?"
        tok = self.peek()
        if tok.kind != "IDENT":
            self.issue(BAD_TOKEN, "hole '?' must be followed by a category name", q)
            return None
        cat = self.advance()
        end_byte = cat.span[1]
        options: list[LudemeNode] = []
        if self.peek().kind == "{":
            self.advance()
            expect_option = True
            while True:
                tok = self.peek()
                if tok.kind == "}":
                    end_byte = self.advance().span[1]
                    break
                if tok.kind == "EOF":
                    self.issue(UNBALANCED_PAREN, "missing '}' in hole options", tok)
                    break
                if tok.kind == "|":
                    self.advance()
                    expect_option = True
                    continue
                if not expect_option:
                    self.issue(BAD_TOKEN, "hole options must be separated by '|'", tok)
                opt = self.parse_arg()
                expect_option = False
                if isinstance(opt, LudemeNode):
                    options.append(opt)
                elif opt is not None:
                    self.issue(BAD_TOKEN, "hole options must be ludeme forms", tok)
        return Hole(cat.text, tuple(options), (q.span[0], end_byte))


def parse(text: str) -> LudemeTree:
    """Parse a rule description into a :class:`LudemeTree`.

    Raises :class:`ParseError` with every collected issue when the text is
    not a single well-formed ``(game ...)`` form.
    """
    issues: list[ParseIssue] = []
    tokens = _lex(text, issues)
    parser = _Parser(tokens, issues)

    root: LudemeNode | None = None
    while True:
        tok = parser.peek()
        if tok.kind == "EOF":
            break
        if tok.kind == "(":
            node = parser.parse_form()
            if root is None:
                root = node
            elif node is not None:
                parser.issue(BAD_TOKEN, "unexpected content after the top-level form", tok)
        else:
            parser.advance()
            if tok.kind == ")":
                parser.issue(UNBALANCED_PAREN, "unmatched ')'", tok)
            else:
                parser.issue(BAD_TOKEN, f"expected '(' at top level, got {tok.text!r}", tok)

    if root is None and not issues:
        issues.append(ParseIssue(EMPTY_FORM, "no game form found", 1, 1))
    if root is not None and root.keyword != "game":
        issues.append(
            ParseIssue(ROOT_NOT_GAME, f"root form is {root.keyword!r}, expected 'game'", 1, 1)
        )
    if issues:
        raise ParseError(issues)
    assert root is not None
    return LudemeTree(root)


def parse_bytes(data: bytes) -> LudemeTree:
    """Decode as UTF-8 (replacing bad sequences) and parse."""
    return parse(data.decode("utf-8", errors="replace"))


# ---------------------------------------------------------------------------
# Canonical printer
# ---------------------------------------------------------------------------

def _fmt_string(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _fmt_arg(arg: Arg) -> str:
    if isinstance(arg, LudemeNode):
        return _fmt_node(arg)
    if isinstance(arg, NamedArg):
        value = arg.value
        # zero-argument named values read as enum words: hit:remove
        if isinstance(value, LudemeNode) and not value.args:
            return f"{arg.name}:{value.keyword}"
        return f"{arg.name}:{_fmt_arg(value)}"
    if isinstance(arg, ArgSet):
        return "{" + " ".join(_fmt_arg(a) for a in arg.items) + "}"
    if isinstance(arg, Hole):
        if arg.options:
            return "?" + arg.category + "{" + "|".join(_fmt_node(o) for o in arg.options) + "}"
        return "?" + arg.category
    if isinstance(arg, PlayerRef):
        return f"P{arg.player}"
    if isinstance(arg, bool):  # pragma: no cover - bool is not a valid Arg
        raise TypeError("bool is not a ludeme argument")
    if isinstance(arg, int):
        return str(arg)
    if isinstance(arg, str):
        return _fmt_string(arg)
    raise TypeError(f"cannot print argument of type {type(arg).__name__}")


def _fmt_node(node: LudemeNode) -> str:
    if not node.args and node.keyword in ATOM_KEYWORDS:
        return node.keyword
    parts = [node.keyword] + [_fmt_arg(a) for a in node.args]
    return "(" + " ".join(parts) + ")"


def to_text(tree: LudemeTree) -> str:
    """Canonical single-line form: one space between arguments, strings
    double-quoted, holes as ``?cat{a|b}``.  ``parse(to_text(t))`` is
    structurally equal to ``t``."""
    return _fmt_node(tree.root)


# ---------------------------------------------------------------------------
# Tree utilities
# ---------------------------------------------------------------------------

def _walk_args(args: tuple[Arg, ...], nodes: list[LudemeNode], holes: list[Hole]) -> None:
    for arg in args:
        if isinstance(arg, LudemeNode):
            nodes.append(arg)
            _walk_args(arg.args, nodes, holes)
        elif isinstance(arg, NamedArg):
            _walk_args((arg.value,), nodes, holes)
        elif isinstance(arg, ArgSet):
            _walk_args(arg.items, nodes, holes)
        elif isinstance(arg, Hole):
            holes.append(arg)


def iter_nodes(tree: LudemeTree) -> Iterator[LudemeNode]:
    """Pre-order traversal of the ludeme nodes (hole options excluded)."""
    nodes: list[LudemeNode] = [tree.root]
    holes: list[Hole] = []
    _walk_args(tree.root.args, nodes, holes)
    return iter(nodes)


def iter_holes(tree: LudemeTree) -> Iterator[Hole]:
    """Holes in document order."""
    nodes: list[LudemeNode] = []
    holes: list[Hole] = []
    _walk_args(tree.root.args, nodes, holes)
    return iter(holes)


def node_count(tree: LudemeTree) -> int:
    """Number of ludeme nodes; the rule-description complexity measure."""
    return sum(1 for _ in iter_nodes(tree))


def hole_count(tree: LudemeTree) -> int:
    return sum(1 for _ in iter_holes(tree))
