"""Genotype distances between rule trees and neighbor-joining trees.

The genotype signature of a game is the multiset of rooted keyword paths,
one per ludeme node, with the node's atomic arguments folded in as
category tokens (``#int``, ``#str``, ``#player``).  Distances are weighted
Jaccard over these multisets, so they depend only on the rule description
(the genotype), never on play statistics (the phenotype).  Integer
abstraction can be switched off (``raw_integers``) to count e.g. differing
line lengths as differing tokens; matrices report the abstracted mode by
default.

Neighbor joining follows the classic Q-matrix criterion with Saitou-Nei
limb lengths; negative limbs are clamped to zero and recorded as warnings.
Ties pick the smallest label pair, so construction is deterministic.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .grammar import ArgSet, Hole, LudemeNode, LudemeTree, NamedArg, PlayerRef


class DuplicateNameError(Exception):
    pass


# ---------------------------------------------------------------------------
# Genotype signatures
# ---------------------------------------------------------------------------

def genotype_signature(tree: LudemeTree, raw_integers: bool = False) -> Counter:
    """Multiset of rooted keyword paths; one path per ludeme node."""
    paths: Counter = Counter()

    def int_token(value: int) -> str:
        return str(value) if raw_integers else "#int"

    def walk(node: LudemeNode, prefix: tuple[str, ...], label: Optional[str] = None) -> None:
        name = node.keyword if label is None else f"{label}:{node.keyword}"
        base = prefix + (name,)
        atoms: list[str] = []
        children: list[tuple[LudemeNode, Optional[str]]] = []

        def take(arg, arg_label: Optional[str]) -> None:
            if isinstance(arg, LudemeNode):
                children.append((arg, arg_label))
            elif isinstance(arg, int):
                atoms.append(int_token(arg) if arg_label is None else f"{arg_label}:{int_token(arg)}")
            elif isinstance(arg, str):
                atoms.append("#str" if arg_label is None else f"{arg_label}:#str")
            elif isinstance(arg, PlayerRef):
                atoms.append("#player" if arg_label is None else f"{arg_label}:#player")
            elif isinstance(arg, NamedArg):
                take(arg.value, arg.name)
            elif isinstance(arg, ArgSet):
                for item in arg.items:
                    take(item, arg_label)
            elif isinstance(arg, Hole):
                atoms.append(f"?{arg.category}")

        for arg in node.args:
            take(arg, None)
        paths[base + tuple(atoms)] += 1
        for child, child_label in children:
            walk(child, base, child_label)

    walk(tree.root, ())
    return paths


def genotype_distance(a: LudemeTree, b: LudemeTree, raw_integers: bool = False) -> float:
    """Weighted Jaccard distance over genotype signatures, in [0, 1]."""
    sa = genotype_signature(a, raw_integers)
    sb = genotype_signature(b, raw_integers)
    inter = 0
    union = 0
    for path in set(sa) | set(sb):
        ma, mb = sa.get(path, 0), sb.get(path, 0)
        inter += min(ma, mb)
        union += max(ma, mb)
    if union == 0:
        return 0.0
    return 1.0 - inter / union


@dataclass(frozen=True)
class DistanceMatrix:
    labels: tuple[str, ...]
    d: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.labels)
        if len(self.d) != n or any(len(row) != n for row in self.d):
            raise ValueError("matrix shape does not match labels")
        for i in range(n):
            if self.d[i][i] != 0.0:
                raise ValueError("diagonal must be zero")
            for j in range(i):
                if not math.isclose(self.d[i][j], self.d[j][i], abs_tol=1e-12):
                    raise ValueError("matrix must be symmetric")

    @property
    def size(self) -> int:
        return len(self.labels)


def distance_matrix(
    corpus: list[tuple[str, LudemeTree]], raw_integers: bool = False
) -> DistanceMatrix:
    names = [name for name, _ in corpus]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise DuplicateNameError(f"duplicate game names: {dupes}")
    sigs = [genotype_signature(tree, raw_integers) for _, tree in corpus]
    n = len(corpus)
    rows = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            inter = 0
            union = 0
            for path in set(sigs[i]) | set(sigs[j]):
                ma, mb = sigs[i].get(path, 0), sigs[j].get(path, 0)
                inter += min(ma, mb)
                union += max(ma, mb)
            dist = 1.0 - inter / union if union else 0.0
            rows[i][j] = rows[j][i] = dist
    return DistanceMatrix(tuple(names), tuple(tuple(r) for r in rows))


def matrix_to_csv(m: DistanceMatrix) -> str:
    """Header row of labels, then the lower triangle row by row."""
    import csv as _csv
    import io as _io

    buf = _io.StringIO()
    writer = _csv.writer(buf, lineterminator="\n")
    writer.writerow(m.labels)
    for i in range(1, m.size):
        writer.writerow([m.labels[i]] + [f"{m.d[i][j]:.6f}" for j in range(i)])
    return buf.getvalue()


def matrix_from_csv(text: str) -> DistanceMatrix:
    import csv as _csv
    import io as _io

    rows = [r for r in _csv.reader(_io.StringIO(text)) if r]
    labels = tuple(rows[0])
    n = len(labels)
    d = [[0.0] * n for _ in range(n)]
    for row in rows[1:]:
        i = labels.index(row[0])
        for j, cell in enumerate(row[1:]):
            d[i][j] = d[j][i] = float(cell)
    return DistanceMatrix(labels, tuple(tuple(r) for r in d))


# ---------------------------------------------------------------------------
# Neighbor joining
# ---------------------------------------------------------------------------

@dataclass
class PhyloNode:
    label: Optional[str] = None
    children: list[tuple["PhyloNode", float]] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def min_label(self) -> str:
        if self.is_leaf:
            return self.label or ""
        return min(child.min_label() for child, _ in self.children)

    def leaves(self) -> Iterator[str]:
        if self.is_leaf:
            yield self.label or ""
        else:
            for child, _ in self.children:
                yield from child.leaves()


@dataclass(frozen=True)
class PhyloTree:
    """An unrooted tree stored rooted at the final join for serialization."""

    root: PhyloNode
    warnings: tuple[str, ...] = ()

    def leaf_set(self) -> frozenset[str]:
        return frozenset(self.root.leaves())

    def splits(self) -> frozenset[frozenset[str]]:
        """Non-trivial bipartitions, each named by its smaller-side leaves."""
        all_leaves = self.leaf_set()
        out: set[frozenset[str]] = set()

        def walk(node: PhyloNode) -> frozenset[str]:
            if node.is_leaf:
                return frozenset([node.label or ""])
            below = frozenset()
            for child, _ in node.children:
                side = walk(child)
                if 1 < len(side) < len(all_leaves) - 1:
                    out.add(min(side, all_leaves - side, key=lambda s: (len(s), sorted(s))))
                below |= side
            return below

        walk(self.root)
        return frozenset(out)

    def edge_lengths(self) -> dict[frozenset[str], float]:
        """Edge length keyed by the leaf set below the edge."""
        out: dict[frozenset[str], float] = {}

        def walk(node: PhyloNode) -> frozenset[str]:
            if node.is_leaf:
                return frozenset([node.label or ""])
            below = frozenset()
            for child, length in node.children:
                side = walk(child)
                out[side] = length
                below |= side
            return below

        walk(self.root)
        return out


def neighbor_joining(m: DistanceMatrix) -> PhyloTree:
    n = m.size
    if n < 2:
        raise ValueError("neighbor joining requires at least 2 taxa")
    warnings: list[str] = []

    def clamp(length: float, a: str, b: str) -> float:
        if length < -1e-12:
            warnings.append(f"negative branch length {length:.6f} at ({a},{b}) clamped to 0")
            return 0.0
        return max(0.0, length)

    nodes: list[PhyloNode] = [PhyloNode(label) for label in m.labels]
    tags: list[str] = list(m.labels)
    d: list[list[float]] = [list(row) for row in m.d]

    if n == 2:
        half = clamp(m.d[0][1] / 2.0, tags[0], tags[1])
        root = PhyloNode(children=[(nodes[0], half), (nodes[1], half)])
        return PhyloTree(root, tuple(warnings))

    while len(nodes) > 3:
        size = len(nodes)
        r = [sum(d[i]) for i in range(size)]
        best: Optional[tuple] = None
        for i in range(size):
            for j in range(i + 1, size):
                q = (size - 2) * d[i][j] - r[i] - r[j]
                tie = tuple(sorted((tags[i], tags[j])))
                key = (q, tie)
                if best is None or key < best[0]:
                    best = (key, i, j)
        assert best is not None
        _, i, j = best
        dij = d[i][j]
        li = 0.5 * dij + (r[i] - r[j]) / (2 * (size - 2))
        lj = dij - li
        li = clamp(li, tags[i], tags[j])
        lj = clamp(lj, tags[j], tags[i])
        joined = PhyloNode(children=[(nodes[i], li), (nodes[j], lj)])
        new_row = [0.5 * (d[i][k] + d[j][k] - dij) for k in range(size)]
        # replace i with the joined node, drop j
        nodes[i] = joined
        tags[i] = min(tags[i], tags[j])
        for k in range(size):
            d[i][k] = d[k][i] = new_row[k]
        d[i][i] = 0.0
        for row in d:
            del row[j]
        del d[j]
        del nodes[j]
        del tags[j]

    a, b, c = 0, 1, 2
    la = clamp(0.5 * (d[a][b] + d[a][c] - d[b][c]), tags[a], tags[b])
    lb = clamp(0.5 * (d[a][b] + d[b][c] - d[a][c]), tags[b], tags[a])
    lc = clamp(0.5 * (d[a][c] + d[b][c] - d[a][b]), tags[c], tags[a])
    root = PhyloNode(children=[(nodes[a], la), (nodes[b], lb), (nodes[c], lc)])
    return PhyloTree(root, tuple(warnings))


# ---------------------------------------------------------------------------
# Newick
# ---------------------------------------------------------------------------

def _newick_label(label: str) -> str:
    if label and all(ch.isalnum() or ch in "_.-" for ch in label):
        return label
    return "'" + label.replace("'", "''") + "'"


def to_newick(tree: PhyloTree) -> str:
    """Standard Newick, 6-decimal branch lengths, children ordered by their
    smallest descendant label."""

    def fmt(node: PhyloNode) -> str:
        if node.is_leaf:
            return _newick_label(node.label or "")
        ordered = sorted(node.children, key=lambda cl: cl[0].min_label())
        inner = ",".join(f"{fmt(child)}:{length:.6f}" for child, length in ordered)
        return f"({inner})"

    return fmt(tree.root) + ";"


def parse_newick(text: str) -> PhyloTree:
    text = text.strip()
    if not text.endswith(";"):
        raise ValueError("Newick text must end with ';'")
    s = text[:-1]
    pos = 0

    def parse_node() -> tuple[PhyloNode, Optional[float]]:
        nonlocal pos
        node = PhyloNode()
        if s[pos] == "(":
            pos += 1
            children = []
            while True:
                child, length = parse_node()
                children.append((child, length if length is not None else 0.0))
                if s[pos] == ",":
                    pos += 1
                    continue
                if s[pos] == ")":
                    pos += 1
                    break
            node.children = children
        label = _parse_label()
        if label:
            node.label = label
        length = None
        if pos < len(s) and s[pos] == ":":
            pos += 1
            start = pos
            while pos < len(s) and (s[pos].isdigit() or s[pos] in ".eE+-"):
                pos += 1
            length = float(s[start:pos])
        return node, length

    def _parse_label() -> str:
        nonlocal pos
        if pos < len(s) and s[pos] == "'":
            pos += 1
            out = []
            while pos < len(s):
                if s[pos] == "'" and pos + 1 < len(s) and s[pos + 1] == "'":
                    out.append("'")
                    pos += 2
                elif s[pos] == "'":
                    pos += 1
                    break
                else:
                    out.append(s[pos])
                    pos += 1
            return "".join(out)
        start = pos
        while pos < len(s) and s[pos] not in "():,;":
            pos += 1
        return s[start:pos]

    root, _ = parse_node()
    if pos != len(s):
        raise ValueError(f"trailing Newick content at offset {pos}")
    return PhyloTree(root)
