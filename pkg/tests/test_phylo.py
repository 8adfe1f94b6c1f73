"""Genotype distances, neighbor joining, and Newick serialization."""

from __future__ import annotations

import itertools
import random

import pytest

from ludekit.corpus import random_tree
from ludekit.grammar import node_count, parse
from ludekit.phylo import (
    DistanceMatrix,
    DuplicateNameError,
    PhyloNode,
    PhyloTree,
    distance_matrix,
    genotype_distance,
    genotype_signature,
    matrix_from_csv,
    matrix_to_csv,
    neighbor_joining,
    parse_newick,
    to_newick,
)

from .oracles import fit_five_leaf_tree, genotype_paths_independent

MINIMAL = ('(game "{name}" (mode 2) (equipment {{(board (square {n}) (square)) '
           "(ball P1) (cross P2)}}) (rules (play (step)) (end (noMoves))))")


def random_additive_tree(rng: random.Random, n: int) -> PhyloTree:
    """A random unrooted binary tree with eighths-valued edge lengths."""
    leaves = [PhyloNode(chr(65 + i)) for i in range(n)]
    rng.shuffle(leaves)

    def length() -> float:
        return rng.randint(1, 16) / 8.0

    while len(leaves) > 3:
        a = leaves.pop()
        b = leaves.pop()
        leaves.append(PhyloNode(children=[(a, length()), (b, length())]))
        rng.shuffle(leaves)
    if len(leaves) == 2:  # n == 2
        root = PhyloNode(children=[(leaves[0], length()), (leaves[1], length())])
    else:
        root = PhyloNode(
            children=[(leaves[0], length()), (leaves[1], length()), (leaves[2], length())]
        )
    return PhyloTree(root)


def path_distances(tree: PhyloTree) -> DistanceMatrix:
    names = sorted(tree.leaf_set())
    paths: dict[str, list] = {}

    def walk(node: PhyloNode, trail: list) -> None:
        if node.is_leaf:
            paths[node.label or ""] = trail
        for i, (child, length) in enumerate(node.children):
            walk(child, trail + [(id(node), i, length)])

    walk(tree.root, [])

    def dist(a: str, b: str) -> float:
        pa, pb = paths[a], paths[b]
        k = 0
        while k < min(len(pa), len(pb)) and pa[k][:2] == pb[k][:2]:
            k += 1
        return sum(step[2] for step in pa[k:]) + sum(step[2] for step in pb[k:])

    n = len(names)
    rows = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            rows[i][j] = rows[j][i] = dist(names[i], names[j])
    return DistanceMatrix(tuple(names), tuple(tuple(r) for r in rows))


class TestGenotypeDistance:
    def test_identical_trees_have_zero_distance(self, ttt_tree):
        assert genotype_distance(ttt_tree, ttt_tree) == 0.0

    def test_signature_size_equals_node_count(self, corpus):
        for game in corpus:
            sig = genotype_signature(game.tree)
            assert sum(sig.values()) == node_count(game.tree)

    def test_line_length_variant_distances(self, ttt_tree, ttt_text):
        variant = parse(ttt_text.replace("length:3", "length:4"))
        # abstracted integers: the two descriptions share every path
        assert genotype_distance(ttt_tree, variant) == 0.0
        # raw integers: exactly one of 19 node paths differs, so the
        # weighted Jaccard is 1 - 18/20
        assert genotype_distance(ttt_tree, variant, raw_integers=True) == pytest.approx(
            1.0 - 18.0 / 20.0
        )

    def test_root_only_overlap_exact_hand_value(self):
        from ludekit.grammar import LudemeNode, LudemeTree

        # a: paths {(game,#str), (game,mode,#int)}; b: {(game,#str), (game,rules)}
        # shared: the root path only -> 1 - 1/3
        a = LudemeTree(LudemeNode("game", ("A", LudemeNode("mode", (2,)))))
        b = LudemeTree(LudemeNode("game", ("B", LudemeNode("rules"))))
        assert genotype_distance(a, b) == pytest.approx(1.0 - 1.0 / 3.0)

    def test_mostly_disjoint_trees_near_one(self):
        a = parse(MINIMAL.format(name="A", n=3))
        b = parse('(game "B" (mode 2) (equipment {(board (rect 2 4) (square) '
                  "(track P1 0 1 2 3 off) (track P2 4 5 6 7 off)) (disc P1 count:2) "
                  "(disc P2 count:2) (dice 2 0 1)}) (rules (play (moveByDice)) "
                  "(end (bearOffAll))))")
        d = genotype_distance(a, b)
        sa = genotype_paths_independent(a)
        sb = genotype_paths_independent(b)
        inter = sum(min(sa[p], sb[p]) for p in set(sa) | set(sb))
        union = sum(max(sa[p], sb[p]) for p in set(sa) | set(sb))
        assert d == pytest.approx(1.0 - inter / union)
        assert d > 0.6

    def test_metric_axioms_on_random_triples(self):
        rng = random.Random(99)
        trees = [random_tree(rng) for _ in range(30)]
        for a, b, c in itertools.islice(itertools.combinations(trees, 3), 500):
            dab = genotype_distance(a, b)
            dbc = genotype_distance(b, c)
            dac = genotype_distance(a, c)
            assert dab == genotype_distance(b, a)
            assert 0.0 <= dab <= 1.0
            assert dac <= dab + dbc + 1e-12

    def test_phenotype_identical_genotypes_still_differ(self, ttt_tree, ttt_text):
        # Same playouts (the mode flag changes nothing at runtime), different
        # trees: the distance keys on the genotype and must stay positive.
        twin = parse(ttt_text.replace(" (addToEmpty)", ""))
        assert genotype_distance(ttt_tree, twin) > 0.0


class TestDistanceMatrix:
    def test_single_game_matrix(self, ttt_tree):
        m = distance_matrix([("Solo", ttt_tree)])
        assert m.labels == ("Solo",)
        assert m.d == ((0.0,),)

    def test_duplicate_tree_has_zero_off_diagonal(self, ttt_tree):
        m = distance_matrix([("A", ttt_tree), ("B", ttt_tree)])
        assert m.d[0][1] == 0.0

    def test_duplicate_names_rejected(self, ttt_tree):
        with pytest.raises(DuplicateNameError):
            distance_matrix([("A", ttt_tree), ("A", ttt_tree)])

    def test_matches_pairwise_distances(self, corpus):
        games = [(g.name, g.tree) for g in corpus[:5]]
        m = distance_matrix(games)
        for i in range(5):
            for j in range(5):
                expected = genotype_distance(games[i][1], games[j][1])
                assert m.d[i][j] == pytest.approx(expected)

    def test_csv_round_trip(self, corpus):
        m = distance_matrix([(g.name, g.tree) for g in corpus])
        again = matrix_from_csv(matrix_to_csv(m))
        assert again.labels == m.labels
        for i in range(m.size):
            for j in range(m.size):
                assert again.d[i][j] == pytest.approx(m.d[i][j], abs=1e-6)

    def test_corpus_matrix_matches_golden(self, corpus):
        import pathlib

        golden = pathlib.Path(__file__).parent / "data" / "corpus_matrix.csv"
        m = distance_matrix([(g.name, g.tree) for g in corpus])
        assert matrix_to_csv(m) == golden.read_text(encoding="utf-8")

    def test_golden_spot_checks_against_independent_path_enumeration(self, corpus):
        # Three entries of the frozen matrix re-derived with the test-side
        # path enumerator (a separate traversal implementation).
        m = distance_matrix([(g.name, g.tree) for g in corpus])
        for i, j in ((0, 1), (0, 8), (3, 6)):
            sa = genotype_paths_independent(corpus[i].tree)
            sb = genotype_paths_independent(corpus[j].tree)
            inter = sum(min(sa[p], sb[p]) for p in set(sa) | set(sb))
            union = sum(max(sa[p], sb[p]) for p in set(sa) | set(sb))
            assert m.d[i][j] == pytest.approx(1.0 - inter / union)


class TestNeighborJoining:
    def test_two_leaves(self):
        m = DistanceMatrix(("A", "B"), ((0.0, 0.4), (0.4, 0.0)))
        tree = neighbor_joining(m)
        assert to_newick(tree) == "(A:0.200000,B:0.200000);"

    def test_three_leaves_three_point_formulas(self):
        m = DistanceMatrix(("A", "B", "C"), ((0, 0.6, 0.8), (0.6, 0, 1.0), (0.8, 1.0, 0)))
        tree = neighbor_joining(m)
        lengths = tree.edge_lengths()
        assert lengths[frozenset({"A"})] == pytest.approx(0.2)
        assert lengths[frozenset({"B"})] == pytest.approx(0.4)
        assert lengths[frozenset({"C"})] == pytest.approx(0.6)
        assert to_newick(tree) == "(A:0.200000,B:0.400000,C:0.600000);"

    def test_five_leaf_recovery_against_topology_oracle(self):
        rng = random.Random(17)
        for _ in range(10):
            true = random_additive_tree(rng, 5)
            m = path_distances(true)
            labels = list(m.labels)
            dist = {
                frozenset((labels[i], labels[j])): m.d[i][j]
                for i in range(5)
                for j in range(i + 1, 5)
            }
            oracle_splits, _lengths, residual = fit_five_leaf_tree(labels, dist)
            assert residual < 1e-12
            recovered = neighbor_joining(m)
            assert recovered.splits() == oracle_splits
            assert recovered.splits() == true.splits()

    def test_random_additive_matrices_recover_exactly(self):
        rng = random.Random(7)
        for _ in range(40):
            n = rng.randint(4, 8)
            true = random_additive_tree(rng, n)
            recovered = neighbor_joining(path_distances(true))
            assert recovered.splits() == true.splits()
            assert recovered.leaf_set() == true.leaf_set()
            true_lengths = true.edge_lengths()
            rec_lengths = recovered.edge_lengths()
            for split, length in rec_lengths.items():
                comp = frozenset(true.leaf_set() - split)
                expected = true_lengths.get(split, true_lengths.get(comp))
                if expected is not None and len(split) < len(true.leaf_set()):
                    assert length == pytest.approx(expected, abs=1e-9)

    def test_leaf_set_preserved(self, corpus):
        m = distance_matrix([(g.name, g.tree) for g in corpus])
        tree = neighbor_joining(m)
        assert tree.leaf_set() == frozenset(m.labels)

    def test_negative_branch_clamped_with_warning(self):
        m = DistanceMatrix(
            ("A", "B", "C", "D"),
            (
                (0.0, 0.1, 0.9, 0.9),
                (0.1, 0.0, 1.0, 0.2),
                (0.9, 1.0, 0.0, 0.3),
                (0.9, 0.2, 0.3, 0.0),
            ),
        )
        tree = neighbor_joining(m)
        lengths = tree.edge_lengths()
        assert all(v >= 0.0 for v in lengths.values())
        assert tree.warnings

    def test_requires_two_taxa(self):
        with pytest.raises(ValueError):
            neighbor_joining(DistanceMatrix(("A",), ((0.0,),)))


class TestNewick:
    def test_round_trip(self, corpus):
        m = distance_matrix([(g.name, g.tree) for g in corpus])
        tree = neighbor_joining(m)
        text = to_newick(tree)
        assert text.endswith(";")
        again = parse_newick(text)
        assert again.splits() == tree.splits()
        assert again.leaf_set() == tree.leaf_set()
        assert to_newick(again) == text

    def test_quoted_labels_survive(self):
        m = DistanceMatrix(("Line Four", "Tic-Tac-Toe"), ((0.0, 0.5), (0.5, 0.0)))
        tree = neighbor_joining(m)
        text = to_newick(tree)
        assert "'Line Four'" in text
        assert parse_newick(text).leaf_set() == {"Line Four", "Tic-Tac-Toe"}

    def test_deterministic_child_ordering(self):
        m = DistanceMatrix(("C", "A", "B"), ((0, 0.6, 0.8), (0.6, 0, 1.0), (0.8, 1.0, 0)))
        text = to_newick(neighbor_joining(m))
        assert text.index("A") < text.index("B") < text.index("C")
