"""Catalog validation: completeness, issues, and determinism."""

from __future__ import annotations

import random

from ludekit.catalog import v1_catalog, validate
from ludekit.corpus import random_tree
from ludekit.grammar import parse

from .test_grammar import HOLE_TEXT


def test_tictactoe_is_complete(ttt_tree, catalog):
    report = validate(ttt_tree, catalog)
    assert report.is_complete
    assert report.hole_count == 0
    assert report.issues == ()


def test_line_length_zero_is_out_of_range(catalog):
    tree = parse(HOLE_TEXT.replace("?end{(line length:3)|(fullBoard Draw)}", "(line length:0)"))
    report = validate(tree, catalog)
    assert not report.is_complete
    assert any(
        i.code == "out-of-range" and "length ≥ 1" in i.message for i in report.issues
    )


def test_issue_carries_the_node_span(catalog):
    text = HOLE_TEXT.replace("?end{(line length:3)|(fullBoard Draw)}", "(line length:0)")
    tree = parse(text)
    report = validate(tree, catalog)
    issue = report.issues[0]
    start, end = issue.span
    assert "(line length:0)" in text[start:end]


def test_one_hole_means_incomplete(catalog):
    report = validate(parse(HOLE_TEXT), catalog)
    assert not report.is_complete
    assert report.hole_count == 1
    assert report.issues == ()


def test_unknown_keyword_reported(catalog):
    tree = parse(HOLE_TEXT.replace("(line length:3)|", "(sowCapture)|"))
    report = validate(tree, catalog)
    assert any(i.code == "unknown-keyword" and "sowCapture" in i.message for i in report.issues)


def test_arity_mismatch_reported(catalog):
    tree = parse('(game "X" (mode 2) (equipment {(board (square))}) '
                 "(rules (play (step)) (end (noMoves))))")
    report = validate(tree, catalog)
    assert any(i.code == "arity" for i in report.issues)


def test_hole_category_must_match_position(catalog):
    tree = parse(HOLE_TEXT.replace("?end{(line length:3)|(fullBoard Draw)}", "?moveGen"))
    report = validate(tree, catalog)
    assert any(i.code == "hole" for i in report.issues)


def test_hole_options_validate_against_category(catalog):
    tree = parse(HOLE_TEXT.replace("(line length:3)|", "(line length:0)|"))
    report = validate(tree, catalog)
    assert any(i.code == "out-of-range" for i in report.issues)


def test_validation_is_deterministic(catalog):
    rng = random.Random(7)
    for _ in range(50):
        tree = random_tree(rng)
        first = validate(tree, catalog)
        second = validate(tree, catalog)
        assert first == second


def test_catalog_members_have_defaults(catalog):
    for category, sigs in catalog.categories.items():
        for sig in sigs:
            node = catalog.default_node(sig)
            assert node.keyword == sig.keyword


def test_catalog_category_references_exist():
    catalog = v1_catalog()
    for sigs in catalog.categories.values():
        for sig in sigs:
            for p in sig.params:
                if p.category is not None:
                    assert p.category in catalog.categories
