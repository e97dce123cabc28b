from __future__ import annotations

import random
from collections import Counter

import pytest
from hypothesis import given, settings

from bioamb.ast import Amb, Prefix, _walk
from bioamb.cfa import TOP
from bioamb.parser import parse, pretty
from bioamb.semantics import RULES
from bioamb.verify import check_theorem, measure_precision, random_corpus, random_process

from strategies import processes


def test_zero():
    rep = check_theorem(parse("0"), 10)
    assert rep.states_checked == 1 and rep.ok and not rep.truncated
    prec = measure_precision(parse("0"), 10)
    assert prec.exact_pairs == prec.predicted_pairs == set()
    assert prec.spurious == prec.missed == set()


def test_depth_must_be_positive():
    with pytest.raises(ValueError):
        check_theorem(parse("0"), 0)


def test_worked_example(cell_mol):
    rep = check_theorem(cell_mol, 6)
    assert rep.ok and not rep.truncated
    prec = measure_precision(cell_mol, 6)
    assert prec.missed == set()
    assert not any(child == "cell" for _, child in prec.spurious)
    assert {("mol", "cell"), ("D", "cell")}.isdisjoint(prec.predicted_pairs)


def test_enter_accept_precision():
    prec = measure_precision(parse("(n) [enter n. 0]^a | [accept n. 0]^b"), 5)
    expected = {("b", "a"), (TOP, "a"), (TOP, "b")}
    assert prec.exact_pairs == prec.predicted_pairs == expected
    assert prec.spurious == set()


def test_violation_is_reported_with_rule(cell_mol):
    from bioamb.cfa import AnalysisResult, analyze

    r = analyze(cell_mol)
    contents = dict(r.contents)
    contents["cell"] = contents["cell"] - {"mol"}
    broken = AnalysisResult(contents, r.bindings)
    rep = check_theorem(cell_mol, 6, result=broken)
    assert not rep.ok
    assert {rule for _, rule, _ in rep.violations} == {"ambient"}


def test_corpus(corpus_terms):
    for name, p in corpus_terms.items():
        rep = check_theorem(p, 6)
        prec = measure_precision(p, 6)
        assert rep.ok, (name, rep.violations)
        assert prec.truncated or not prec.missed, name


def test_generator_budgets_and_families():
    corpus = random_corpus(100, 42)
    for p in corpus:
        nodes = list(_walk(p))
        assert sum(isinstance(n, Amb) for n in nodes) <= 4
        assert sum(isinstance(n, Prefix) for n in nodes) <= 8
    seen = Counter()
    for p in corpus:
        seen.update(check_theorem(p, 5).families)
    assert set(seen) == set(RULES)


def test_generator_is_deterministic():
    a = [pretty(p) for p in random_corpus(20, 7)]
    b = [pretty(p) for p in random_corpus(20, 7)]
    assert a == b
    assert a != [pretty(p) for p in random_corpus(20, 8)]


@pytest.mark.parametrize("family", RULES)
def test_planted_family_fires(family):
    rng = random.Random(family)
    for _ in range(10):
        rep = check_theorem(random_process(rng, family), 1)
        assert family in rep.families


def test_unknown_family():
    with pytest.raises(ValueError):
        random_process(random.Random(0), "teleport")


def test_random_runs_hold(cell_mol):
    for seed in range(3):
        for p in random_corpus(40, seed, max_ambients=5, max_prefixes=10):
            rep = check_theorem(p, 5)
            prec = measure_precision(p, 5)
            assert rep.ok, (pretty(p), rep.violations)
            assert prec.truncated or not prec.missed


@settings(max_examples=200)
@given(processes(depth=3))
def test_subject_reduction_property(p):
    rep = check_theorem(p, 4, limit=2000)
    assert rep.ok, rep.violations
    prec = measure_precision(p, 4, limit=2000)
    assert prec.truncated or not prec.missed
