from __future__ import annotations

import pytest
from hypothesis import given

from bioamb.ast import (
    Amb,
    Cap,
    Name,
    Prefix,
    Restrict,
    Site,
    TermError,
    Var,
    Zero,
    alpha_equal,
    ambient_labels,
    canonicalize,
    check_well_formed,
    free_names,
    rename_bound,
    substitute,
)
from bioamb.parser import parse

from strategies import processes


def texts(names):
    return {n.text for n in names}


def test_free_names_of_zero():
    assert free_names(Zero()) == frozenset()


def test_restriction_binds_its_name():
    assert texts(free_names(parse("(n) n!{m}. 0"))) == {"m"}


def test_input_binds_its_argument():
    assert texts(free_names(parse("c?{x}. x!{y}. 0"))) == {"c", "y"}


def test_worked_example_is_closed(cell_mol):
    assert free_names(cell_mol) == frozenset()


def test_names_compare_on_text_and_site():
    s1, s2 = Site(1, "n"), Site(2, "n")
    assert Name("n", s1) != Name("n", s2)
    assert Name("n", s1) == Name("n", Site(1, "other hint"))
    assert Name("n") != Name("n", s1)


def test_single_binder_gives_one_canonical_name():
    canon = canonicalize(parse("(n) n!{n}. 0"))
    assert len(set(canon.values())) == 1


def test_shadowing_binders_get_distinct_canonical_names():
    p = parse("(n) (n!{x}. 0 | (n) n?{p}. 0)")
    canon = canonicalize(p)
    binders = [c for (path, role), c in canon.items() if role == "binder" and c.label == "n"]
    assert len(set(binders)) == 2
    renamed = rename_bound(p, lambda n: n.text + "_r")
    assert canonicalize(renamed) == canon


def test_free_names_canonicalize_to_their_text():
    canon = canonicalize(parse("m!{m}. 0"))
    assert {str(c) for c in canon.values()} == {"m"}


def test_substitute_identity_when_variable_absent():
    q = parse("(k) k!{y}. 0")
    assert substitute(q, Name("m"), Name("p")) is q


def test_substitute_into_capability():
    x = Name("x")
    got = substitute(parse("expel x. 0"), Name("cell3"), x)
    assert got == Prefix(Cap("expel", Name("cell3")), Zero())


def test_substitute_renames_to_avoid_capture():
    p = parse("(m) x!{m}. 0")
    got = substitute(p, Name("m"), Name("x"))
    assert isinstance(got, Restrict)
    cap = got.body.cap
    assert cap.channel == Name("m")
    assert cap.payload == got.name and cap.payload != Name("m")
    assert texts(free_names(got)) == {"m"}


def test_substitute_keeps_binder_sites():
    p = parse("(m) x!{m}. 0")
    got = substitute(p, Name("m"), Name("x"))
    assert got.name.site == p.name.site


def test_alpha_equal_cases():
    assert alpha_equal(parse("(n) n!{m}. 0"), parse("(k) k!{m}. 0"))
    assert not alpha_equal(parse("(n) n!{m}. 0"), parse("(n) n!{w}. 0"))
    assert not alpha_equal(parse("(n) n!{n}. 0"), parse("(n) (k) n!{k}. 0"))
    assert not alpha_equal(parse("[0]^A"), parse("[0]^B"))


def test_rec_variables_compare_structurally():
    assert alpha_equal(parse("rec X. a!{b}. X"), parse("rec Y. a!{b}. Y"))
    assert not alpha_equal(parse("rec X. a!{b}. rec Y. c!{d}. X"), parse("rec X. a!{b}. rec Y. c!{d}. Y"))


def test_check_well_formed_rejects_unbound_var():
    with pytest.raises(TermError) as err:
        check_well_formed(Var("X"))
    assert err.value.kind == "unbound-process-variable"


def test_ambient_labels_in_order():
    assert ambient_labels(parse("[[0]^B]^A | [0]^C")) == ["A", "B", "C"]


@given(processes())
def test_alpha_equal_reflexive_and_renaming_invariant(p):
    assert alpha_equal(p, p)
    q = rename_bound(p, lambda n: f"z{n.site.id}")
    assert alpha_equal(p, q) and alpha_equal(q, p)
    assert canonicalize(p) == canonicalize(q)


@given(processes(), processes())
def test_alpha_equal_symmetric(p, q):
    assert alpha_equal(p, q) == alpha_equal(q, p)


@given(processes())
def test_substitution_free_name_law(p):
    for x in sorted(free_names(p), key=lambda n: n.text):
        v = Name("fresh_v")
        q = substitute(p, v, x)
        assert free_names(q) <= (free_names(p) - {x}) | {v}
        assert v in free_names(q)
        assert sorted(ambient_labels(q)) == sorted(ambient_labels(p))


def test_ambient_substitution_leaves_labels():
    p = Amb("x", Prefix(Cap("enter", Name("x")), Zero()))
    q = substitute(p, Name("y"), Name("x"))
    assert q.label == "x" and q.body.cap.channel == Name("y")
