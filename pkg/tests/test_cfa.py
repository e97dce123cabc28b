from __future__ import annotations

import itertools

import pytest
from hypothesis import given

from bioamb.ast import CanonCap, rename_bound
from bioamb.cfa import (
    TOP,
    CapRule,
    Member,
    analyze,
    closure_violations,
    generate_constraints,
    judgment_violations,
    solve,
    validate,
)
from bioamb.parser import parse
from bioamb.semantics import explore

from strategies import processes


def naive_solve(constraints):
    """Round-robin fixpoint over every rule until nothing changes."""
    contents: dict = {TOP: set()}
    bindings: dict = {}

    def J(mu):
        return contents.setdefault(mu, set())

    def R(n):
        return bindings.setdefault(n, set())

    def caps(mu, kind):
        return [i for i in list(J(mu)) if isinstance(i, CanonCap) and i.kind == kind]

    def comm(out, inp, pairs):
        for o in out:
            for i in inp:
                if (o.direction, i.direction) in pairs and o.channel == i.channel:
                    R(i.binder).add(o.payload)

    changed = True
    while changed:
        before = sum(map(len, contents.values())) + sum(map(len, bindings.values()))
        for c in constraints:
            if isinstance(c, Member):
                (J if c.relation == "contents" else R)(c.owner).add(c.item)
            elif c.kind == "output":
                for n, m in itertools.product(list(R(c.channel)), list(R(c.payload))):
                    J(c.star).add(c.instance(n, m))
            else:
                for n in list(R(c.channel)):
                    J(c.star).add(c.instance(n))
        for mu in list(contents):
            kids = [k for k in J(mu) if isinstance(k, str)]
            for a, b in itertools.product(kids, kids):
                if any(e.channel == x.channel for e in caps(a, "enter") for x in caps(b, "accept")):
                    J(b).add(a)
                if any(e.channel == x.channel for e in caps(a, "merge_plus") for x in caps(b, "merge_minus")):
                    J(a).update(J(b))
                comm(caps(a, "output"), caps(b, "input"), {("sibling", "sibling")})
            for a in kids:
                if any(e.channel == x.channel for e in caps(a, "exit") for x in caps(mu, "expel")):
                    for g in list(contents):
                        if mu in J(g):
                            J(g).add(a)
                comm(caps(mu, "output"), caps(a, "input"), {("down", "up")})
                comm(caps(a, "output"), caps(mu, "input"), {("up", "down")})
            comm(caps(mu, "output"), caps(mu, "input"), {("local", "local")})
        after = sum(map(len, contents.values())) + sum(map(len, bindings.values()))
        changed = after != before
    contents = {k: frozenset(v) for k, v in contents.items() if v or k == TOP}
    bindings = {k: frozenset(v) for k, v in bindings.items() if v}
    return contents, bindings


def nonempty(result):
    return (
        {k: v for k, v in result.contents.items() if v or k == TOP},
        {k: v for k, v in result.bindings.items() if v},
    )


def labels(items):
    return {str(i) for i in items}


def test_zero():
    r = analyze(parse("0"))
    assert dict(r.contents) == {TOP: frozenset()} and dict(r.bindings) == {}


def test_worked_example(cell_mol):
    r = analyze(cell_mol)
    assert {"mol", "D"} <= r.children("cell")
    assert "D" in r.children("mol")
    assert {"mol", "cell"} <= r.children(TOP)
    assert "cell" not in r.children("mol") and "cell" not in r.children("D")
    x = next(n for n in r.bindings if n.label == "x")
    assert labels(r.values(x)) == {"cell3#4"}
    assert "expel cell3#4" in labels(r.items("mol"))


def test_constraints_of_a_small_term():
    cs = generate_constraints(parse("(n) [enter n. 0]^a"))
    members = {c for c in cs if isinstance(c, Member)}
    rules = [c for c in cs if isinstance(c, CapRule)]
    assert {(m.relation, str(m.owner), str(m.item)) for m in members} == {
        ("bindings", "n#1", "n#1"),
        ("contents", TOP, "a"),
    }
    assert len(rules) == 1 and rules[0].star == "a" and rules[0].kind == "enter"


def test_free_names_bind_to_themselves():
    r = analyze(parse("m!{m}. 0"))
    assert {str(k): labels(v) for k, v in r.bindings.items()} == {"m": {"m"}}
    assert labels(r.items(TOP)) == {"m!{m}"}


def test_payload_flows_to_binder():
    r = analyze(parse("(c)(m) [c!#{m}. 0]^A | [c?#{x}. exit x. 0]^B"))
    assert labels(r.items("B")) == {"c#1?#{x#3}", "exit m#2"}


def test_rec_body_generated_where_the_variable_lands():
    # X occurs inside an ambient, so the unfolding runs the body in B
    p = parse("(n) rec X. enter n. [X]^B")
    r = analyze(p)
    assert "enter n#1" in labels(r.items("B"))
    assert "B" in r.children("B")
    report = [judgment_violations(r, s, TOP) for s in explore(p, 4).states]
    assert not any(report)


def test_ill_formed_rejected():
    from bioamb.ast import Var

    with pytest.raises(ValueError):
        generate_constraints(Var("X"))


def test_initial_structure_is_below_fixpoint(cell_mol):
    cs = generate_constraints(cell_mol)
    first = solve(cs, closure=False)
    full = solve(cs)
    assert first.memberships() < full.memberships()
    assert "mol" not in first.children("cell") and "mol" in full.children("cell")


def test_corpus_matches_naive_solver(corpus_terms):
    for name, p in corpus_terms.items():
        assert nonempty(analyze(p)) == naive_solve(generate_constraints(p)), name


@given(processes())
def test_matches_naive_solver(p):
    assert nonempty(analyze(p)) == naive_solve(generate_constraints(p))


@given(processes())
def test_result_is_closed_and_valid(p):
    r = analyze(p)
    assert validate(r, p)
    assert closure_violations(r) == []


@given(processes())
def test_resolving_is_idempotent(p):
    r = analyze(p)
    again = solve(list(generate_constraints(p)) + list(r.memberships()))
    assert again.memberships() == r.memberships()


@given(processes(), processes())
def test_monotone_in_constraints(p, q):
    cp, cq = generate_constraints(p), generate_constraints(q)
    assert solve(cp).memberships() <= solve(cp | cq).memberships()


@given(processes())
def test_order_of_constraints_is_irrelevant(p):
    cs = sorted(generate_constraints(p), key=repr)
    assert solve(cs).memberships() == solve(reversed(cs)).memberships()


@given(processes())
def test_minimal(p):
    # dropping any single derived membership breaks either the judgment or closure
    r = analyze(p)
    from bioamb.cfa import AnalysisResult

    seeds = solve(generate_constraints(p), closure=False).memberships()
    for m in sorted(r.memberships() - seeds, key=repr)[:6]:
        if m.relation == "contents":
            contents = dict(r.contents)
            contents[m.owner] = contents[m.owner] - {m.item}
            smaller = AnalysisResult(contents, r.bindings)
        else:
            bindings = dict(r.bindings)
            bindings[m.owner] = bindings[m.owner] - {m.item}
            smaller = AnalysisResult(r.contents, bindings)
        assert judgment_violations(smaller, p, TOP) or closure_violations(smaller) or _rule_broken(smaller, p)


def _rule_broken(result, p):
    """Capability rules instantiated through derived bindings."""
    for c in generate_constraints(p):
        if isinstance(c, CapRule):
            pays = result.values(c.payload) if c.kind == "output" else [None]
            for n in result.values(c.channel):
                for m in pays:
                    if c.instance(n, m) not in result.items(c.star):
                        return True
        elif c.relation == "bindings" and c.item not in result.values(c.owner):
            return True
        elif c.relation == "contents" and c.item not in result.items(c.owner):
            return True
    return False


@given(processes())
def test_alpha_invariant(p):
    q = rename_bound(p, lambda n: f"w{n.site.id}")
    assert analyze(p) == analyze(q)


@given(processes())
def test_duplicating_a_component_adds_nothing(p):
    from bioamb.ast import Par

    assert analyze(Par(p, p)).memberships() == analyze(p).memberships()
