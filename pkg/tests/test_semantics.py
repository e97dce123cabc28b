from __future__ import annotations

import pytest
from hypothesis import given

from bioamb.ast import alpha_equal, free_names
from bioamb.cfa import TOP
from bioamb.parser import parse, pretty
from bioamb.semantics import RULES, containment_pairs, explore, normalize, step

from oracles import ORACLES, expected, successors
from strategies import processes


def rules(src: str) -> set[frozenset]:
    return {r.families for r, _ in step(parse(src))}


def test_oracles_cover_every_family():
    assert set(ORACLES) == set(RULES)


@pytest.mark.parametrize("family", RULES)
def test_rule_oracle(family):
    src, outs = ORACLES[family]
    assert successors(src) == expected(*outs)
    assert all(family in fams for fams in rules(src))


def test_unfolding_is_counted():
    (redex, _), = step(parse("(n) [rec X. enter n. X]^A | [accept n. 0]^B"))
    assert redex.unfolds == 1 and redex.families == {"enter_accept", "rec_unfold"}


def test_choice_discards_other_branches():
    got = successors("(c)(m) c!{m}. 0 | (c?{x}. 0 + c?{y}. y!{m}. 0)")
    assert got == expected("0", "(m) m!{m}. 0")


def test_input_choice_offers_both_senders():
    got = successors("(c) (c!{a}. 0 + c!{b}. 0) | c?{x}. x!{x}. 0")
    assert got == expected("a!{a}. 0", "b!{b}. 0")


@pytest.mark.parametrize(
    "src",
    [
        "(c) c!{c}. 0 | (c) c?{x}. 0",  # different channels
        "(c)(m) c!v{m}. 0 | [c?{x}. 0]^A",  # direction mismatch
        "(c)(m) c!v{m}. 0 | [[c?^{x}. 0]^B]^A",  # grandchild is not a child
        "(n) [enter n. 0]^A | [[accept n. 0]^B]^C",  # not siblings
        "(n) [exit n. 0]^A | expel n. 0",  # no parent ambient to leave
        "(n) [enter n. 0 | accept n. 0]^A",  # a single ambient cannot enter itself
        "enter n. 0 | accept n. 0",  # movements need ambients
        "(n) [merge+ n. 0]^A | [merge+ n. 0]^B",
        "c!{m}. enter n. 0",
    ],
)
def test_stuck(src):
    assert successors(src) == set()


def test_channel_identity_follows_binding_not_text():
    # both channels are spelled c, but the input listens on the inner restriction
    assert successors("(c) (c!{m}. 0 | (c) c?{x}. 0)") == set()
    assert successors("(c) (c!{m}. 0 | c?{x}. 0)") == expected("0")


def test_scope_extrusion_through_ambient_boundary():
    got = successors("(c) [(m) c!^{m}. m!{m}. 0]^A | c?v{x}. x?{y}. 0")
    assert got == expected("(m) [m!{m}. 0]^A | m?{y}. 0")


def test_received_name_does_not_capture():
    got = successors("(c)(m) c!{m}. 0 | c?{x}. (m) x!{m}. 0")
    assert len(got) == 1
    (q,) = [q for _, q in step(parse("(c)(m) c!{m}. 0 | c?{x}. (m) x!{m}. 0"))]
    assert alpha_equal(q, normalize(parse("(m) (k) m!{k}. 0")))


def test_normalize_sorts_and_drops():
    a = normalize(parse("(u) [0]^B | 0 | [0]^A"))
    b = normalize(parse("[0]^A | [0]^B"))
    assert a == b


def test_normalize_is_alpha_invariant_and_idempotent(cell_mol):
    n = normalize(cell_mol)
    assert normalize(n) == n
    assert alpha_equal(n, normalize(n))
    assert free_names(n) == free_names(cell_mol)


def test_explore_zero():
    space = explore(parse("0"), 10)
    assert space.summary() == "1 state, 0 transitions"
    assert not space.edges and not space.truncated


def test_explore_enter_accept_pair():
    space = explore(parse("(n) [enter n. 0]^a | [accept n. 0]^b"), 5)
    assert space.summary() == "2 states, 1 transition"
    assert not space.truncated


def test_worked_example_first_step(cell_mol):
    (redex, _), = step(cell_mol)
    assert redex.rule == "enter_accept" and redex.unfolds == 2


def test_worked_example_cycle(cell_mol):
    space = explore(cell_mol, 3)
    rules_seen = {r.rule for _, r, _ in space.edges}
    assert {"enter_accept", "exit_expel"} <= rules_seen
    # mol goes in and comes back out to the initial state
    back = [(s, d) for s, r, d in space.edges if r.rule == "exit_expel" and d == 0]
    assert back


def test_truncation_flag():
    p = parse("(n) [rec X. enter n. exit n. X]^a | [rec Y. (accept n. Y + expel n. Y)]^b")
    assert not explore(p, 6).truncated
    q = parse("(c) c?{y}. 0 | rec X. c!{c}. (X | c?{x}. 0 | c?{z}. 0)")
    assert explore(q, 3).truncated
    assert explore(q, 50, max_states=5).truncated


def test_containment_pairs():
    p = parse("[[0]^B]^A | [0]^C")
    assert containment_pairs(p, TOP) == {(TOP, "A"), ("A", "B"), (TOP, "C")}


@given(processes())
def test_step_results_are_normal_and_closed(p):
    for redex, q in step(p):
        assert normalize(q) == q
        assert free_names(q) <= free_names(p)
        assert redex.rule in RULES


@given(processes())
def test_step_commutes_with_alpha_renaming(p):
    from bioamb.ast import rename_bound

    q = rename_bound(p, lambda n: f"r{n.site.id}")
    assert {pretty(s) for _, s in step(p)} == {pretty(s) for _, s in step(q)}
