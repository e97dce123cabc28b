"""Hypothesis strategies for small, highly interactive BioAmbients terms."""

from hypothesis import strategies as st

from bioamb.parser import parse

CHANNELS = ("a", "b")
MOVES = ("enter", "accept", "exit", "expel", "merge+", "merge-")
MARKS = ("", "v", "^", "#")


@st.composite
def capability(draw, scope):
    names = list(CHANNELS) + scope
    ch = draw(st.sampled_from(names))
    kind = draw(st.sampled_from(("move", "move", "out", "in")))
    if kind == "move":
        return f"{draw(st.sampled_from(MOVES))} {ch}", scope
    mark = draw(st.sampled_from(MARKS))
    if kind == "out":
        return f"{ch}!{mark}{{{draw(st.sampled_from(names + ['f']))}}}", scope
    x = f"x{len(scope)}"
    return f"{ch}?{mark}{{{x}}}", scope + [x]


@st.composite
def sequential(draw, scope, recvar, depth):
    """A prefix, a choice of prefixes, or a guarded recursion."""
    options = ["prefix", "choice"] + (["rec"] if depth > 0 else [])
    form = draw(st.sampled_from(options))
    if form == "rec":
        var = f"X{depth}"
        return f"rec {var}. {draw(sequential(scope, var, depth - 1))}"
    branches = 2 if form == "choice" else 1
    out = []
    for _ in range(branches):
        head, inner = draw(capability(scope))
        out.append(f"{head}. {draw(continuation(inner, recvar, depth - 1))}")
    return "(" + " + ".join(out) + ")" if branches > 1 else out[0]


@st.composite
def continuation(draw, scope, recvar, depth):
    options = ["0"] + ([recvar] if recvar else [])
    if depth > 0:
        options += ["more", "more", "par"]
    form = draw(st.sampled_from(options))
    if form == "more":
        return draw(sequential(scope, recvar, depth))
    if form == "par":
        return "(" + draw(soup(scope, recvar, depth - 1)) + ")"
    return form


@st.composite
def soup(draw, scope, recvar, depth):
    items = []
    for _ in range(draw(st.integers(1, 3))):
        if depth > 0 and draw(st.booleans()):
            label = draw(st.sampled_from("ABCD"))
            items.append(f"[{draw(soup(scope, recvar, depth - 1))}]^{label}")
        elif depth > 0 and draw(st.integers(0, 5)) == 0:
            items.append(f"(r{depth}) " + draw(sequential(scope + [f"r{depth}"], recvar, depth - 1)))
        else:
            items.append(draw(sequential(scope, recvar, depth)))
    return " | ".join(items)


@st.composite
def processes(draw, depth=2):
    return parse("(a)(b) " + draw(soup([], None, depth)))
