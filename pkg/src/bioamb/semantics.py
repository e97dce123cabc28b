"""Reduction semantics: structural congruence, one-step transitions, and
bounded breadth-first exploration.

Internally a process is handled as a *configuration*: a list of globally
restricted names plus a soup of parallel components, where each component
is either a :class:`Box` (an ambient holding its own soup) or a sequential
process (prefix, choice or ``rec``). Restrictions are hoisted to the top
using scope extrusion and ``(n)[P] = [(n)P]``; clashing names are renamed
apart, keeping their binder site.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

from .ast import (
    Amb,
    Cap,
    Choice,
    Name,
    Par,
    Prefix,
    Process,
    Rec,
    Restrict,
    Var,
    Zero,
    all_names,
    fresh_name,
    free_names,
    par,
    choice,
    substitute,
    substitute_process_var,
)

__all__ = [
    "RULES",
    "Redex",
    "StateSpace",
    "normalize",
    "step",
    "explore",
    "term_key",
    "containment_pairs",
    "DEFAULT_MAX_DEPTH",
    "DEFAULT_MAX_STATES",
]

RULES = (
    "enter_accept",
    "exit_expel",
    "merge",
    "comm_local",
    "comm_p2c",
    "comm_c2p",
    "comm_s2s",
    "rec_unfold",
)

DEFAULT_MAX_DEPTH = 64
DEFAULT_MAX_STATES = 100_000


@dataclass(frozen=True)
class Redex:
    """One application of a transition axiom.

    ``locus`` lists the ambient identities from the top down to the soup
    where the axiom fired. ``unfolds`` counts the ``rec`` unfoldings the
    step needed to expose its participants; a step with ``unfolds > 0``
    belongs to the ``rec_unfold`` family in addition to ``rule``.
    """

    rule: str
    locus: tuple[str, ...]
    participants: tuple[Cap, Cap]
    unfolds: int = 0

    @property
    def families(self) -> frozenset[str]:
        return frozenset({self.rule, "rec_unfold"} if self.unfolds else {self.rule})


@dataclass(frozen=True)
class StateSpace:
    initial: Process
    states: tuple[Process, ...]
    edges: tuple[tuple[int, Redex, int], ...]
    depth_reached: int
    truncated: bool
    depths: tuple[int, ...] = field(default=(), repr=False)

    def summary(self) -> str:
        n, m = len(self.states), len(self.edges)
        return f"{n} state{'s' * (n != 1)}, {m} transition{'s' * (m != 1)}"


# --- configurations ----------------------------------------------------------


@dataclass(frozen=True)
class Box:
    label: str
    soup: tuple


class _Names:
    """Fresh-name supply shared by everything built during one step."""

    def __init__(self, used):
        self.used = set(used)

    def hoist(self, name: Name, body: Process) -> tuple[Name, Process]:
        if name in self.used:
            new = fresh_name(name, self.used)
            body = substitute(body, new, name)
            name = new
        self.used.add(name)
        return name, body


def _flatten(p: Process, names: _Names, restricted: list) -> list:
    """Soup components of the active part of ``p``; hoisted restrictions
    are appended to ``restricted``."""
    if isinstance(p, Zero):
        return []
    if isinstance(p, Par):
        return _flatten(p.left, names, restricted) + _flatten(p.right, names, restricted)
    if isinstance(p, Restrict):
        name, body = names.hoist(p.name, p.body)
        restricted.append(name)
        return _flatten(body, names, restricted)
    if isinstance(p, Amb):
        return [Box(p.label, tuple(_flatten(p.body, names, restricted)))]
    return [p]


def _configuration(p: Process) -> tuple[list, tuple, _Names]:
    names = _Names(all_names(p))
    # free names must never be reused by hoisting
    restricted: list = []
    soup = tuple(_flatten(p, names, restricted))
    return restricted, soup, names


def _to_process(restricted, soup) -> Process:
    out = _soup_process(soup)
    for n in reversed(list(restricted)):
        out = Restrict(n, out)
    return out


def _soup_process(soup) -> Process:
    return par(Amb(c.label, _soup_process(c.soup)) if isinstance(c, Box) else c for c in soup)


# --- normal forms ------------------------------------------------------------


def term_key(p: Process, env: dict | None = None, depth: int = 0) -> tuple:
    """Alpha-invariant ordering key.

    Bound names are keyed by binder distance; other names by their site
    (or text when free), so renaming bound names never changes the key.
    """
    env = env or {}

    def nk(n: Name):
        if n in env:
            return (0, depth - env[n], n.site.id if n.site else -1)
        if n.site is not None:
            return (1, n.site.id, "")
        return (2, 0, n.text)

    if isinstance(p, Zero):
        return (0,)
    if isinstance(p, Var):
        return (1, p.var)
    if isinstance(p, Restrict):
        return (2, p.name.site.id if p.name.site else -1, term_key(p.body, {**env, p.name: depth}, depth + 1))
    if isinstance(p, Amb):
        return (3, p.label, term_key(p.body, env, depth))
    if isinstance(p, Prefix):
        c = p.cap
        head = (c.kind, c.direction or "", nk(c.channel), nk(c.payload) if c.payload else ())
        if c.kind == "input":
            site = c.binder.site.id if c.binder.site else -1
            return (4, head, site, term_key(p.cont, {**env, c.binder: depth}, depth + 1))
        return (4, head, -1, term_key(p.cont, env, depth))
    if isinstance(p, Choice):
        return (5, term_key(p.left, env, depth), term_key(p.right, env, depth))
    if isinstance(p, Rec):
        return (6, p.var, term_key(p.body, env, depth))
    return (7, term_key(p.left, env, depth), term_key(p.right, env, depth))


def normalize(p: Process) -> Process:
    """Canonical representative of the congruence class of ``p``.

    Parallel soups are flattened, ``0`` dropped, components and choice
    branches sorted, restrictions hoisted to the nearest prefix (or the
    top), unused restrictions dropped, and bound names renamed to a
    scheme that depends only on binder sites and nesting.
    """
    return _canonical_names(_normal(p, _Names(all_names(p))))


def _normal(p: Process, names: _Names) -> Process:
    restricted: list = []
    soup = _sort_soup(tuple(_flatten(p, names, restricted)), names)
    body = _soup_process(soup)
    live = free_names(body)
    keep = [n for n in restricted if n in live]
    keep.sort(key=lambda n: _first_use(body, n))
    return _wrap(keep, body)


def _wrap(restricted, body):
    for n in reversed(restricted):
        body = Restrict(n, body)
    return body


def _first_use(body: Process, name: Name) -> tuple:
    order = []

    def go(q):
        if isinstance(q, Prefix):
            order.extend(q.cap.names())
            go(q.cont)
        elif isinstance(q, (Par, Choice)):
            go(q.left)
            go(q.right)
        elif isinstance(q, (Amb, Rec, Restrict)):
            go(q.body)

    go(body)
    return (order.index(name), name.site.id if name.site else -1)


def _sort_soup(soup: tuple, names: _Names) -> tuple:
    items = []
    for c in soup:
        if isinstance(c, Box):
            items.append(Box(c.label, _sort_soup(c.soup, names)))
        else:
            items.append(_normal_seq(c, names))
    items.sort(key=_component_key)
    return tuple(items)


def _component_key(c) -> tuple:
    if isinstance(c, Box):
        return term_key(Amb(c.label, _soup_process(c.soup)))
    return term_key(c)


def _normal_seq(p: Process, names: _Names) -> Process:
    if isinstance(p, Prefix):
        return Prefix(p.cap, _normal(p.cont, names))
    if isinstance(p, Choice):
        branches = [_normal_seq(b, names) for b in _branches(p)]
        branches.sort(key=term_key)
        return choice(branches)
    if isinstance(p, Rec):
        return Rec(p.var, _normal(p.body, names))
    return p


def _branches(p: Process) -> list:
    if isinstance(p, Choice):
        return _branches(p.left) + _branches(p.right)
    return [p]


def _canonical_names(p: Process) -> Process:
    """Rename every binder to ``hint`` or ``hint_k`` where ``k`` counts the
    enclosing binders with the same site."""

    def pick(name: Name, scope: tuple) -> Name:
        hint = (name.site.hint if name.site else "") or name.text
        k = sum(1 for n in scope if n.site is not None and n.site == name.site)
        return Name(hint if k == 0 else f"{hint}_{k}", name.site)

    def go(q: Process, sigma: dict, scope: tuple) -> Process:
        if isinstance(q, (Zero, Var)):
            return q
        if isinstance(q, Restrict):
            new = pick(q.name, scope)
            return Restrict(new, go(q.body, {**sigma, q.name: new}, scope + (new,)))
        if isinstance(q, Amb):
            return Amb(q.label, go(q.body, sigma, scope))
        if isinstance(q, Rec):
            return Rec(q.var, go(q.body, sigma, scope))
        if isinstance(q, Prefix):
            cap = q.cap.rename(sigma)
            if cap.kind == "input":
                new = pick(cap.binder, scope)
                cap = Cap("input", cap.channel, cap.direction, binder=new)
                return Prefix(cap, go(q.cont, {**sigma, q.cap.binder: new}, scope + (new,)))
            return Prefix(cap, go(q.cont, sigma, scope))
        return type(q)(go(q.left, sigma, scope), go(q.right, sigma, scope))

    return go(p, {}, ())


# --- transitions ---------------------------------------------------------------


def _offers(p: Process) -> list[tuple[Cap, Process]]:
    if isinstance(p, Prefix):
        return [(p.cap, p.cont)]
    if isinstance(p, Choice):
        return _offers(p.left) + _offers(p.right)
    return []


class _Expansion:
    """A soup with every ``rec`` component unfolded until none is exposed.

    ``parts[j]`` holds the components that original component ``j``
    expands into; unused origins are restored folded when rebuilding.
    """

    def __init__(self, soup: tuple, names: _Names):
        self.soup = soup
        self.parts: list[list] = []
        self.restricted: list[list] = []
        self.unfolds: list[int] = []
        for c in soup:
            restricted: list = []
            count = [0]
            self.parts.append(self._unfold(c, names, restricted, count))
            self.restricted.append(restricted)
            self.unfolds.append(count[0])

    def _unfold(self, c, names, restricted, count) -> list:
        if not isinstance(c, Rec):
            return [c]
        count[0] += 1
        body = substitute_process_var(c.body, c.var, c)
        out = []
        for part in _flatten(body, names, restricted):
            out.extend(self._unfold(part, names, restricted, count))
        return out

    def units(self) -> Iterator[tuple[tuple[int, int], object]]:
        for j, parts in enumerate(self.parts):
            for k, c in enumerate(parts):
                yield (j, k), c

    def rebuild(self, changes: dict, extra=()) -> tuple[tuple, list, int]:
        """New soup replacing unit ``(j, k)`` by ``changes[(j, k)]``."""
        used = {j for j, _ in changes}
        soup: list = []
        restricted: list = []
        unfolds = 0
        for j, c in enumerate(self.soup):
            if j not in used:
                soup.append(c)
                continue
            restricted.extend(self.restricted[j])
            unfolds += self.unfolds[j]
            for k, part in enumerate(self.parts[j]):
                soup.extend(changes.get((j, k), [part]))
        soup.extend(extra)
        return tuple(soup), restricted, unfolds


class _Stepper:
    def __init__(self, p: Process):
        self.restricted, self.soup, self.names = _configuration(p)
        self.cache: dict[int, _Expansion] = {}

    def expand(self, soup: tuple) -> _Expansion:
        key = id(soup)
        if key not in self.cache:
            self.cache[key] = (_Expansion(soup, self.names), soup)
        return self.cache[key][0]

    def resume(self, cont: Process, restricted: list) -> list:
        return _flatten(cont, self.names, restricted)

    def fire(self, cap: Cap, cont: Process, restricted: list, value: Name | None = None) -> list:
        if value is not None:
            cont = substitute(cont, value, cap.binder)
        return self.resume(cont, restricted)

    def successors(self) -> Iterator[tuple[Redex, Process]]:
        for redex, soup, restricted in self.search(self.soup, ()):
            yield redex, _to_process(self.restricted + restricted, soup)

    def search(self, soup: tuple, locus: tuple) -> Iterator[tuple[Redex, tuple, list]]:
        exp = self.expand(soup)
        units = list(exp.units())
        seqs = [(u, c) for u, c in units if not isinstance(c, Box)]
        boxes = [(u, c) for u, c in units if isinstance(c, Box)]

        # local communication between two sequential components
        for u1, c1 in seqs:
            for out, p_cont in _offers(c1):
                if out.kind != "output" or out.direction != "local":
                    continue
                for u2, c2 in seqs:
                    if u2 == u1:
                        continue
                    for inp, q_cont in _offers(c2):
                        if inp.kind == "input" and inp.direction == "local" and inp.channel == out.channel:
                            extra: list = []
                            changes = {
                                u1: self.fire(out, p_cont, extra),
                                u2: self.fire(inp, q_cont, extra, out.payload),
                            }
                            new, restricted, unf = exp.rebuild(changes)
                            yield Redex("comm_local", locus, (out, inp), unf), new, restricted + extra

        # parent-to-child and child-to-parent communication
        for ub, box in boxes:
            inner = self.expand(box.soup)
            inner_seqs = [(v, c) for v, c in inner.units() if not isinstance(c, Box)]
            for u1, c1 in seqs:
                for cap1, cont1 in _offers(c1):
                    if cap1.kind not in ("output", "input") or cap1.direction != "down":
                        continue
                    for v, c2 in inner_seqs:
                        for cap2, cont2 in _offers(c2):
                            if cap2.direction != "up" or cap2.channel != cap1.channel or cap2.kind == cap1.kind:
                                continue
                            extra = []
                            if cap1.kind == "output":
                                rule, parts = "comm_p2c", (cap1, cap2)
                                outer_new = self.fire(cap1, cont1, extra)
                                inner_new = self.fire(cap2, cont2, extra, cap1.payload)
                            else:
                                rule, parts = "comm_c2p", (cap2, cap1)
                                inner_new = self.fire(cap2, cont2, extra)
                                outer_new = self.fire(cap1, cont1, extra, cap2.payload)
                            box_soup, r1, n1 = inner.rebuild({v: inner_new})
                            new, r2, n2 = exp.rebuild({u1: outer_new, ub: [Box(box.label, box_soup)]})
                            yield Redex(rule, locus, parts, n1 + n2), new, r1 + r2 + extra

        # movements and sibling communication between two ambients
        for u1, a in boxes:
            ea = self.expand(a.soup)
            for u2, b in boxes:
                if u2 == u1:
                    continue
                eb = self.expand(b.soup)
                for v1, c1 in ea.units():
                    if isinstance(c1, Box):
                        continue
                    for cap1, cont1 in _offers(c1):
                        for v2, c2 in eb.units():
                            if isinstance(c2, Box):
                                continue
                            for cap2, cont2 in _offers(c2):
                                if cap2.channel != cap1.channel:
                                    continue
                                yield from self.pair(locus, exp, u1, a, ea, v1, cap1, cont1, u2, b, eb, v2, cap2, cont2)

        # exit/expel: a child of ``b`` leaves it, landing in this soup
        for ub, b in boxes:
            eb = self.expand(b.soup)
            for vx, cx in eb.units():
                if isinstance(cx, Box):
                    continue
                for expel, q_cont in _offers(cx):
                    if expel.kind != "expel":
                        continue
                    for va, a in eb.units():
                        if not isinstance(a, Box):
                            continue
                        ea = self.expand(a.soup)
                        for w, cw in ea.units():
                            if isinstance(cw, Box):
                                continue
                            for ex, p_cont in _offers(cw):
                                if ex.kind != "exit" or ex.channel != expel.channel:
                                    continue
                                extra = []
                                a_soup, r1, n1 = ea.rebuild({w: self.fire(ex, p_cont, extra)})
                                b_soup, r2, n2 = eb.rebuild({va: [], vx: self.fire(expel, q_cont, extra)})
                                new, r3, n3 = exp.rebuild({ub: [Box(b.label, b_soup), Box(a.label, a_soup)]})
                                yield (
                                    Redex("exit_expel", locus, (ex, expel), n1 + n2 + n3),
                                    new,
                                    r1 + r2 + r3 + extra,
                                )

        # steps inside an ambient
        for ub, b in boxes:
            for redex, b_soup, restricted in self.search(b.soup, locus + (b.label,)):
                new, r, n = exp.rebuild({ub: [Box(b.label, b_soup)]})
                redex = Redex(redex.rule, redex.locus, redex.participants, redex.unfolds + n)
                yield redex, new, restricted + r

    def pair(self, locus, exp, u1, a, ea, v1, cap1, cont1, u2, b, eb, v2, cap2, cont2):
        kinds = (cap1.kind, cap2.kind)
        extra: list = []
        if kinds == ("enter", "accept"):
            a_soup, r1, n1 = ea.rebuild({v1: self.fire(cap1, cont1, extra)})
            b_soup, r2, n2 = eb.rebuild({v2: self.fire(cap2, cont2, extra)}, [Box(a.label, a_soup)])
            new, r3, n3 = exp.rebuild({u1: [], u2: [Box(b.label, b_soup)]})
            yield Redex("enter_accept", locus, (cap1, cap2), n1 + n2 + n3), new, r1 + r2 + r3 + extra
        elif kinds == ("merge_plus", "merge_minus"):
            a_soup, r1, n1 = ea.rebuild({v1: self.fire(cap1, cont1, extra)})
            b_soup, r2, n2 = eb.rebuild({v2: self.fire(cap2, cont2, extra)})
            new, r3, n3 = exp.rebuild({u1: [Box(a.label, a_soup + b_soup)], u2: []})
            yield Redex("merge", locus, (cap1, cap2), n1 + n2 + n3), new, r1 + r2 + r3 + extra
        elif (
            kinds == ("output", "input")
            and cap1.direction == "sibling"
            and cap2.direction == "sibling"
        ):
            a_soup, r1, n1 = ea.rebuild({v1: self.fire(cap1, cont1, extra)})
            b_soup, r2, n2 = eb.rebuild({v2: self.fire(cap2, cont2, extra, cap1.payload)})
            new, r3, n3 = exp.rebuild({u1: [Box(a.label, a_soup)], u2: [Box(b.label, b_soup)]})
            yield Redex("comm_s2s", locus, (cap1, cap2), n1 + n2 + n3), new, r1 + r2 + r3 + extra


def step(p: Process) -> set[tuple[Redex, Process]]:
    """Every one-step successor of ``p``, each normalized."""
    return {(redex, normalize(q)) for redex, q in _Stepper(p).successors()}


def explore(p: Process, max_depth: int = DEFAULT_MAX_DEPTH, max_states: int = DEFAULT_MAX_STATES) -> StateSpace:
    """Breadth-first closure of :func:`step` from ``p``.

    ``truncated`` is set when a bound stopped the search while some
    unexplored state still had an unseen successor.
    """
    if max_depth < 0 or max_states < 1:
        raise ValueError("max_depth must be >= 0 and max_states >= 1")
    start = normalize(p)
    index = {start: 0}
    states = [start]
    depths = [0]
    edges = []
    truncated = False
    depth_reached = 0
    queue = deque([0])
    while queue:
        sid = queue.popleft()
        succ = sorted(step(states[sid]), key=_edge_order)
        if depths[sid] >= max_depth:
            if any(q not in index for _, q in succ):
                truncated = True
            continue
        for redex, q in succ:
            tid = index.get(q)
            if tid is None:
                if len(states) >= max_states:
                    truncated = True
                    continue
                tid = index[q] = len(states)
                states.append(q)
                depths.append(depths[sid] + 1)
                depth_reached = max(depth_reached, depths[sid] + 1)
                queue.append(tid)
            edges.append((sid, redex, tid))
    return StateSpace(start, tuple(states), tuple(edges), depth_reached, truncated, tuple(depths))


def _edge_order(item) -> tuple:
    redex, q = item
    return (
        redex.rule,
        redex.locus,
        tuple(term_key(Prefix(c, Zero())) for c in redex.participants),
        redex.unfolds,
        term_key(q),
    )


def containment_pairs(p: Process, top: str) -> set[tuple[str, str]]:
    """``(parent, child)`` ambient pairs in the active part of ``p``."""
    out: set[tuple[str, str]] = set()

    def go(q: Process, parent: str) -> None:
        if isinstance(q, Amb):
            out.add((parent, q.label))
            go(q.body, q.label)
        elif isinstance(q, Par):
            go(q.left, parent)
            go(q.right, parent)
        elif isinstance(q, Restrict):
            go(q.body, parent)

    go(p, top)
    return out
