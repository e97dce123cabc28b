"""Control-flow analysis: the ambient-contents relation and the
name-binding relation, computed as the least solution of constraints
generated from a process plus the closure rules for movements and
communication.

Contents are keyed by ambient identity (the reserved :data:`TOP` encloses
the whole process); items are ambient identities or canonical
capabilities. Bindings map a canonical name to the canonical names it may
take on.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from .ast import (
    Amb,
    CanonCap,
    CanonicalName,
    Choice,
    MOVEMENTS,
    Par,
    Prefix,
    Process,
    Rec,
    Restrict,
    TermError,
    Var,
    Zero,
    check_well_formed,
    free_names,
)

__all__ = [
    "TOP",
    "Item",
    "Member",
    "CapRule",
    "Constraint",
    "AnalysisResult",
    "generate_constraints",
    "solve",
    "analyze",
    "validate",
    "judgment_violations",
    "closure_violations",
    "item_key",
]

TOP = "⊤"

Item = Union[str, CanonCap]


@dataclass(frozen=True)
class Member:
    """Unconditional membership: ``item`` in contents(owner) when
    ``relation == "contents"``, or ``item`` in bindings(owner)."""

    relation: str
    owner: Union[str, CanonicalName]
    item: Union[str, CanonCap, CanonicalName]


@dataclass(frozen=True)
class CapRule:
    """For every value of the channel (and payload, for outputs) in the
    bindings relation, the instantiated capability is in contents(star)."""

    star: str
    kind: str
    channel: CanonicalName
    direction: str | None = None
    payload: CanonicalName | None = None
    binder: CanonicalName | None = None

    def watched(self) -> tuple[CanonicalName, ...]:
        return (self.channel, self.payload) if self.payload is not None else (self.channel,)

    def instance(self, channel: CanonicalName, payload: CanonicalName | None = None) -> CanonCap:
        return CanonCap(self.kind, channel, self.direction, payload, self.binder)


Constraint = Union[Member, CapRule]


def item_key(item) -> tuple:
    if isinstance(item, str):
        return (0, item)
    if isinstance(item, CanonCap):
        return (1, item.sort_key())
    return (2, item)


@dataclass(frozen=True)
class AnalysisResult:
    contents: Mapping[str, frozenset]
    bindings: Mapping[CanonicalName, frozenset]
    top: str = TOP
    stats: Mapping[str, int] = field(default_factory=dict, compare=False)

    @property
    def ambients(self) -> list[str]:
        found = set(self.contents)
        for items in self.contents.values():
            found.update(i for i in items if isinstance(i, str))
        return sorted(found - {self.top})

    def items(self, mu: str) -> frozenset:
        return self.contents.get(mu, frozenset())

    def children(self, mu: str) -> set[str]:
        return {i for i in self.items(mu) if isinstance(i, str)}

    def values(self, name: CanonicalName) -> frozenset:
        return self.bindings.get(name, frozenset())

    def pairs(self) -> set[tuple[str, str]]:
        """Ambient-ambient memberships as ``(parent, child)`` pairs."""
        return {(mu, a) for mu in self.contents for a in self.children(mu)}

    def memberships(self) -> set[Member]:
        out = {Member("contents", mu, i) for mu, items in self.contents.items() for i in items}
        out |= {Member("bindings", n, v) for n, vs in self.bindings.items() for v in vs}
        return out

    def size(self) -> int:
        return sum(map(len, self.contents.values())) + sum(map(len, self.bindings.values()))


# --- constraint generation ---------------------------------------------------


def generate_constraints(p: Process, top: str = TOP) -> frozenset[Constraint]:
    """Constraints whose least solution satisfies the judgment for ``p`` at
    ``top``.

    A process identifier occurring under a different ambient than its
    ``rec`` also gets the ``rec`` body generated at that ambient; unfolding
    moves the body there, and without it the judgment is not preserved.
    """
    try:
        check_well_formed(p)
    except TermError as exc:
        raise ValueError(f"cannot analyze ill-formed process: {exc.message}") from None
    out: set[Constraint] = set()
    for n in free_names(p):
        c = n.canonical
        out.add(Member("bindings", c, c))
    done: set = set()

    def go(q: Process, star: str, recs: dict) -> None:
        if isinstance(q, Zero):
            return
        if isinstance(q, Var):
            rec, env = recs[q.var]
            if (rec, star) not in done:
                done.add((rec, star))
                go(rec.body, star, {**env, rec.var: (rec, env)})
            return
        if isinstance(q, Restrict):
            c = q.name.canonical
            out.add(Member("bindings", c, c))
            go(q.body, star, recs)
        elif isinstance(q, Amb):
            out.add(Member("contents", star, q.label))
            go(q.body, q.label, recs)
        elif isinstance(q, Prefix):
            out.add(_cap_rule(q.cap, star))
            go(q.cont, star, recs)
        elif isinstance(q, (Par, Choice)):
            go(q.left, star, recs)
            go(q.right, star, recs)
        elif isinstance(q, Rec):
            done.add((q, star))
            go(q.body, star, {**recs, q.var: (q, recs)})

    go(p, top, {})
    return frozenset(out)


def _cap_rule(cap, star: str) -> CapRule:
    c = cap.canon()
    return CapRule(star, c.kind, c.channel, c.direction, c.payload, c.binder)


# --- solving -----------------------------------------------------------------


class _Solver:
    def __init__(self, closure: bool):
        self.closure = closure
        self.contents: dict[str, set] = defaultdict(set)
        self.bindings: dict[CanonicalName, set] = defaultdict(set)
        self.seen: set = set()
        self.queue: deque = deque()
        # indexes over processed facts
        self.kids: dict[str, set] = defaultdict(set)
        self.parents: dict[str, set] = defaultdict(set)
        self.moves: dict[str, set] = defaultdict(set)
        self.outs: dict[str, dict] = defaultdict(lambda: defaultdict(set))
        self.ins: dict[str, dict] = defaultdict(lambda: defaultdict(set))
        self.values: dict[CanonicalName, set] = defaultdict(set)
        self.subsets: dict[str, set] = defaultdict(set)
        self.watch: dict[CanonicalName, list[CapRule]] = defaultdict(list)
        self.processed = 0
        self.ambients: set[str] = set()

    def add(self, relation: str, owner, item) -> None:
        fact = (relation, owner, item)
        if fact in self.seen:
            return
        self.seen.add(fact)
        if relation == "contents":
            self.contents[owner].add(item)
        else:
            self.bindings[owner].add(item)
        self.queue.append(fact)

    def include(self, src: str, dst: str) -> None:
        """contents(src) is a subset of contents(dst)."""
        if dst in self.subsets[src]:
            return
        self.subsets[src].add(dst)
        for item in list(self.contents[src]):
            self.add("contents", dst, item)

    def bind(self, variable: CanonicalName, value: CanonicalName) -> None:
        self.add("bindings", variable, value)

    def run(self, constraints: Iterable[Constraint]) -> None:
        for c in sorted(constraints, key=_constraint_key):
            if isinstance(c, Member):
                self.add(c.relation, c.owner, c.item)
                if c.relation == "contents":
                    self.ambients.add(c.owner)
            else:
                self.ambients.add(c.star)
                for name in set(c.watched()):
                    self.watch[name].append(c)
        while self.queue:
            relation, owner, item = self.queue.popleft()
            self.processed += 1
            if relation == "bindings":
                self.on_binding(owner, item)
            elif isinstance(item, str):
                self.on_ambient(owner, item)
            else:
                self.on_cap(owner, item)

    def on_binding(self, name: CanonicalName, value: CanonicalName) -> None:
        self.values[name].add(value)
        for rule in self.watch[name]:
            if rule.kind == "output":
                if rule.channel == name:
                    for m in list(self.values[rule.payload]):
                        self.add("contents", rule.star, rule.instance(value, m))
                if rule.payload == name:
                    for n in list(self.values[rule.channel]):
                        self.add("contents", rule.star, rule.instance(n, value))
            else:
                self.add("contents", rule.star, rule.instance(value))

    def on_ambient(self, mu: str, a: str) -> None:
        self.kids[mu].add(a)
        self.parents[a].add(mu)
        for dst in list(self.subsets[mu]):
            self.add("contents", dst, a)
        if not self.closure:
            return
        siblings = self.kids[mu]
        for kind, n in list(self.moves[a]):
            if kind == "enter":
                for c in siblings:
                    if ("accept", n) in self.moves[c]:
                        self.add("contents", c, a)
            elif kind == "accept":
                for c in siblings:
                    if ("enter", n) in self.moves[c]:
                        self.add("contents", a, c)
            elif kind == "merge_plus":
                for c in list(siblings):
                    if ("merge_minus", n) in self.moves[c]:
                        self.include(c, a)
            elif kind == "merge_minus":
                for c in list(siblings):
                    if ("merge_plus", n) in self.moves[c]:
                        self.include(a, c)
            elif kind == "expel":
                # a is the parent being left; its children exit into mu
                for c in self.kids[a]:
                    if ("exit", n) in self.moves[c]:
                        self.add("contents", mu, c)
            elif kind == "exit":
                # a leaves mu when mu can expel it; it lands in mu's parents
                if ("expel", n) in self.moves[mu]:
                    for g in self.parents[mu]:
                        self.add("contents", g, a)
        for (d, n), ms in list(self.outs[mu].items()):
            if d == "down":
                for p in self.ins[a].get(("up", n), ()):
                    for m in ms:
                        self.bind(p, m)
        for (d, n), ms in list(self.outs[a].items()):
            if d == "up":
                for p in self.ins[mu].get(("down", n), ()):
                    for m in ms:
                        self.bind(p, m)
            elif d == "sibling":
                for c in siblings:
                    for p in self.ins[c].get(("sibling", n), ()):
                        for m in ms:
                            self.bind(p, m)
        for (d, n), ps in list(self.ins[a].items()):
            if d == "sibling":
                for c in siblings:
                    for m in self.outs[c].get(("sibling", n), ()):
                        for p in ps:
                            self.bind(p, m)

    def on_cap(self, mu: str, cap: CanonCap) -> None:
        for dst in list(self.subsets[mu]):
            self.add("contents", dst, cap)
        n = cap.channel
        if cap.kind in MOVEMENTS:
            self.moves[mu].add((cap.kind, n))
        elif cap.kind == "output":
            self.outs[mu][(cap.direction, n)].add(cap.payload)
        else:
            self.ins[mu][(cap.direction, n)].add(cap.binder)
        if not self.closure:
            return
        kind = cap.kind
        if kind == "enter":
            for par in list(self.parents[mu]):
                for c in self.kids[par]:
                    if ("accept", n) in self.moves[c]:
                        self.add("contents", c, mu)
        elif kind == "accept":
            for par in list(self.parents[mu]):
                for c in self.kids[par]:
                    if ("enter", n) in self.moves[c]:
                        self.add("contents", mu, c)
        elif kind == "exit":
            for par in list(self.parents[mu]):
                if ("expel", n) in self.moves[par]:
                    for g in list(self.parents[par]):
                        self.add("contents", g, mu)
        elif kind == "expel":
            for c in list(self.kids[mu]):
                if ("exit", n) in self.moves[c]:
                    for g in list(self.parents[mu]):
                        self.add("contents", g, c)
        elif kind == "merge_plus":
            for par in list(self.parents[mu]):
                for c in list(self.kids[par]):
                    if ("merge_minus", n) in self.moves[c]:
                        self.include(c, mu)
        elif kind == "merge_minus":
            for par in list(self.parents[mu]):
                for c in list(self.kids[par]):
                    if ("merge_plus", n) in self.moves[c]:
                        self.include(mu, c)
        elif kind == "output":
            m = cap.payload
            for p in self._partners(mu, cap.direction, n, self.ins, "input"):
                self.bind(p, m)
        else:
            p = cap.binder
            for m in self._partners(mu, cap.direction, n, self.outs, "output"):
                self.bind(p, m)

    def _partners(self, mu: str, direction: str, n: CanonicalName, index, kind) -> list:
        """Names offered by matching capabilities of the opposite polarity."""
        out: list = []
        if direction == "local":
            out.extend(index[mu].get(("local", n), ()))
        elif direction == "down":
            # parent side: partner is an up-capability in a child
            for c in list(self.kids[mu]):
                out.extend(index[c].get(("up", n), ()))
        elif direction == "up":
            for par in list(self.parents[mu]):
                out.extend(index[par].get(("down", n), ()))
        else:
            for par in list(self.parents[mu]):
                for c in list(self.kids[par]):
                    out.extend(index[c].get(("sibling", n), ()))
        return out

    def result(self, constraints: int, top: str) -> AnalysisResult:
        keys = set(self.contents) | self.ambients | {top}
        for items in self.contents.values():
            keys.update(i for i in items if isinstance(i, str))
        contents = {mu: frozenset(self.contents.get(mu, ())) for mu in sorted(keys)}
        bindings = {n: frozenset(vs) for n, vs in sorted(self.bindings.items()) if vs}
        stats = {"iterations": self.processed, "constraints": constraints}
        return AnalysisResult(contents, bindings, top, stats)


def _constraint_key(c: Constraint) -> tuple:
    if isinstance(c, Member):
        return (0, c.relation, str(c.owner), item_key(c.item))
    return (1, c.star, c.kind, c.direction or "", c.channel, c.payload or c.channel, c.binder or c.channel)


def solve(constraints: Iterable[Constraint], closure: bool = True, top: str = TOP) -> AnalysisResult:
    """Least relations satisfying ``constraints`` and, unless ``closure`` is
    false, the closure rules for movement and communication."""
    constraints = list(constraints)
    solver = _Solver(closure)
    solver.run(constraints)
    return solver.result(len(constraints), top)


def analyze(p: Process, top: str = TOP) -> AnalysisResult:
    return solve(generate_constraints(p, top), top=top)


# --- checking ----------------------------------------------------------------


def judgment_violations(result: AnalysisResult, p: Process, star: str) -> list[tuple[str, str]]:
    """Failed judgment clauses for ``p`` at ``star`` as ``(rule, detail)``.

    Checked structurally, with process identifiers trivially satisfied.
    """
    out: list[tuple[str, str]] = []

    def go(q: Process, star: str) -> None:
        if isinstance(q, (Zero, Var)):
            return
        if isinstance(q, Restrict):
            c = q.name.canonical
            if c not in result.values(c):
                out.append(("restriction", f"{c} not in bindings({c})"))
            go(q.body, star)
        elif isinstance(q, Amb):
            if q.label not in result.items(star):
                out.append(("ambient", f"{q.label} not in contents({star})"))
            go(q.body, q.label)
        elif isinstance(q, Prefix):
            _check_cap(result, q.cap, star, out)
            go(q.cont, star)
        elif isinstance(q, (Par, Choice)):
            go(q.left, star)
            go(q.right, star)
        elif isinstance(q, Rec):
            go(q.body, star)

    go(p, star)
    return out


def _check_cap(result: AnalysisResult, cap, star: str, out: list) -> None:
    rule = _cap_rule(cap, star)
    items = result.items(star)
    payloads = result.values(rule.payload) if rule.kind == "output" else (None,)
    for n in sorted(result.values(rule.channel)):
        for m in sorted(payloads, key=lambda v: v or n):
            inst = rule.instance(n, m)
            if inst not in items:
                out.append((cap.kind, f"{inst} not in contents({star})"))


def validate(result: AnalysisResult, p: Process, star: str = TOP) -> bool:
    """True iff ``result`` satisfies the judgment for ``p`` at ``star``."""
    return not judgment_violations(result, p, star)


def closure_violations(result: AnalysisResult) -> list[tuple[str, str]]:
    """Closure rules not satisfied by ``result``, checked by enumeration."""
    out: list[tuple[str, str]] = []
    mus = list(result.contents)

    def caps(mu, kind):
        return [i for i in result.items(mu) if isinstance(i, CanonCap) and i.kind == kind]

    def has(mu, kind, n):
        return any(c.channel == n for c in caps(mu, kind))

    for mu in mus:
        for m1 in result.children(mu):
            for m2 in result.children(mu):
                for c in caps(m1, "enter"):
                    if has(m2, "accept", c.channel) and m1 not in result.items(m2):
                        out.append(("enter/accept", f"{m1} not in contents({m2})"))
                for c in caps(m1, "merge_plus"):
                    if has(m2, "merge_minus", c.channel) and not result.items(m2) <= result.items(m1):
                        out.append(("merge", f"contents({m2}) not within contents({m1})"))
                for o in caps(m1, "output"):
                    for i in caps(m2, "input"):
                        if o.direction == i.direction == "sibling" and o.channel == i.channel:
                            if o.payload not in result.values(i.binder):
                                out.append(("to sibling", f"{o.payload} not in bindings({i.binder})"))
            for m1 in result.children(mu):
                for c in caps(m1, "exit"):
                    # mu plays the parent being left; its parents receive m1
                    if has(mu, "expel", c.channel):
                        for g in mus:
                            if mu in result.items(g) and m1 not in result.items(g):
                                out.append(("exit/expel", f"{m1} not in contents({g})"))
                for o in caps(mu, "output"):
                    for i in caps(m1, "input"):
                        if (o.direction, i.direction) == ("down", "up") and o.channel == i.channel:
                            if o.payload not in result.values(i.binder):
                                out.append(("to child", f"{o.payload} not in bindings({i.binder})"))
                for o in caps(m1, "output"):
                    for i in caps(mu, "input"):
                        if (o.direction, i.direction) == ("up", "down") and o.channel == i.channel:
                            if o.payload not in result.values(i.binder):
                                out.append(("to parent", f"{o.payload} not in bindings({i.binder})"))
        for o in caps(mu, "output"):
            for i in caps(mu, "input"):
                if o.direction == i.direction == "local" and o.channel == i.channel:
                    if o.payload not in result.values(i.binder):
                        out.append(("to local", f"{o.payload} not in bindings({i.binder})"))
    return out
