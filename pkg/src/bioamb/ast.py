"""Process terms, names, free names and capture-avoiding substitution.

A name is a pair ``(text, site)``. ``site`` identifies the syntactic binder
(restriction or input prefix) that introduced the name; free names have no
site. Alpha-renaming only ever changes ``text``, so the canonical name of an
occurrence, which is derived from its site, survives renaming and the
duplication of binders by recursion unfolding.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Union

__all__ = [
    "Site",
    "Name",
    "CanonicalName",
    "Cap",
    "CanonCap",
    "Zero",
    "Restrict",
    "Amb",
    "Prefix",
    "Par",
    "Choice",
    "Rec",
    "Var",
    "Process",
    "TermError",
    "MOVEMENTS",
    "COMMUNICATIONS",
    "DIRECTIONS",
    "free_names",
    "all_names",
    "binders",
    "ambient_labels",
    "canonicalize",
    "substitute",
    "substitute_process_var",
    "alpha_equal",
    "fresh_name",
    "rename_bound",
    "check_well_formed",
    "par",
    "choice",
]

MOVEMENTS = ("enter", "accept", "exit", "expel", "merge_plus", "merge_minus")
COMMUNICATIONS = ("output", "input")
DIRECTIONS = ("local", "down", "up", "sibling")


@dataclass(frozen=True)
class Site:
    """A binder site; ``hint`` is the text the binder was written with."""

    id: int
    hint: str = field(default="", compare=False)


@dataclass(frozen=True)
class Name:
    text: str
    site: Site | None = None

    @property
    def canonical(self) -> CanonicalName:
        if self.site is None:
            return CanonicalName(("f", self.text), self.text)
        return CanonicalName(("b", self.site.id), self.site.hint or self.text)

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True, order=True)
class CanonicalName:
    key: tuple
    label: str = field(compare=False)

    @property
    def is_free(self) -> bool:
        return self.key[0] == "f"

    def __str__(self) -> str:
        if self.is_free:
            return self.label
        return f"{self.label}#{self.key[1]}"


@dataclass(frozen=True)
class Cap:
    """A capability prefix.

    ``direction`` is set for communications only, ``payload`` for outputs
    and ``binder`` for inputs.
    """

    kind: str
    channel: Name
    direction: str | None = None
    payload: Name | None = None
    binder: Name | None = None

    def __post_init__(self) -> None:
        if self.kind in MOVEMENTS:
            if self.direction or self.payload or self.binder:
                raise TermError("syntax", f"movement {self.kind} takes only a channel")
        elif self.kind == "output":
            if self.direction not in DIRECTIONS or self.payload is None or self.binder:
                raise TermError("syntax", "output needs a direction and a payload")
        elif self.kind == "input":
            if self.direction not in DIRECTIONS or self.binder is None or self.payload:
                raise TermError("syntax", "input needs a direction and a binder")
        else:
            raise TermError("syntax", f"unknown capability kind {self.kind!r}")

    def names(self) -> tuple[Name, ...]:
        """Used (non-binding) name occurrences."""
        if self.kind == "output":
            return (self.channel, self.payload)
        return (self.channel,)

    def rename(self, sigma: dict[Name, Name]) -> Cap:
        ch = sigma.get(self.channel, self.channel)
        if self.kind == "output":
            return Cap("output", ch, self.direction, payload=sigma.get(self.payload, self.payload))
        if self.kind == "input":
            return Cap("input", ch, self.direction, binder=self.binder)
        return Cap(self.kind, ch)

    def canon(self) -> CanonCap:
        return CanonCap(
            self.kind,
            self.channel.canonical,
            self.direction,
            self.payload.canonical if self.payload else None,
            self.binder.canonical if self.binder else None,
        )


_MARK = {"local": "", "down": "v", "up": "^", "sibling": "#"}
_KEYWORD = {"merge_plus": "merge+", "merge_minus": "merge-"}


@dataclass(frozen=True)
class CanonCap:
    kind: str
    channel: CanonicalName
    direction: str | None = None
    payload: CanonicalName | None = None
    binder: CanonicalName | None = None

    def sort_key(self) -> tuple:
        return (
            self.kind,
            self.direction or "",
            self.channel,
            self.payload or CanonicalName(("", ""), ""),
            self.binder or CanonicalName(("", ""), ""),
        )

    def __str__(self) -> str:
        if self.kind == "output":
            return f"{self.channel}!{_MARK[self.direction]}{{{self.payload}}}"
        if self.kind == "input":
            return f"{self.channel}?{_MARK[self.direction]}{{{self.binder}}}"
        return f"{_KEYWORD.get(self.kind, self.kind)} {self.channel}"


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Restrict:
    name: Name
    body: Process


@dataclass(frozen=True)
class Amb:
    label: str
    body: Process


@dataclass(frozen=True)
class Prefix:
    cap: Cap
    cont: Process


@dataclass(frozen=True)
class Par:
    left: Process
    right: Process


@dataclass(frozen=True)
class Choice:
    left: Process
    right: Process


@dataclass(frozen=True)
class Rec:
    var: str
    body: Process


@dataclass(frozen=True)
class Var:
    var: str


Process = Union[Zero, Restrict, Amb, Prefix, Par, Choice, Rec, Var]


class TermError(ValueError):
    """A term violates a well-formedness condition."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind
        self.message = message


def par(items) -> Process:
    """Right-nested parallel composition of ``items`` (``0`` when empty)."""
    items = list(items)
    if not items:
        return Zero()
    out = items[-1]
    for p in reversed(items[:-1]):
        out = Par(p, out)
    return out


def choice(items) -> Process:
    items = list(items)
    out = items[-1]
    for p in reversed(items[:-1]):
        out = Choice(p, out)
    return out


@lru_cache(maxsize=1 << 16)
def free_names(p: Process) -> frozenset[Name]:
    if isinstance(p, (Zero, Var)):
        return frozenset()
    if isinstance(p, Restrict):
        return free_names(p.body) - {p.name}
    if isinstance(p, (Amb, Rec)):
        return free_names(p.body)
    if isinstance(p, Prefix):
        inner = free_names(p.cont)
        if p.cap.kind == "input":
            inner = inner - {p.cap.binder}
        return inner | frozenset(p.cap.names())
    return free_names(p.left) | free_names(p.right)


def all_names(p: Process) -> set[Name]:
    """Every name occurring in ``p``, binding occurrences included."""
    out: set[Name] = set()
    for node in _walk(p):
        if isinstance(node, Restrict):
            out.add(node.name)
        elif isinstance(node, Prefix):
            out.update(node.cap.names())
            if node.cap.binder is not None:
                out.add(node.cap.binder)
    return out


def binders(p: Process) -> list[Name]:
    """Binding occurrences in preorder."""
    out = []
    for node in _walk(p):
        if isinstance(node, Restrict):
            out.append(node.name)
        elif isinstance(node, Prefix) and node.cap.binder is not None:
            out.append(node.cap.binder)
    return out


def ambient_labels(p: Process) -> list[str]:
    """Ambient identities in preorder, with repetitions."""
    return [node.label for node in _walk(p) if isinstance(node, Amb)]


def _walk(p: Process) -> Iterator[Process]:
    stack = [p]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, (Par, Choice)):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, (Restrict, Amb, Rec)):
            stack.append(node.body)
        elif isinstance(node, Prefix):
            stack.append(node.cont)


def canonicalize(p: Process) -> dict[tuple, CanonicalName]:
    """Map every name occurrence to its canonical name.

    Keys are ``(path, role)`` where ``path`` is the tuple of child indexes
    leading to the node and ``role`` is ``"binder"``, ``"channel"`` or
    ``"payload"``.
    """
    out: dict[tuple, CanonicalName] = {}

    def go(q: Process, path: tuple) -> None:
        if isinstance(q, Restrict):
            out[(path, "binder")] = q.name.canonical
            go(q.body, path + (0,))
        elif isinstance(q, (Amb, Rec)):
            go(q.body, path + (0,))
        elif isinstance(q, Prefix):
            out[(path, "channel")] = q.cap.channel.canonical
            if q.cap.payload is not None:
                out[(path, "payload")] = q.cap.payload.canonical
            if q.cap.binder is not None:
                out[(path, "binder")] = q.cap.binder.canonical
            go(q.cont, path + (0,))
        elif isinstance(q, (Par, Choice)):
            go(q.left, path + (0,))
            go(q.right, path + (1,))

    go(p, ())
    return out


def fresh_name(name: Name, avoid) -> Name:
    """A name with the same site as ``name`` that is not in ``avoid``."""
    base = name.text.rsplit("_", 1)[0] if _numbered(name.text) else name.text
    for k in itertools.count(1):
        candidate = Name(f"{base}_{k}", name.site)
        if candidate not in avoid:
            return candidate
    raise AssertionError("unreachable")


def _numbered(text: str) -> bool:
    head, sep, tail = text.rpartition("_")
    return bool(sep and head and tail.isdigit())


def substitute(p: Process, value: Name, variable: Name) -> Process:
    """``p[value/variable]``, renaming binders that would capture ``value``."""
    if variable not in free_names(p):
        return p
    return _subst(p, {variable: value})


def _enter_binder(binder: Name, body: Process, sigma: dict[Name, Name]):
    sigma = {k: v for k, v in sigma.items() if k != binder}
    live = free_names(body)
    sigma = {k: v for k, v in sigma.items() if k in live}
    if binder in sigma.values():
        avoid = set(live) | set(sigma.values()) | set(sigma) | {binder}
        new = fresh_name(binder, avoid)
        sigma[binder] = new
        return new, sigma
    return binder, sigma


def _subst(p: Process, sigma: dict[Name, Name]) -> Process:
    if not sigma:
        return p
    if isinstance(p, (Zero, Var)):
        return p
    if isinstance(p, Restrict):
        name, inner = _enter_binder(p.name, p.body, sigma)
        return Restrict(name, _subst(p.body, inner))
    if isinstance(p, Amb):
        return Amb(p.label, _subst(p.body, sigma))
    if isinstance(p, Rec):
        return Rec(p.var, _subst(p.body, sigma))
    if isinstance(p, Prefix):
        cap = p.cap.rename(sigma)
        if cap.kind == "input":
            binder, inner = _enter_binder(cap.binder, p.cont, sigma)
            cap = Cap("input", cap.channel, cap.direction, binder=binder)
            return Prefix(cap, _subst(p.cont, inner))
        return Prefix(cap, _subst(p.cont, sigma))
    return type(p)(_subst(p.left, sigma), _subst(p.right, sigma))


def substitute_process_var(p: Process, var: str, value: Process) -> Process:
    """``p[value/var]`` for a process identifier, avoiding name capture."""
    exposed = free_names(value)

    def go(q: Process) -> Process:
        if isinstance(q, Var):
            return value if q.var == var else q
        if isinstance(q, Zero):
            return q
        if isinstance(q, Rec):
            return q if q.var == var else Rec(q.var, go(q.body))
        if isinstance(q, Amb):
            return Amb(q.label, go(q.body))
        if isinstance(q, Restrict):
            if q.name in exposed and _mentions_var(q.body, var):
                new = fresh_name(q.name, exposed | all_names(q.body) | {q.name})
                return Restrict(new, go(_subst(q.body, {q.name: new})))
            return Restrict(q.name, go(q.body))
        if isinstance(q, Prefix):
            b = q.cap.binder
            if b is not None and b in exposed and _mentions_var(q.cont, var):
                new = fresh_name(b, exposed | all_names(q.cont) | {b})
                cap = Cap("input", q.cap.channel, q.cap.direction, binder=new)
                return Prefix(cap, go(_subst(q.cont, {b: new})))
            return Prefix(q.cap, go(q.cont))
        return type(q)(go(q.left), go(q.right))

    return go(p)


def _mentions_var(p: Process, var: str) -> bool:
    for node in _walk(p):
        if isinstance(node, Var) and node.var == var:
            return True
        # a nested rec of the same identifier shadows; _walk still visits it,
        # which only makes renaming more eager
    return False


def alpha_equal(p: Process, q: Process) -> bool:
    """True iff ``p`` and ``q`` differ only in the choice of bound names."""
    return _alpha(p, q, {}, {}, {}, {}, 0)


def _alpha(p, q, env_p, env_q, rec_p, rec_q, depth) -> bool:
    if type(p) is not type(q):
        return False
    if isinstance(p, Zero):
        return True
    if isinstance(p, Var):
        return rec_p.get(p.var, p.var) == rec_q.get(q.var, q.var)
    if isinstance(p, Rec):
        tag = ("rec", depth)
        return _alpha(
            p.body, q.body, env_p, env_q,
            {**rec_p, p.var: tag}, {**rec_q, q.var: tag}, depth + 1,
        )
    if isinstance(p, Amb):
        return p.label == q.label and _alpha(p.body, q.body, env_p, env_q, rec_p, rec_q, depth)
    if isinstance(p, Restrict):
        return _alpha(
            p.body, q.body, {**env_p, p.name: depth}, {**env_q, q.name: depth},
            rec_p, rec_q, depth + 1,
        )
    if isinstance(p, Prefix):
        a, b = p.cap, q.cap
        if (a.kind, a.direction) != (b.kind, b.direction):
            return False
        if not _same_name(a.channel, b.channel, env_p, env_q):
            return False
        if a.kind == "output" and not _same_name(a.payload, b.payload, env_p, env_q):
            return False
        if a.kind == "input":
            return _alpha(
                p.cont, q.cont, {**env_p, a.binder: depth}, {**env_q, b.binder: depth},
                rec_p, rec_q, depth + 1,
            )
        return _alpha(p.cont, q.cont, env_p, env_q, rec_p, rec_q, depth)
    return _alpha(p.left, q.left, env_p, env_q, rec_p, rec_q, depth) and _alpha(
        p.right, q.right, env_p, env_q, rec_p, rec_q, depth
    )


def _same_name(a: Name, b: Name, env_a, env_b) -> bool:
    la, lb = env_a.get(a), env_b.get(b)
    if la is None and lb is None:
        return a == b
    return la == lb


def rename_bound(p: Process, pick) -> Process:
    """Alpha-rename every binder of ``p``; ``pick(name)`` returns the new text.

    Sites are kept, so canonical names are unchanged. The caller must make
    ``pick`` injective enough to avoid capture; the result is checked.
    """

    def go(q: Process, sigma: dict[Name, Name]) -> Process:
        if isinstance(q, (Zero, Var)):
            return q
        if isinstance(q, Restrict):
            new = Name(pick(q.name), q.name.site)
            return Restrict(new, go(q.body, {**sigma, q.name: new}))
        if isinstance(q, (Amb, Rec)):
            return type(q)(q.label if isinstance(q, Amb) else q.var, go(q.body, sigma))
        if isinstance(q, Prefix):
            cap = q.cap.rename(sigma)
            if cap.kind == "input":
                new = Name(pick(cap.binder), cap.binder.site)
                cap = Cap("input", cap.channel, cap.direction, binder=new)
                return Prefix(cap, go(q.cont, {**sigma, q.cap.binder: new}))
            return Prefix(cap, go(q.cont, sigma))
        return type(q)(go(q.left, sigma), go(q.right, sigma))

    out = go(p, {})
    if not alpha_equal(p, out):
        raise TermError("syntax", "renaming captured a name")
    return out


def check_well_formed(p: Process) -> None:
    """Raise :class:`TermError` unless ``p`` is a closed, guarded term.

    Closed: every process identifier is bound by an enclosing ``rec``.
    Guarded: choice branches start with a prefix, and every recursion
    variable occurs under a prefix of its own ``rec`` body.
    """

    def go(q: Process, bound: frozenset, unguarded: frozenset) -> None:
        if isinstance(q, Var):
            if q.var not in bound:
                raise TermError("unbound-process-variable", f"process identifier {q.var} is not bound")
            if q.var in unguarded:
                raise TermError("unguarded-recursion", f"{q.var} occurs unguarded in its rec body")
        elif isinstance(q, Rec):
            go(q.body, bound | {q.var}, unguarded | {q.var})
        elif isinstance(q, Prefix):
            go(q.cont, bound, frozenset())
        elif isinstance(q, Choice):
            for branch in (q.left, q.right):
                if not isinstance(branch, (Prefix, Choice)):
                    raise TermError("unguarded-choice", "choice branch must start with a prefix")
                go(branch, bound, unguarded)
        elif isinstance(q, Par):
            go(q.left, bound, unguarded)
            go(q.right, bound, unguarded)
        elif isinstance(q, (Restrict, Amb)):
            go(q.body, bound, unguarded)

    go(p, frozenset(), frozenset())
