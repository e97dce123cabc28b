"""Desk-scale checking of the analysis against the semantics.

:func:`check_theorem` explores the reachable states of a process and
re-checks the analysis judgment on each one; :func:`measure_precision`
compares the parent/child pairs actually observed with those predicted.
:func:`random_process` generates small terms for randomized runs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .ast import Amb, Prefix, Process, _walk
from .cfa import TOP, AnalysisResult, analyze, judgment_violations
from .parser import parse, pretty
from .semantics import RULES, StateSpace, containment_pairs, explore

__all__ = [
    "VerificationReport",
    "PrecisionReport",
    "check_theorem",
    "measure_precision",
    "random_process",
    "random_corpus",
    "DEFAULT_STATE_LIMIT",
]

DEFAULT_STATE_LIMIT = 10_000


@dataclass
class VerificationReport:
    process: str
    states_checked: int
    depth: int
    violations: list[tuple[int, str, str]]
    truncated: bool
    families: set[str] = field(default_factory=set)

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass
class PrecisionReport:
    exact_pairs: set[tuple[str, str]]
    predicted_pairs: set[tuple[str, str]]
    truncated: bool = False

    @property
    def spurious(self) -> set[tuple[str, str]]:
        return self.predicted_pairs - self.exact_pairs

    @property
    def missed(self) -> set[tuple[str, str]]:
        return self.exact_pairs - self.predicted_pairs


def _space(p: Process, depth: int, limit: int) -> StateSpace:
    return explore(p, depth, limit)


def check_theorem(
    p: Process,
    depth: int,
    limit: int = DEFAULT_STATE_LIMIT,
    result: AnalysisResult | None = None,
    space: StateSpace | None = None,
) -> VerificationReport:
    """Analyze ``p`` once and check the judgment at every reachable state.

    Each violation is ``(state index, failed rule, detail)``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    result = result or analyze(p)
    space = space or _space(p, depth, limit)
    violations = []
    for sid, state in enumerate(space.states):
        for rule, detail in judgment_violations(result, state, TOP):
            violations.append((sid, rule, detail))
    families = set()
    for _, redex, _ in space.edges:
        families |= redex.families
    return VerificationReport(
        process=pretty(p),
        states_checked=len(space.states),
        depth=depth,
        violations=violations,
        truncated=space.truncated,
        families=families,
    )


def measure_precision(
    p: Process,
    depth: int,
    limit: int = DEFAULT_STATE_LIMIT,
    result: AnalysisResult | None = None,
    space: StateSpace | None = None,
) -> PrecisionReport:
    result = result or analyze(p)
    space = space or _space(p, depth, limit)
    exact: set[tuple[str, str]] = set()
    for state in space.states:
        exact |= containment_pairs(state, TOP)
    return PrecisionReport(exact, result.pairs(), space.truncated)


# --- random terms ------------------------------------------------------------

_MOVE_PAIRS = [("enter", "accept"), ("exit", "expel"), ("merge+", "merge-")]
_CHANNELS = ("a", "b")
_PLANTED = RULES


class _Gen:
    """Builds one random process as source text within an ambient and
    prefix budget."""

    def __init__(self, rng: random.Random, max_ambients: int, max_prefixes: int):
        self.rng = rng
        self.ambients = max_ambients
        self.prefixes = max_prefixes
        self.labels = iter("ABCDEFGH")
        self.used_labels: list[str] = []
        self.vars = 0

    def label(self) -> str:
        if self.used_labels and self.rng.random() < 0.15:
            return self.rng.choice(self.used_labels)
        lab = next(self.labels)
        self.used_labels.append(lab)
        return lab

    def amb(self, body: str) -> str:
        self.ambients -= 1
        return f"[{body}]^{self.label()}"

    def fresh_var(self) -> str:
        self.vars += 1
        return f"x{self.vars}"

    def channel(self, scope: list[str]) -> str:
        pool = list(_CHANNELS) + scope
        return self.rng.choice(pool)

    def cap(self, scope: list[str], kind: str | None = None) -> tuple[str, list[str]]:
        self.prefixes -= 1
        rng = self.rng
        kind = kind or rng.choice(["move"] * 3 + ["out", "in"])
        ch = self.channel(scope)
        if kind == "move":
            return f"{rng.choice([k for pair in _MOVE_PAIRS for k in pair])} {ch}", scope
        mark = rng.choice(["", "v", "^", "#"])
        if kind == "out":
            payload = rng.choice(list(_CHANNELS) + scope + ["f"])
            return f"{ch}!{mark}{{{payload}}}", scope
        x = self.fresh_var()
        return f"{ch}?{mark}{{{x}}}", scope + [x]

    def tail(self, scope: list[str], recvar: str | None = None) -> str:
        """A short continuation."""
        rng = self.rng
        if recvar and rng.random() < 0.6:
            return recvar
        if self.prefixes > 0 and rng.random() < 0.5:
            head, inner = self.cap(scope)
            return f"{head}. {self.tail(inner, recvar)}"
        return "0"

    def seq(self, scope: list[str]) -> str:
        rng = self.rng
        r = rng.random()
        if r < 0.2 and self.prefixes >= 2:
            x = "X"
            b1, s1 = self.cap(scope)
            b2, s2 = self.cap(scope)
            return f"rec {x}. ({b1}. {self.tail(s1, x)} + {b2}. {self.tail(s2, x)})"
        if r < 0.4 and self.prefixes >= 2:
            b1, s1 = self.cap(scope)
            b2, s2 = self.cap(scope)
            return f"({b1}. {self.tail(s1)} + {b2}. {self.tail(s2)})"
        head, inner = self.cap(scope)
        return f"{head}. {self.tail(inner)}"

    def use(self, x: str) -> str:
        """A continuation that exercises a received name."""
        self.prefixes -= 1
        return self.rng.choice([f"expel {x}. 0", f"{x}!{{a}}. 0", f"enter {x}. 0", f"a!{{{x}}}. 0"])

    def planted(self, family: str) -> list[str]:
        rng = self.rng
        rec = family == "rec_unfold"
        if rec:
            family = rng.choice(RULES[:-1])

        state = {"rec": rec}

        def guard(prefix: str, cont: str) -> str:
            self.prefixes -= 1
            if state["rec"]:
                state["rec"] = False
                alt, _ = self.cap([])
                return f"rec X. ({prefix}. X + {alt}. 0)"
            return f"{prefix}. {cont}"

        ch = "a" if rng.random() < 0.7 else "b"
        payload = rng.choice(list(_CHANNELS) + ["f"])
        x = self.fresh_var()
        if family == "enter_accept":
            return [self.amb(guard(f"enter {ch}", "0")), self.amb(guard(f"accept {ch}", self.tail([])))]
        if family == "exit_expel":
            inner = self.amb(guard(f"exit {ch}", "0"))
            return [self.amb(f"{inner} | {guard(f'expel {ch}', self.tail([]))}")]
        if family == "merge":
            return [self.amb(guard(f"merge+ {ch}", self.tail([]))), self.amb(guard(f"merge- {ch}", "0"))]
        if family == "comm_local":
            return [guard(f"{ch}!{{{payload}}}", "0"), guard(f"{ch}?{{{x}}}", self.use(x))]
        if family == "comm_p2c":
            return [guard(f"{ch}!v{{{payload}}}", "0"), self.amb(guard(f"{ch}?^{{{x}}}", self.use(x)))]
        if family == "comm_c2p":
            return [self.amb(guard(f"{ch}!^{{{payload}}}", "0")), guard(f"{ch}?v{{{x}}}", self.use(x))]
        return [self.amb(guard(f"{ch}!#{{{payload}}}", "0")), self.amb(guard(f"{ch}?#{{{x}}}", self.use(x)))]

    def build(self, family: str) -> str:
        rng = self.rng
        soup = self.planted(family)
        if self.ambients >= 2 and self.prefixes >= 5 and rng.random() < 0.5:
            # a second, independent redex gives the explorer something to interleave
            soup += self.planted(rng.choice(RULES))
        if rng.random() < 0.5 and self.ambients > 0:
            soup = [self.amb(" | ".join(soup))]
        while self.prefixes > 0 and rng.random() < 0.7:
            item = self.seq([])
            if self.ambients > 0 and rng.random() < 0.5:
                item = self.amb(item)
            if soup and rng.random() < 0.3 and soup[-1].startswith("["):
                # drop the new component inside an existing ambient
                last = soup.pop()
                body, _, lab = last.rpartition("]^")
                soup.append(f"{body} | {item}]^{lab}")
            else:
                soup.append(item)
        return "(a)(b) " + " | ".join(soup)


def random_process(
    rng: random.Random,
    family: str | None = None,
    max_ambients: int = 4,
    max_prefixes: int = 8,
) -> Process:
    """A small closed process with a planted redex of ``family``.

    The planted redex uses at most three ambients and three prefixes; the
    remaining budget is spent on random noise.
    """
    family = family or rng.choice(RULES)
    if family not in RULES:
        raise ValueError(f"unknown rule family {family!r}")
    while True:
        p = parse(_Gen(rng, max_ambients, max_prefixes).build(family))
        nodes = list(_walk(p))
        if (
            sum(isinstance(n, Amb) for n in nodes) <= max_ambients
            and sum(isinstance(n, Prefix) for n in nodes) <= max_prefixes
        ):
            return p


def random_corpus(count: int, seed: int, **budget) -> list[Process]:
    """``count`` terms cycling through every rule family."""
    rng = random.Random(seed)
    return [random_process(rng, RULES[i % len(RULES)], **budget) for i in range(count)]
