"""Concrete syntax for BioAmbients processes.

Grammar (``.`` binds tightest, then ``+``, then ``|``; binary operators
associate to the right; a restriction scopes as far right as possible)::

    P   ::= "0" | "(" n ")" P | "[" P "]" "^" ident | cap "." P
          | P "|" P | P "+" P | "rec" X "." P | X | "(" P ")"
    cap ::= "enter" n | "accept" n | "exit" n | "expel" n
          | "merge+" n | "merge-" n | n "!" dir "{" n "}" | n "?" dir "{" n "}"
    dir ::= "" (local) | "v" (down) | "^" (up) | "#" (sibling)

Line comments start with ``//``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

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
    Site,
    TermError,
    Var,
    Zero,
    check_well_formed,
    free_names,
)

__all__ = ["SourceSpan", "ParseError", "parse", "pretty", "KEYWORDS"]

KEYWORDS = frozenset({"rec", "enter", "accept", "exit", "expel", "merge"})
_MOVES = {
    "enter": "enter",
    "accept": "accept",
    "exit": "exit",
    "expel": "expel",
    "merge+": "merge_plus",
    "merge-": "merge_minus",
}
_DIR_MARK = {"v": "down", "^": "up", "#": "sibling"}
_MARK = {"local": "", "down": "v", "up": "^", "sibling": "#"}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<merge>merge[+-])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<zero>0(?![0-9A-Za-z_]))
  | (?P<punct>[()\[\]^.|+!?{}\#])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    start: int
    end: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class ParseError(Exception):
    """First error found in the input; ``kind`` is one of ``lex``,
    ``syntax``, ``unbound-process-variable``, ``unguarded-choice`` or
    ``unguarded-recursion``."""

    def __init__(self, span: SourceSpan, message: str, kind: str = "syntax"):
        super().__init__(f"{span}: {message}")
        self.span = span
        self.message = message
        self.kind = kind


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    span: SourceSpan


def _span(text: str, start: int, end: int) -> SourceSpan:
    line = text.count("\n", 0, start) + 1
    column = start - (text.rfind("\n", 0, start) + 1) + 1
    return SourceSpan(line, column, start, end)


def _lex(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(_span(text, pos, pos + 1), f"unexpected character {text[pos]!r}", "lex")
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), _span(text, m.start(), m.end())))
        pos = m.end()
    toks.append(_Tok("eof", "", _span(text, len(text), len(text))))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _lex(text)
        self.i = 0
        self.sites = itertools.count(1)

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> _Tok:
        t = self.tok
        self.i += 1
        return t

    def error(self, message: str, tok: _Tok | None = None, kind: str = "syntax"):
        return ParseError((tok or self.tok).span, message, kind)

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text or self.tok.kind in ("ident", "eof"):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def ident(self, what: str) -> _Tok:
        if self.tok.kind != "ident" or self.tok.text in KEYWORDS:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {what}, found {found!r}")
        return self.advance()

    # names are resolved while parsing; ``env`` maps text to the innermost Name
    def use(self, tok: _Tok, env: dict) -> Name:
        return env.get(tok.text) or Name(tok.text)

    def bind(self, tok: _Tok) -> Name:
        return Name(tok.text, Site(next(self.sites), tok.text))

    def starts_process(self, tok: _Tok) -> bool:
        return tok.kind in ("zero", "ident", "merge") or tok.text in ("(", "[")

    def program(self) -> Process:
        p = self.par({}, set())
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return p

    def par(self, env: dict, recs: set) -> Process:
        left = self.choice(env, recs)
        if self.tok.text == "|" and self.tok.kind == "punct":
            self.advance()
            return Par(left, self.par(env, recs))
        return left

    def choice(self, env: dict, recs: set) -> Process:
        start = self.tok
        left = self.prefix(env, recs)
        if self.tok.text == "+" and self.tok.kind == "punct":
            if not isinstance(left, (Prefix, Choice)):
                raise self.error("choice branch must start with a prefix", start, "unguarded-choice")
            self.advance()
            branch = self.tok
            right = self.choice(env, recs)
            if not isinstance(right, (Prefix, Choice)):
                raise self.error("choice branch must start with a prefix", branch, "unguarded-choice")
            return Choice(left, right)
        return left

    def prefix(self, env: dict, recs: set) -> Process:
        tok = self.tok
        if tok.kind == "zero":
            self.advance()
            return Zero()
        if tok.text == "(":
            nxt, close = self.peek(1), self.peek(2)
            if (
                nxt.kind == "ident"
                and nxt.text not in KEYWORDS
                and close.text == ")"
                and self.starts_process(self.peek(3))
            ):
                self.i += 3
                name = self.bind(nxt)
                return Restrict(name, self.par({**env, nxt.text: name}, recs))
            self.advance()
            inner = self.par(env, recs)
            self.expect(")")
            return inner
        if tok.text == "[":
            self.advance()
            body = self.par(env, recs)
            self.expect("]")
            self.expect("^")
            label = self.ident("ambient identity")
            return Amb(label.text, body)
        if tok.kind == "ident" and tok.text == "rec":
            self.advance()
            var = self.ident("process identifier")
            self.expect(".")
            return Rec(var.text, self.prefix(env, recs | {var.text}))
        if tok.kind == "merge" or (tok.kind == "ident" and tok.text in _MOVES):
            self.advance()
            channel = self.use(self.ident("channel name"), env)
            self.expect(".")
            return Prefix(Cap(_MOVES[tok.text], channel), self.prefix(env, recs))
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            if self.peek().text in ("!", "?"):
                return self.communication(env, recs)
            self.advance()
            if tok.text not in recs:
                raise self.error(
                    f"process identifier {tok.text} is not bound by rec", tok, "unbound-process-variable"
                )
            return Var(tok.text)
        found = tok.text or "end of input"
        raise self.error(f"expected a process, found {found!r}")

    def communication(self, env: dict, recs: set) -> Process:
        channel = self.use(self.advance(), env)
        op = self.advance().text
        direction = "local"
        if self.tok.text in ("v", "^", "#") and self.peek().text == "{":
            direction = _DIR_MARK[self.advance().text]
        self.expect("{")
        arg = self.ident("name")
        self.expect("}")
        self.expect(".")
        if op == "!":
            cap = Cap("output", channel, direction, payload=self.use(arg, env))
            return Prefix(cap, self.prefix(env, recs))
        binder = self.bind(arg)
        cap = Cap("input", channel, direction, binder=binder)
        return Prefix(cap, self.prefix({**env, arg.text: binder}, recs))


def parse(text: str) -> Process:
    """Parse ``text`` into a well-formed process or raise :class:`ParseError`."""
    parser = _Parser(text)
    p = parser.program()
    try:
        check_well_formed(p)
    except TermError as exc:
        # only unguarded recursion survives the in-parser checks
        raise ParseError(_span(text, 0, len(text)), exc.message, exc.kind) from None
    return p


# --- pretty printing ---------------------------------------------------------

_PAR, _CHOICE, _PREFIX = 0, 1, 2


def pretty(p: Process) -> str:
    """Deterministic source text for ``p``; re-parses to an alpha-equal term."""
    taken = {n.text for n in free_names(p)} | set(KEYWORDS)
    return _Printer(taken).show(p, _PAR, True, {})


class _Printer:
    def __init__(self, taken: set[str]):
        self.taken = taken

    def display(self, name: Name, scope: dict) -> str:
        return scope.get(name, name.text)

    def bind(self, name: Name, scope: dict) -> tuple[str, dict]:
        in_scope = set(scope.values()) | self.taken
        base = name.text if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", name.text) else "n"
        text = base
        k = 1
        while text in in_scope or text == "v":
            text = f"{base}_{k}"
            k += 1
        return text, {**scope, name: text}

    def cap(self, cap: Cap, scope: dict) -> tuple[str, dict]:
        ch = self.display(cap.channel, scope)
        if cap.kind == "output":
            return f"{ch}!{_MARK[cap.direction]}{{{self.display(cap.payload, scope)}}}", scope
        if cap.kind == "input":
            text, scope = self.bind(cap.binder, scope)
            return f"{ch}?{_MARK[cap.direction]}{{{text}}}", scope
        keyword = {v: k for k, v in _MOVES.items()}[cap.kind]
        return f"{keyword} {ch}", scope

    def show(self, p: Process, level: int, last: bool, scope: dict) -> str:
        if isinstance(p, Zero):
            return "0"
        if isinstance(p, Var):
            return p.var
        if isinstance(p, Amb):
            return f"[{self.show(p.body, _PAR, True, scope)}]^{p.label}"
        if isinstance(p, Restrict):
            text, inner = self.bind(p.name, scope)
            out = f"({text}) {self.show(p.body, _PAR, True, inner)}"
            return out if last else f"({out})"
        if isinstance(p, Prefix):
            head, inner = self.cap(p.cap, scope)
            return f"{head}. {self.show(p.cont, _PREFIX, last, inner)}"
        if isinstance(p, Rec):
            return f"rec {p.var}. {self.show(p.body, _PREFIX, last, scope)}"
        if isinstance(p, Choice):
            out = f"{self.show(p.left, _PREFIX, False, scope)} + {self.show(p.right, _CHOICE, last or level > _CHOICE, scope)}"
            return f"({out})" if level > _CHOICE else out
        out = f"{self.show(p.left, _CHOICE, False, scope)} | {self.show(p.right, _PAR, last or level > _PAR, scope)}"
        return f"({out})" if level > _PAR else out
