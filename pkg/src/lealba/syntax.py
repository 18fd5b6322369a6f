"""Formulas, inequalities and quasi-inequalities: AST, parser and printer.

Concrete syntax (ASCII)::

    top  bot  p  #j  @m  name(a1, ..., an)  name a  a /\\ b  a \\/ b  (a)
    lhs <= rhs
    l1 <= r1 & l2 <= r2 => l <= r

``/\\`` binds tighter than ``\\/``; both associate to the left.  ``#j`` is a
nominal and ``@m`` a co-nominal.  A unary connective may be applied by
juxtaposition, binding tightest: ``dia p /\\ q`` is ``dia(p) /\\ q``.
``meet(a, b)`` and ``join(a, b)`` are read as ``a /\\ b`` and ``a \\/ b``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterator, Union

from .signature import POS, ExpandedSignature, Polarity, SignatureError


class ParseError(ValueError):
    """Raised on lexical, syntactic or arity errors."""


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Meet:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Join:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class App:
    op: str
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Nom:
    name: str


@dataclass(frozen=True)
class Conom:
    name: str


Formula = Union[Var, Top, Bot, Meet, Join, App, Nom, Conom]
TOP = Top()
BOT = Bot()


@dataclass(frozen=True)
class Inequality:
    lhs: Formula
    rhs: Formula

    def __str__(self) -> str:
        return print_inequality(self)


@dataclass(frozen=True)
class QuasiInequality:
    premises: tuple[Inequality, ...]
    conclusion: Inequality

    def __str__(self) -> str:
        return print_quasi(self)


Path = tuple[int, ...]


# ---------------------------------------------------------------- traversal


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Meet, Join)):
        return (f.left, f.right)
    if isinstance(f, App):
        return f.args
    return ()


def with_children(f: Formula, kids: tuple[Formula, ...]) -> Formula:
    if isinstance(f, Meet):
        return Meet(*kids)
    if isinstance(f, Join):
        return Join(*kids)
    if isinstance(f, App):
        return App(f.op, tuple(kids))
    return f


def is_leaf(f: Formula) -> bool:
    return isinstance(f, (Var, Top, Bot, Nom, Conom)) or (isinstance(f, App) and not f.args)


def subterm(f: Formula, path: Path) -> Formula:
    for i in path:
        f = children(f)[i]
    return f


def replace_at(f: Formula, path: Path, new: Formula) -> Formula:
    if not path:
        return new
    kids = list(children(f))
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return with_children(f, tuple(kids))


def map_formula(f: Formula, fn: Callable[[Formula], Formula | None]) -> Formula:
    """Rebuild ``f`` bottom-up; ``fn`` may return a replacement or ``None``."""
    kids = children(f)
    if kids:
        f = with_children(f, tuple(map_formula(k, fn) for k in kids))
    out = fn(f)
    return f if out is None else out


def walk(f: Formula, path: Path = ()) -> Iterator[tuple[Path, Formula]]:
    """Pre-order traversal yielding ``(path, subformula)``."""
    yield path, f
    for i, k in enumerate(children(f)):
        yield from walk(k, path + (i,))


def child_sign(f: Formula, i: int, sign: Polarity, sig: ExpandedSignature) -> Polarity:
    """Sign of the ``i``-th child of a node carrying ``sign``."""
    if isinstance(f, App):
        return sign.times(sig[f.op].order_type[i])
    return sign


def signed_walk(
    f: Formula, sign: Polarity, sig: ExpandedSignature, path: Path = ()
) -> Iterator[tuple[Path, Formula, Polarity]]:
    yield path, f, sign
    for i, k in enumerate(children(f)):
        yield from signed_walk(k, child_sign(f, i, sign, sig), sig, path + (i,))


def sign_at(f: Formula, path: Path, sign: Polarity, sig: ExpandedSignature) -> Polarity:
    for i in path:
        sign = child_sign(f, i, sign, sig)
        f = children(f)[i]
    return sign


# ---------------------------------------------------------------- utilities


def variables(*fs: Formula) -> list[str]:
    """Propositional variables in order of first occurrence."""
    seen: dict[str, None] = {}
    for f in fs:
        for _, g in walk(f):
            if isinstance(g, Var):
                seen.setdefault(g.name)
    return list(seen)


def ineq_variables(ineq: Inequality) -> list[str]:
    return variables(ineq.lhs, ineq.rhs)


def nominals(*fs: Formula) -> list[str]:
    seen: dict[str, None] = {}
    for f in fs:
        for _, g in walk(f):
            if isinstance(g, Nom):
                seen.setdefault(g.name)
    return list(seen)


def conominals(*fs: Formula) -> list[str]:
    seen: dict[str, None] = {}
    for f in fs:
        for _, g in walk(f):
            if isinstance(g, Conom):
                seen.setdefault(g.name)
    return list(seen)


def is_pure(f: Formula | Inequality | QuasiInequality) -> bool:
    if isinstance(f, Inequality):
        return is_pure(f.lhs) and is_pure(f.rhs)
    if isinstance(f, QuasiInequality):
        return all(is_pure(p) for p in f.premises) and is_pure(f.conclusion)
    return not any(isinstance(g, Var) for _, g in walk(f))


def contains_var(f: Formula, p: str) -> bool:
    return any(isinstance(g, Var) and g.name == p for _, g in walk(f))


def substitute(f: Formula, p: str, g: Formula) -> Formula:
    return map_formula(f, lambda h: g if isinstance(h, Var) and h.name == p else None)


def substitute_ineq(ineq: Inequality, p: str, g: Formula) -> Inequality:
    return Inequality(substitute(ineq.lhs, p, g), substitute(ineq.rhs, p, g))


def rename(f: Formula, noms: dict[str, str], conoms: dict[str, str]) -> Formula:
    def fn(h: Formula) -> Formula | None:
        if isinstance(h, Nom) and h.name in noms:
            return Nom(noms[h.name])
        if isinstance(h, Conom) and h.name in conoms:
            return Conom(conoms[h.name])
        return None

    return map_formula(f, fn)


def occurrences(f: Formula, sign: Polarity, sig: ExpandedSignature) -> list[tuple[str, Polarity]]:
    """Signed variable leaves of the generation tree of ``f`` with root ``sign``."""
    return [(g.name, s) for _, g, s in signed_walk(f, sign, sig) if isinstance(g, Var)]


def ineq_occurrences(ineq: Inequality, sig: ExpandedSignature) -> list[tuple[str, Polarity]]:
    """Leaves of ``+lhs`` and ``-rhs``."""
    return occurrences(ineq.lhs, POS, sig) + occurrences(ineq.rhs, POS.flip(), sig)


def base_only(f: Formula, sig: ExpandedSignature) -> bool:
    """True if ``f`` uses no nominals, co-nominals or residual connectives."""
    for _, g in walk(f):
        if isinstance(g, (Nom, Conom)):
            return False
        if isinstance(g, App) and not sig[g.op].is_base:
            return False
    return True


def size(f: Formula) -> int:
    return sum(1 for _ in walk(f))


def depth(f: Formula) -> int:
    kids = children(f)
    return 1 + max((depth(k) for k in kids), default=0)


def big_join(items: list[Formula]) -> Formula:
    if not items:
        return BOT
    out = items[0]
    for g in items[1:]:
        out = Join(out, g)
    return out


def big_meet(items: list[Formula]) -> Formula:
    if not items:
        return TOP
    out = items[0]
    for g in items[1:]:
        out = Meet(out, g)
    return out


# ---------------------------------------------------------------- printing


def print_formula(f: Formula) -> str:
    return _print(f, 0)


def _prec(f: Formula) -> int:
    if isinstance(f, Join):
        return 1
    if isinstance(f, Meet):
        return 2
    return 3


def _print(f: Formula, min_prec: int) -> str:
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Top):
        return "top"
    if isinstance(f, Bot):
        return "bot"
    if isinstance(f, Nom):
        return "#" + f.name
    if isinstance(f, Conom):
        return "@" + f.name
    if isinstance(f, App):
        if not f.args:
            return f.op
        return f"{f.op}({', '.join(_print(a, 0) for a in f.args)})"
    if isinstance(f, (Join, Meet)):
        prec = _prec(f)
        sym = "\\/" if isinstance(f, Join) else "/\\"
        # left-associative: the right operand needs strictly higher precedence
        text = f"{_print(f.left, prec)} {sym} {_print(f.right, prec + 1)}"
        return f"({text})" if prec < min_prec else text
    raise TypeError(f"not a formula: {f!r}")


def print_inequality(ineq: Inequality) -> str:
    return f"{print_formula(ineq.lhs)} <= {print_formula(ineq.rhs)}"


def print_quasi(q: QuasiInequality) -> str:
    if not q.premises:
        return print_inequality(q.conclusion)
    prem = " & ".join(print_inequality(p) for p in q.premises)
    return f"{prem} => {print_inequality(q.conclusion)}"


# ---------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<sym>/\\|\\/|<=|=>|[(),&])|(?P<nom>#[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<conom>@[A-Za-z_][A-Za-z0-9_']*)|(?P<id>[A-Za-z_][A-Za-z0-9_']*))"
)


def tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:pos + 1]!r} at column {pos + 1}")
        tokens.append(m.group(m.lastgroup))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return tokens


class _Parser:
    def __init__(self, text: str, sig: ExpandedSignature, allow_extended: bool):
        self.tokens = tokenize(text)
        self.pos = 0
        self.sig = sig
        self.allow_extended = allow_extended

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input" + (f", expected {expected!r}" if expected else ""))
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, found {tok!r}")
        self.pos += 1
        return tok

    def done(self) -> None:
        if self.peek() is not None:
            raise ParseError(f"unexpected token {self.peek()!r}")

    def quasi(self) -> QuasiInequality:
        ineqs = [self.inequality()]
        while self.peek() == "&":
            self.take()
            ineqs.append(self.inequality())
        if self.peek() == "=>":
            self.take()
            concl = self.inequality()
            return QuasiInequality(tuple(ineqs), concl)
        if len(ineqs) > 1:
            raise ParseError("a conjunction of inequalities needs '=> conclusion'")
        return QuasiInequality((), ineqs[0])

    def inequality(self) -> Inequality:
        lhs = self.formula()
        self.take("<=")
        return Inequality(lhs, self.formula())

    def formula(self) -> Formula:
        f = self.conj()
        while self.peek() == "\\/":
            self.take()
            f = Join(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.atom()
        while self.peek() == "/\\":
            self.take()
            f = Meet(f, self.atom())
        return f

    def atom(self) -> Formula:
        tok = self.take()
        if tok == "(":
            f = self.formula()
            self.take(")")
            return f
        if tok.startswith("#") or tok.startswith("@"):
            if not self.allow_extended:
                raise ParseError(f"nominal or co-nominal {tok} not allowed here")
            return Nom(tok[1:]) if tok[0] == "#" else Conom(tok[1:])
        if not re.match(r"[A-Za-z_]", tok):
            raise ParseError(f"unexpected token {tok!r}")
        if tok == "top":
            return TOP
        if tok == "bot":
            return BOT
        if self.peek() == "(":
            self.take()
            args: list[Formula] = []
            if self.peek() != ")":
                args.append(self.formula())
                while self.peek() == ",":
                    self.take()
                    args.append(self.formula())
            self.take(")")
            return self.application(tok, args)
        if tok in self.sig:
            conn = self.sig[tok]
            if conn.arity == 0:
                return self.application(tok, [])
            if conn.arity == 1 and self.peek() not in (None, ")", ",", "<=", "=>", "&", "/\\", "\\/"):
                # prefix application: ``dia p`` reads as ``dia(p)``
                return self.application(tok, [self.atom()])
            raise ParseError(f"connective {tok} expects {conn.arity} arguments")
        return Var(tok)

    def application(self, name: str, args: list[Formula]) -> Formula:
        if name in ("meet", "join"):
            if len(args) != 2:
                raise ParseError(f"{name} expects 2 arguments, got {len(args)}")
            return Meet(*args) if name == "meet" else Join(*args)
        try:
            conn = self.sig[name]
        except SignatureError:
            raise ParseError(f"unknown connective {name!r}") from None
        if not conn.is_base and not self.allow_extended:
            raise ParseError(f"residual connective {name} not allowed here")
        if len(args) != conn.arity:
            raise ParseError(f"{name} expects {conn.arity} arguments, got {len(args)}")
        return App(name, tuple(args))


def parse_formula(text: str, sig: ExpandedSignature, allow_extended: bool = True) -> Formula:
    p = _Parser(text, sig, allow_extended)
    f = p.formula()
    p.done()
    return f


def parse_inequality(text: str, sig: ExpandedSignature, allow_extended: bool = True) -> Inequality:
    p = _Parser(text, sig, allow_extended)
    ineq = p.inequality()
    p.done()
    return ineq


def parse_quasi(text: str, sig: ExpandedSignature, allow_extended: bool = True) -> QuasiInequality:
    p = _Parser(text, sig, allow_extended)
    q = p.quasi()
    p.done()
    return q


def parse_lines(text: str) -> list[str]:
    """Non-empty lines of an input file with comments removed.

    A comment starts at ``#`` followed by whitespace or the end of the line,
    so nominals such as ``#j`` are left alone.
    """
    out = []
    for raw in text.splitlines():
        line = re.sub(r"#(\s.*)?$", "", raw).strip()
        if line:
            out.append(line)
    return out
