"""First-order frame correspondents of pure output.

Two backends are provided.

* RS frames are two-sorted: states ``X`` (for nominals) and ``Y`` (for
  co-nominals) with the incidence ``x <= y``.  A base ``F`` connective ``f``
  gets a relation ``R_f`` on ``Y x prod_i X^eps_f(i)`` and a base ``G``
  connective ``g`` one on ``X x prod_i Y^eps_g(i)``, where ``X^d = Y`` and
  ``Y^d = X``.  A residual of ``h`` in coordinate ``i`` reuses ``R_h`` with the
  head and the ``i``-th argument swapped, printed ``R_h^-i``.
* TiRS graphs are one-sorted (``Z``) with the edge relation ``E``, and only
  cover lattice operations and unary monotone connectives such as the box
  and diamond.

Printing format (ASCII, stable)::

    forall x1:X. <body>      exists z1:Z. <body>
    A & B    A -> B    ~A    x1 <= y1    z1 E z2    x1 = x1    y1 != y1
    R_dia(y1,x1)    R_circ^-2(x1,x2,y1)    P1_p(x1)    P2_p(y1)    P_p(z1)

``->`` associates to the right and binds weaker than ``&``, which binds
weaker than ``~``.  A quantifier extends as far right as possible and is
parenthesised unless it is the whole formula or a quantifier body.
Sentences are printed after :func:`canonical`, which renames bound
variables per sort (``x1, x2, ...``, ``y1, ...``, ``z1, ...``) in binder order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union


from .signature import POS, Connective, ExpandedSignature, Signature
from .syntax import (
    App,
    Bot,
    Conom,
    Formula,
    Inequality,
    Join,
    Meet,
    Nom,
    QuasiInequality,
    Top,
    Var,
    conominals,
    nominals,
    variables,
)

X, Y, Z = "X", "Y", "Z"


class FOLError(ValueError):
    """Raised for input outside the fragment a backend translates."""


# ---------------------------------------------------------------- syntax


@dataclass(frozen=True)
class FVar:
    name: str
    sort: str


@dataclass(frozen=True)
class RelAtom:
    rel: str  # base connective name
    args: tuple[FVar, ...]
    swap: int | None = None  # coordinate swapped with the head


@dataclass(frozen=True)
class Leq:
    left: FVar  # sort X
    right: FVar  # sort Y


@dataclass(frozen=True)
class EAtom:
    left: FVar
    right: FVar


@dataclass(frozen=True)
class Eq:
    left: FVar
    right: FVar


@dataclass(frozen=True)
class Neq:
    left: FVar
    right: FVar


@dataclass(frozen=True)
class Pred:
    pred: str  # "P1", "P2" (RS) or "P" (TiRS)
    prop: str
    var: FVar


@dataclass(frozen=True)
class Not:
    body: "FOFormula"


@dataclass(frozen=True)
class And:
    parts: tuple["FOFormula", ...]


@dataclass(frozen=True)
class Implies:
    left: "FOFormula"
    right: "FOFormula"


@dataclass(frozen=True)
class Forall:
    var: FVar
    body: "FOFormula"


@dataclass(frozen=True)
class Exists:
    var: FVar
    body: "FOFormula"


FOFormula = Union[RelAtom, Leq, EAtom, Eq, Neq, Pred, Not, And, Implies, Forall, Exists]
ATOMS = (RelAtom, Leq, EAtom, Eq, Neq, Pred)
QUANTIFIERS = (Forall, Exists)


def conj(*parts: FOFormula) -> FOFormula:
    """Conjunction with nested conjunctions flattened."""
    flat: list[FOFormula] = []
    for p in parts:
        flat.extend(p.parts if isinstance(p, And) else [p])
    if len(flat) == 1:
        return flat[0]
    if not flat:
        raise ValueError("empty conjunction")
    return And(tuple(flat))


def forall(vs, body: FOFormula) -> FOFormula:
    for v in reversed(list(vs)):
        body = Forall(v, body)
    return body


def atom_vars(f) -> tuple[FVar, ...]:
    if isinstance(f, RelAtom):
        return f.args
    if isinstance(f, Pred):
        return (f.var,)
    return (f.left, f.right)


def fo_children(f: FOFormula) -> tuple:
    if isinstance(f, Not):
        return (f.body,)
    if isinstance(f, And):
        return f.parts
    if isinstance(f, Implies):
        return (f.left, f.right)
    if isinstance(f, QUANTIFIERS):
        return (f.body,)
    return ()


def free_vars(f: FOFormula) -> list[FVar]:
    """Free variables in order of first occurrence."""
    out: list[FVar] = []

    def go(g, bound: frozenset) -> None:
        if isinstance(g, ATOMS):
            for v in atom_vars(g):
                if v.name not in bound and v not in out:
                    out.append(v)
        elif isinstance(g, QUANTIFIERS):
            go(g.body, bound | {g.var.name})
        else:
            for c in fo_children(g):
                go(c, bound)

    go(f, frozenset())
    return out


# ---------------------------------------------------------------- printing


def _rel_name(a: RelAtom) -> str:
    return f"R_{a.rel}" + (f"^-{a.swap}" if a.swap else "")


def _prec(f) -> int:
    if isinstance(f, QUANTIFIERS):
        return 0
    if isinstance(f, Implies):
        return 1
    if isinstance(f, And):
        return 2
    if isinstance(f, Not):
        return 3
    if isinstance(f, (RelAtom, Pred)):
        return 5
    return 4


def format_fo(f: FOFormula) -> str:
    def fmt(g, ctx: int) -> str:
        if isinstance(g, RelAtom):
            s = f"{_rel_name(g)}({','.join(v.name for v in g.args)})"
        elif isinstance(g, Pred):
            s = f"{g.pred}_{g.prop}({g.var.name})"
        elif isinstance(g, Leq):
            s = f"{g.left.name} <= {g.right.name}"
        elif isinstance(g, EAtom):
            s = f"{g.left.name} E {g.right.name}"
        elif isinstance(g, Eq):
            s = f"{g.left.name} = {g.right.name}"
        elif isinstance(g, Neq):
            s = f"{g.left.name} != {g.right.name}"
        elif isinstance(g, Not):
            s = "~" + fmt(g.body, 5)
        elif isinstance(g, And):
            s = " & ".join(fmt(p, 3) for p in g.parts)
        elif isinstance(g, Implies):
            s = f"{fmt(g.left, 2)} -> {fmt(g.right, 1)}"
        elif isinstance(g, QUANTIFIERS):
            q = "forall" if isinstance(g, Forall) else "exists"
            s = f"{q} {g.var.name}:{g.var.sort}. {fmt(g.body, 0)}"
        else:
            raise TypeError(f"not a first-order formula: {g!r}")
        return f"({s})" if _prec(g) < ctx else s

    return fmt(f, 0)


# ---------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<rel>R_[A-Za-z0-9_]+(?:\^-\d+)?)|(?P<op>->|<=|!=|[()~&,:.=])"
    r"|(?P<name>[A-Za-z][A-Za-z0-9_']*))"
)
_PRED_RE = re.compile(r"(P1|P2|P)_(\w+)\Z")


def parse_fo(text: str, free: dict[str, str] | None = None) -> FOFormula:
    """Parse the printed format back.

    Free variables take their sort from ``free`` or, failing that, from the
    first letter of their name (``x``, ``y`` or ``z``).
    """
    tokens: list[tuple[str, str]] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise FOLError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    free = dict(free or {})
    k = 0

    def peek() -> str | None:
        return tokens[k][1] if k < len(tokens) else None

    def take(expected: str | None = None) -> str:
        nonlocal k
        if k >= len(tokens):
            raise FOLError("unexpected end of formula")
        tok = tokens[k][1]
        if expected is not None and tok != expected:
            raise FOLError(f"expected {expected!r}, found {tok!r}")
        k += 1
        return tok

    def var(name: str, env: dict[str, str]) -> FVar:
        if name in env:
            return FVar(name, env[name])
        if name in free:
            return FVar(name, free[name])
        sort = name[0].upper()
        if sort not in (X, Y, Z):
            raise FOLError(f"cannot infer the sort of {name!r}")
        return FVar(name, sort)

    def formula(env) -> FOFormula:
        if peek() in ("forall", "exists"):
            return quantified(env)
        left = conjunction(env)
        if peek() == "->":
            take()
            return Implies(left, formula(env))
        return left

    def quantified(env) -> FOFormula:
        q = take()
        name = take()
        take(":")
        sort = take()
        if sort not in (X, Y, Z):
            raise FOLError(f"unknown sort {sort!r}")
        take(".")
        body = formula({**env, name: sort})
        cls = Forall if q == "forall" else Exists
        return cls(FVar(name, sort), body)

    def conjunction(env) -> FOFormula:
        parts = [unary(env)]
        while peek() == "&":
            take()
            parts.append(unary(env))
        return conj(*parts)

    def unary(env) -> FOFormula:
        tok = peek()
        if tok == "~":
            take()
            return Not(unary(env))
        if tok == "(":
            take()
            f = formula(env)
            take(")")
            return f
        if tok in ("forall", "exists"):
            return quantified(env)
        kind = tokens[k][0] if k < len(tokens) else None
        if kind == "rel":
            name = take()
            take("(")
            args = [var(take(), env)]
            while peek() == ",":
                take()
                args.append(var(take(), env))
            take(")")
            base, _, swap = name[2:].partition("^-")
            return RelAtom(base, tuple(args), int(swap) if swap else None)
        if kind != "name":
            raise FOLError(f"unexpected token {tok!r}")
        name = take()
        pm = _PRED_RE.match(name)
        if pm and peek() == "(":
            take("(")
            v = var(take(), env)
            take(")")
            return Pred(pm.group(1), pm.group(2), v)
        left = var(name, env)
        op = take()
        right = var(take(), env)
        if op == "<=":
            return Leq(left, right)
        if op == "E":
            return EAtom(left, right)
        if op == "=":
            return Eq(left, right)
        if op == "!=":
            return Neq(left, right)
        raise FOLError(f"unknown relation {op!r}")

    f = formula({})
    if k != len(tokens):
        raise FOLError(f"trailing input at {tokens[k][1]!r}")
    return f


# ---------------------------------------------------------------- canonical form


def _first_occurrences(f: FOFormula, names: set[str]) -> list[str]:
    order: list[str] = []

    def go(g, shadow: frozenset) -> None:
        if isinstance(g, ATOMS):
            for v in atom_vars(g):
                if v.name in names and v.name not in shadow and v.name not in order:
                    order.append(v.name)
        elif isinstance(g, QUANTIFIERS):
            go(g.body, shadow | ({g.var.name} & names))
        else:
            for c in fo_children(g):
                go(c, shadow)

    go(f, frozenset())
    return order


def canonical(f: FOFormula) -> FOFormula:
    """Alpha-normal form used for printing and golden comparison.

    Each maximal block of like quantifiers is reordered by the first
    occurrence of its variables in the block's body, then bound variables
    are renamed per sort in pre-order of their binders.  Free variables are
    kept.
    """
    counters = {X: 0, Y: 0, Z: 0}
    reserved = {v.name for v in free_vars(f)}

    def fresh(sort: str) -> str:
        while True:
            counters[sort] += 1
            name = f"{sort.lower()}{counters[sort]}"
            if name not in reserved:
                return name

    def go(g, env: dict[str, FVar]):
        if isinstance(g, ATOMS):
            def sub(v: FVar) -> FVar:
                return env.get(v.name, v)
            if isinstance(g, RelAtom):
                return RelAtom(g.rel, tuple(sub(v) for v in g.args), g.swap)
            if isinstance(g, Pred):
                return Pred(g.pred, g.prop, sub(g.var))
            return type(g)(sub(g.left), sub(g.right))
        if isinstance(g, QUANTIFIERS):
            cls = type(g)
            block: list[FVar] = []
            body = g
            while isinstance(body, cls) and body.var.name not in {v.name for v in block}:
                block.append(body.var)
                body = body.body
            order = _first_occurrences(body, {v.name for v in block})
            ranked = sorted(
                block,
                key=lambda v: order.index(v.name) if v.name in order else len(order) + block.index(v),
            )
            inner = dict(env)
            renamed = []
            for v in ranked:
                nv = FVar(fresh(v.sort), v.sort)
                inner[v.name] = nv
                renamed.append(nv)
            out = go(body, inner)
            for nv in reversed(renamed):
                out = cls(nv, out)
            return out
        if isinstance(g, Not):
            return Not(go(g.body, env))
        if isinstance(g, And):
            return conj(*(go(p, env) for p in g.parts))
        if isinstance(g, Implies):
            return Implies(go(g.left, env), go(g.right, env))
        raise TypeError(f"not a first-order formula: {g!r}")

    return go(f, {})


def alpha_equivalent(a: FOFormula, b: FOFormula) -> bool:
    return canonical(a) == canonical(b)


# ---------------------------------------------------------------- sorts


def relation_profile(rel: str, swap: int | None, sig: ExpandedSignature) -> tuple[str, ...]:
    """Argument sorts of ``R_rel`` (or of its swapped variant)."""
    conn = sig[rel]
    if not conn.is_base:
        raise FOLError(f"{rel} is not a base connective")
    if conn.family == "F":
        prof = [Y] + [X if e is POS else Y for e in conn.order_type]
    else:
        prof = [X] + [Y if e is POS else X for e in conn.order_type]
    if swap:
        prof[0], prof[swap] = prof[swap], prof[0]
    return tuple(prof)


def sort_errors(f: FOFormula, sig: ExpandedSignature | None = None, backend: str = "rs") -> list[str]:
    """Every sort violation in ``f``; empty when ``f`` is well sorted."""
    errors: list[str] = []
    tirs = backend == "tirs"

    def expect(atom, got: tuple[str, ...], want: tuple[str, ...]) -> None:
        if got != want:
            errors.append(f"{format_fo(atom)}: sorts {got} but expected {want}")

    def go(g, env: dict[str, str]) -> None:
        if isinstance(g, ATOMS):
            for v in atom_vars(g):
                if v.name in env and env[v.name] != v.sort:
                    errors.append(f"{v.name} used at sort {v.sort} but bound at {env[v.name]}")
            got = tuple(v.sort for v in atom_vars(g))
            if isinstance(g, RelAtom):
                if tirs:
                    expect(g, got, (Z,) * len(got))
                elif sig is not None:
                    try:
                        expect(g, got, relation_profile(g.rel, g.swap, sig))
                    except Exception as exc:  # unknown relation
                        errors.append(str(exc))
            elif isinstance(g, Leq):
                expect(g, got, (X, Y))
            elif isinstance(g, EAtom):
                expect(g, got, (Z, Z))
            elif isinstance(g, (Eq, Neq)):
                if got[0] != got[1]:
                    errors.append(f"{format_fo(g)}: compares sorts {got[0]} and {got[1]}")
            elif isinstance(g, Pred):
                want = {"P1": X, "P2": Y, "P": Z}[g.pred]
                expect(g, got, (want,))
            if tirs and isinstance(g, Leq):
                errors.append(f"{format_fo(g)}: incidence atom in a one-sorted formula")
        elif isinstance(g, QUANTIFIERS):
            if g.var.sort not in ((Z,) if tirs else (X, Y)):
                errors.append(f"{g.var.name}: sort {g.var.sort} is not available")
            go(g.body, {**env, g.var.name: g.var.sort})
        else:
            for c in fo_children(g):
                go(c, env)

    go(f, {})
    return errors


# ---------------------------------------------------------------- translation


class _Fresh:
    """Fresh bound variables, avoiding the individual variables of nominals."""

    def __init__(self, taken=()):
        self.taken = set(taken)
        self.count = {X: 0, Y: 0, Z: 0}

    def __call__(self, sort: str) -> FVar:
        while True:
            self.count[sort] += 1
            name = f"{sort.lower()}{self.count[sort]}"
            if name not in self.taken:
                self.taken.add(name)
                return FVar(name, sort)


def _individuals(fs, nom_sort: str, conom_sort: str) -> tuple[dict, dict]:
    noms = {n: FVar(n, nom_sort) for n in nominals(*fs)}
    conoms = {m: FVar(m, conom_sort) for m in conominals(*fs)}
    clash = set(noms) & set(conoms)
    if clash:
        raise FOLError(f"names used as both nominal and co-nominal: {sorted(clash)}")
    return noms, conoms


class RSTranslator:
    """Standard translation into the two-sorted language of RS frames."""

    def __init__(self, sig: ExpandedSignature | Signature, noms=None, conoms=None,
                 allow_variables: bool = False):
        self.sig = sig.expand() if isinstance(sig, Signature) else sig
        self.noms = dict(noms or {})
        self.conoms = dict(conoms or {})
        self.allow_variables = allow_variables
        self.fresh = _Fresh(v.name for v in [*self.noms.values(), *self.conoms.values()])

    def _nom(self, name: str) -> FVar:
        if name not in self.noms:
            self.noms[name] = FVar(name, X)
            self.fresh.taken.add(name)
        return self.noms[name]

    def _conom(self, name: str) -> FVar:
        if name not in self.conoms:
            self.conoms[name] = FVar(name, Y)
            self.fresh.taken.add(name)
        return self.conoms[name]

    def _var(self, f: Var, pred: str, v: FVar) -> FOFormula:
        if not self.allow_variables:
            raise FOLError(f"formula is not pure: variable {f.name}")
        return Pred(pred, f.name, v)

    def _rel(self, conn: Connective, head: FVar, zs: list[FVar]) -> RelAtom:
        if conn.is_base:
            return RelAtom(conn.name, (head, *zs))
        if conn.parent in ("meet", "join"):
            raise FOLError(f"{conn.name} has no relational counterpart on RS frames")
        return RelAtom(conn.parent, (head, *zs), conn.coordinate)

    def _st(self, f: Formula, v: FVar) -> FOFormula:
        return self.st_x(f, v) if v.sort == X else self.st_y(f, v)

    def _scheme(self, f: App, head: FVar, conn: Connective) -> FOFormula:
        # arguments of an F connective live in X^eps, of a G connective in Y^eps
        mono, anti = (X, Y) if conn.family == "F" else (Y, X)
        zs = [self.fresh(mono if e is POS else anti) for e in conn.order_type]
        if not zs:
            return self._rel(conn, head, zs)
        body = conj(*(self._st(a, z) for a, z in zip(f.args, zs)))
        return forall(zs, Implies(body, self._rel(conn, head, zs)))

    def st_x(self, f: Formula, x: FVar) -> FOFormula:
        if isinstance(f, Top):
            return Eq(x, x)
        if isinstance(f, Bot):
            return Neq(x, x)
        if isinstance(f, Var):
            return self._var(f, "P1", x)
        if isinstance(f, Nom):
            y = self.fresh(Y)
            return Forall(y, Implies(Leq(self._nom(f.name), y), Leq(x, y)))
        if isinstance(f, Conom):
            return Leq(x, self._conom(f.name))
        if isinstance(f, Meet):
            return conj(self.st_x(f.left, x), self.st_x(f.right, x))
        if isinstance(f, App) and self.sig[f.op].family == "G":
            return self._scheme(f, x, self.sig[f.op])
        if isinstance(f, (Join, App)):
            y = self.fresh(Y)
            return Forall(y, Implies(self.st_y(f, y), Leq(x, y)))
        raise TypeError(f"not a formula: {f!r}")

    def st_y(self, f: Formula, y: FVar) -> FOFormula:
        if isinstance(f, Top):
            return Neq(y, y)
        if isinstance(f, Bot):
            return Eq(y, y)
        if isinstance(f, Var):
            return self._var(f, "P2", y)
        if isinstance(f, Nom):
            return Leq(self._nom(f.name), y)
        if isinstance(f, Conom):
            x = self.fresh(X)
            return Forall(x, Implies(Leq(x, self._conom(f.name)), Leq(x, y)))
        if isinstance(f, Join):
            return conj(self.st_y(f.left, y), self.st_y(f.right, y))
        if isinstance(f, App) and self.sig[f.op].family == "F":
            return self._scheme(f, y, self.sig[f.op])
        if isinstance(f, (Meet, App)):
            x = self.fresh(X)
            return Forall(x, Implies(self.st_x(f, x), Leq(x, y)))
        raise TypeError(f"not a formula: {f!r}")

    def inequality(self, ineq: Inequality) -> FOFormula:
        x, y = self.fresh(X), self.fresh(Y)
        body = conj(self.st_x(ineq.lhs, x), self.st_y(ineq.rhs, y))
        return Forall(x, Forall(y, Implies(body, Leq(x, y))))


def _as_quasi(q) -> QuasiInequality:
    return QuasiInequality((), q) if isinstance(q, Inequality) else q


def _quasi_formulas(q: QuasiInequality) -> list[Formula]:
    return [f for ineq in (*q.premises, q.conclusion) for f in (ineq.lhs, ineq.rhs)]


def _require_pure(q: QuasiInequality) -> None:
    vs = variables(*_quasi_formulas(q))
    if vs:
        raise FOLError(f"quasi-inequality is not pure: variables {', '.join(vs)}")


def _close(q: QuasiInequality, clause, noms: dict, conoms: dict) -> FOFormula:
    concl = clause(q.conclusion)
    body = concl if not q.premises else Implies(conj(*(clause(p) for p in q.premises)), concl)
    return forall([*noms.values(), *conoms.values()], body)


def st_x(f: Formula, sig, var: str = "x", allow_variables: bool = False) -> FOFormula:
    t = RSTranslator(sig, allow_variables=allow_variables)
    t.fresh.taken.add(var)
    return t.st_x(f, FVar(var, X))


def st_y(f: Formula, sig, var: str = "y", allow_variables: bool = False) -> FOFormula:
    t = RSTranslator(sig, allow_variables=allow_variables)
    t.fresh.taken.add(var)
    return t.st_y(f, FVar(var, Y))


def translate_quasi_rs(q: QuasiInequality | Inequality, sig) -> FOFormula:
    """Frame sentence over RS frames for a pure quasi-inequality."""
    q = _as_quasi(q)
    _require_pure(q)
    noms, conoms = _individuals(_quasi_formulas(q), X, Y)
    t = RSTranslator(sig, noms, conoms)
    return _close(q, t.inequality, noms, conoms)


CONOMINAL_CLAUSES = ("table", "dual")


class TiRSTranslator:
    """Satisfaction and co-satisfaction translations over TiRS graphs.

    ``conominal_clause`` selects how co-satisfaction of a co-nominal ``n``
    is translated.  ``"table"`` gives ``~(z E n)``.  ``"dual"`` gives
    ``forall w[~(w E n) -> ~(w E z)]``, mirroring the nominal clause; only
    this one agrees with validity on the TiRS graphs of finite lattices when
    co-nominals occur.
    """

    def __init__(self, sig: ExpandedSignature | Signature, noms=None, conoms=None,
                 allow_variables: bool = False, conominal_clause: str = "table"):
        if conominal_clause not in CONOMINAL_CLAUSES:
            raise ValueError(f"unknown co-nominal clause {conominal_clause!r}")
        self.conominal_clause = conominal_clause
        self.sig = sig.expand() if isinstance(sig, Signature) else sig
        self.noms = dict(noms or {})
        self.conoms = dict(conoms or {})
        self.allow_variables = allow_variables
        self.fresh = _Fresh(v.name for v in [*self.noms.values(), *self.conoms.values()])

    def _ind(self, table: dict, name: str) -> FVar:
        if name not in table:
            table[name] = FVar(name, Z)
            self.fresh.taken.add(name)
        return table[name]

    def _modal(self, f: App) -> Connective:
        conn = self.sig[f.op]
        if not conn.is_base or conn.order_type != (POS,):
            raise FOLError(
                f"{f.op} is outside the TiRS fragment (unary monotone base connectives only)"
            )
        return conn

    def _var(self, f: Var) -> None:
        if not self.allow_variables:
            raise FOLError(f"formula is not pure: variable {f.name}")

    def _out(self, f: Formula, z: FVar) -> FOFormula:
        # forall z'[z E z' -> ~ST-(f, z')]
        w = self.fresh(Z)
        return Forall(w, Implies(EAtom(z, w), Not(self.st_minus(f, w))))

    def _in(self, f: Formula, z: FVar) -> FOFormula:
        # forall z'[z' E z -> ~ST+(f, z')]
        w = self.fresh(Z)
        return Forall(w, Implies(EAtom(w, z), Not(self.st_plus(f, w))))

    def st_plus(self, f: Formula, z: FVar) -> FOFormula:
        if isinstance(f, Bot):
            return Neq(z, z)
        if isinstance(f, Top):
            return Eq(z, z)
        if isinstance(f, Var):
            self._var(f)
            return Pred("P", f.name, z)
        if isinstance(f, Nom):
            w = self.fresh(Z)
            i = self._ind(self.noms, f.name)
            return Forall(w, Implies(Not(EAtom(i, w)), Not(EAtom(z, w))))
        if isinstance(f, Meet):
            return conj(self.st_plus(f.left, z), self.st_plus(f.right, z))
        if isinstance(f, App) and self._modal(f).family == "G":
            w = self.fresh(Z)
            return Forall(w, Implies(RelAtom(f.op, (z, w)), Not(self.st_minus(f.args[0], w))))
        if isinstance(f, (Conom, Join, App)):
            return self._out(f, z)
        raise TypeError(f"not a formula: {f!r}")

    def st_minus(self, f: Formula, z: FVar) -> FOFormula:
        if isinstance(f, Bot):
            return Eq(z, z)
        if isinstance(f, Top):
            return Neq(z, z)
        if isinstance(f, Var):
            self._var(f)
            return self._in(f, z)
        if isinstance(f, Conom):
            n = self._ind(self.conoms, f.name)
            if self.conominal_clause == "table":
                return Not(EAtom(z, n))
            w = self.fresh(Z)
            return Forall(w, Implies(Not(EAtom(w, n)), Not(EAtom(w, z))))
        if isinstance(f, Join):
            return conj(self.st_minus(f.left, z), self.st_minus(f.right, z))
        if isinstance(f, App) and self._modal(f).family == "F":
            w = self.fresh(Z)
            return Forall(w, Implies(RelAtom(f.op, (z, w)), Not(self.st_plus(f.args[0], w))))
        if isinstance(f, (Nom, Meet, App)):
            return self._in(f, z)
        raise TypeError(f"not a formula: {f!r}")

    def inequality(self, ineq: Inequality) -> FOFormula:
        z, w = self.fresh(Z), self.fresh(Z)
        body = conj(self.st_plus(ineq.lhs, z), self.st_minus(ineq.rhs, w))
        return Forall(z, Forall(w, Implies(body, Not(EAtom(z, w)))))


def st_plus(f: Formula, sig, var: str = "z", allow_variables: bool = False) -> FOFormula:
    t = TiRSTranslator(sig, allow_variables=allow_variables)
    t.fresh.taken.add(var)
    return t.st_plus(f, FVar(var, Z))


def st_minus(f: Formula, sig, var: str = "z", allow_variables: bool = False,
             conominal_clause: str = "table") -> FOFormula:
    t = TiRSTranslator(sig, allow_variables=allow_variables, conominal_clause=conominal_clause)
    t.fresh.taken.add(var)
    return t.st_minus(f, FVar(var, Z))


def tidy(f: FOFormula) -> FOFormula:
    """Push negations through the shapes the TiRS clauses produce.

    Applied top-down until nothing changes:
    ``~forall v[A -> ~B]`` becomes ``exists v[A & B]``, ``~A -> ~B`` becomes
    ``B -> A`` and ``~~A`` becomes ``A``.  Each step is a classical
    equivalence.
    """

    def step(g):
        if isinstance(g, Not):
            b = g.body
            if isinstance(b, Forall) and isinstance(b.body, Implies) and isinstance(b.body.right, Not):
                return Exists(b.var, conj(b.body.left, b.body.right.body))
            if isinstance(b, Not):
                return b.body
        if isinstance(g, Implies) and isinstance(g.left, Not) and isinstance(g.right, Not):
            return Implies(g.right.body, g.left.body)
        return None

    def go(g):
        while True:
            n = step(g)
            if n is None:
                break
            g = n
        if isinstance(g, Not):
            return Not(go(g.body))
        if isinstance(g, And):
            return conj(*(go(p) for p in g.parts))
        if isinstance(g, Implies):
            return Implies(go(g.left), go(g.right))
        if isinstance(g, QUANTIFIERS):
            return type(g)(g.var, go(g.body))
        return g

    prev = None
    while f != prev:
        prev, f = f, go(f)
    return f


def translate_quasi_tirs(q: QuasiInequality | Inequality, sig, tidy_output: bool = True,
                         conominal_clause: str = "table") -> FOFormula:
    """Frame sentence over TiRS graphs for a pure quasi-inequality."""
    q = _as_quasi(q)
    _require_pure(q)
    noms, conoms = _individuals(_quasi_formulas(q), Z, Z)
    t = TiRSTranslator(sig, noms, conoms, conominal_clause=conominal_clause)
    out = _close(q, t.inequality, noms, conoms)
    return tidy(out) if tidy_output else out


def translate(q, sig, frames: str = "rs", conominal_clause: str = "table") -> FOFormula:
    if frames == "rs":
        return translate_quasi_rs(q, sig)
    if frames == "tirs":
        return translate_quasi_tirs(q, sig, conominal_clause=conominal_clause)
    raise ValueError(f"unknown frame semantics {frames!r}")
