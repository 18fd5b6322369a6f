"""Finite lattice models and brute-force validity checking.

A ``FiniteLE`` is a finite lattice with one operation table per base
connective.  Tables are validated for normality on construction: ``F``
connectives preserve binary and empty joins in their monotone coordinates
and turn meets into joins in their antitone ones, and dually for ``G``.

Residual connectives are evaluated through their defining adjunctions, so a
model only has to supply the base tables.  Nominals range over the
join-irreducible elements and co-nominals over the meet-irreducible ones.

Evaluation is vectorised with numpy: every formula is evaluated on the whole
grid of assignments at once.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .signature import LATTICE_JOIN, LATTICE_MEET, POS, Connective, Signature
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


class ModelError(ValueError):
    """Raised for malformed lattices or non-normal operation tables."""


MAX_VARS_ON_LARGE = 6
LARGE_LATTICE = 5


class FiniteLattice:
    """A finite bounded lattice given by its order relation."""

    def __init__(self, elements: list[str], leq: np.ndarray, name: str = ""):
        self.elements = list(elements)
        self.name = name
        self.leq = np.asarray(leq, dtype=bool)
        n = len(self.elements)
        if n == 0:
            raise ModelError("a lattice needs at least one element")
        if len(set(self.elements)) != n:
            raise ModelError("duplicate element names")
        if self.leq.shape != (n, n):
            raise ModelError("order matrix has the wrong shape")
        if not self.leq.diagonal().all():
            raise ModelError("order is not reflexive")
        if (self.leq & self.leq.T & ~np.eye(n, dtype=bool)).any():
            raise ModelError("order is not antisymmetric")
        if ((self.leq.astype(int) @ self.leq.astype(int) > 0) & ~self.leq).any():
            raise ModelError("order is not transitive")
        self.join = np.empty((n, n), dtype=np.int64)
        self.meet = np.empty((n, n), dtype=np.int64)
        for a in range(n):
            for b in range(n):
                self.join[a, b] = self._extremum(self.leq[a] & self.leq[b], upper=True)
                self.meet[a, b] = self._extremum(self.leq[:, a] & self.leq[:, b], upper=False)
        self.bot = self._extremum(np.ones(n, dtype=bool), upper=True)
        self.top = self._extremum(np.ones(n, dtype=bool), upper=False)

    def _extremum(self, candidates: np.ndarray, upper: bool) -> int:
        # least element of an up-set of upper bounds, or greatest lower bound
        idx = np.flatnonzero(candidates)
        for c in idx:
            if upper and self.leq[c, idx].all():
                return int(c)
            if not upper and self.leq[idx, c].all():
                return int(c)
        kind = "join" if upper else "meet"
        raise ModelError(f"not a lattice: missing {kind}")

    @property
    def size(self) -> int:
        return len(self.elements)

    def index(self, name: str) -> int:
        try:
            return self.elements.index(name)
        except ValueError:
            raise ModelError(f"unknown element {name!r}") from None

    def join_all(self, items) -> int:
        out = self.bot
        for x in items:
            out = int(self.join[out, x])
        return out

    def meet_all(self, items) -> int:
        out = self.top
        for x in items:
            out = int(self.meet[out, x])
        return out

    @cached_property
    def join_irreducibles(self) -> list[int]:
        """Elements with exactly one lower cover."""
        return [a for a in range(self.size) if len(self._covers(a, below=True)) == 1]

    @cached_property
    def meet_irreducibles(self) -> list[int]:
        return [a for a in range(self.size) if len(self._covers(a, below=False)) == 1]

    def _covers(self, a: int, below: bool) -> list[int]:
        rel = self.leq if below else self.leq.T
        strict = [b for b in range(self.size) if b != a and rel[b, a]]
        return [b for b in strict if not any(c != b and rel[b, c] for c in strict)]

    def is_distributive(self) -> bool:
        n = range(self.size)
        return all(
            self.meet[a, self.join[b, c]] == self.join[self.meet[a, b], self.meet[a, c]]
            for a in n for b in n for c in n
        )

    def __repr__(self) -> str:
        return f"FiniteLattice({self.name or self.elements})"


def lattice_from_covers(elements: list[str], covers: list[tuple[str, str]], name: str = "") -> FiniteLattice:
    """Build a lattice from pairs ``(a, b)`` meaning ``a <= b``; closure is taken."""
    n = len(elements)
    idx = {e: i for i, e in enumerate(elements)}
    leq = np.eye(n, dtype=bool)
    for a, b in covers:
        leq[idx[a], idx[b]] = True
    for k in range(n):
        leq |= leq[:, [k]] & leq[[k], :]
    return FiniteLattice(elements, leq, name)


def chain(n: int) -> FiniteLattice:
    names = [str(i) for i in range(n)]
    return lattice_from_covers(names, list(zip(names, names[1:])), f"chain{n}")


def diamond() -> FiniteLattice:
    """The four-element Boolean lattice 2x2."""
    return lattice_from_covers(["0", "a", "b", "1"], [("0", "a"), ("0", "b"), ("a", "1"), ("b", "1")], "2x2")


def pentagon() -> FiniteLattice:
    return lattice_from_covers(
        ["0", "a", "b", "c", "1"], [("0", "a"), ("a", "b"), ("0", "c"), ("b", "1"), ("c", "1")], "N5"
    )


def m3() -> FiniteLattice:
    atoms = ["a", "b", "c"]
    return lattice_from_covers(["0", *atoms, "1"], [("0", x) for x in atoms] + [(x, "1") for x in atoms], "M3")


def two_atom_heyting() -> FiniteLattice:
    """Five elements: bottom, two atoms x and y, their join a, and top."""
    return lattice_from_covers(
        ["0", "x", "y", "a", "1"], [("0", "x"), ("0", "y"), ("x", "a"), ("y", "a"), ("a", "1")], "2atom5"
    )


def builtin_lattices() -> list[FiniteLattice]:
    return [chain(2), chain(3), diamond(), pentagon(), m3(), two_atom_heyting()]


# ---------------------------------------------------------------- operations


def _le(lat: FiniteLattice, a, b, pol) -> bool:
    return bool(lat.leq[a, b]) if pol is POS else bool(lat.leq[b, a])


def check_normal(lat: FiniteLattice, conn: Connective, table: np.ndarray) -> str | None:
    """Return a description of the first normality violation, or ``None``."""
    n = lat.size
    arity = conn.arity
    if table.shape != (n,) * arity:
        return f"{conn.name}: table has shape {table.shape}"
    if arity == 0:
        return None
    is_f = conn.family == "F"
    for i, pol in enumerate(conn.order_type):
        # F preserves joins in monotone and reverses meets in antitone slots
        use_join = (pol is POS) == is_f
        unit = lat.bot if use_join else lat.top
        target = lat.bot if is_f else lat.top
        combine_in = lat.join if use_join else lat.meet
        combine_out = lat.join if is_f else lat.meet
        for rest in itertools.product(range(n), repeat=arity - 1):
            def at(x):
                return int(table[rest[:i] + (x,) + rest[i:]])
            if at(unit) != target:
                return f"{conn.name}: coordinate {i + 1} does not send {lat.elements[unit]} to {lat.elements[target]}"
            for a in range(n):
                for b in range(a + 1, n):
                    if at(int(combine_in[a, b])) != int(combine_out[at(a), at(b)]):
                        return f"{conn.name}: coordinate {i + 1} is not normal at {lat.elements[a]}, {lat.elements[b]}"
    return None


def residual_table(lat: FiniteLattice, parent: Connective, table: np.ndarray, i: int) -> np.ndarray:
    """Table of the residual of ``parent`` in coordinate ``i`` (1-based).

    The result takes the same arguments as ``parent`` with the bound
    ``b`` in place of argument ``i``.
    """
    n = lat.size
    arity = parent.arity
    out = np.empty((n,) * arity, dtype=np.int64)
    k = i - 1
    pol = parent.order_type[k]
    for args in itertools.product(range(n), repeat=arity):
        b = args[k]
        cands = []
        for a in range(n):
            val = int(table[args[:k] + (a,) + args[k + 1:]])
            if parent.family == "F":
                ok = bool(lat.leq[val, b])       # f(..a..) <= b
            else:
                ok = bool(lat.leq[b, val])       # b <= g(..a..)
            if ok:
                cands.append(a)
        # the solution set is a down-set (join it) or an up-set (meet it)
        if (parent.family == "F") == (pol is POS):
            out[args] = lat.join_all(cands)
        else:
            out[args] = lat.meet_all(cands)
    return out


def _tabulate_lattice_op(lat: FiniteLattice, conn: Connective) -> np.ndarray:
    return lat.meet if conn is LATTICE_MEET else lat.join


@dataclass
class FiniteLE:
    lattice: FiniteLattice
    signature: Signature
    ops: dict[str, np.ndarray]
    name: str = ""
    _tables: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        for conn in self.signature.connectives:
            if conn.name not in self.ops:
                raise ModelError(f"missing table for {conn.name}")
            self.ops[conn.name] = np.asarray(self.ops[conn.name], dtype=np.int64)
            problem = check_normal(self.lattice, conn, self.ops[conn.name])
            if problem:
                raise ModelError(problem)
        extra = set(self.ops) - {c.name for c in self.signature.connectives}
        if extra:
            raise ModelError(f"tables for undeclared connectives: {sorted(extra)}")
        if self.signature.distributive and not self.lattice.is_distributive():
            raise ModelError(f"{self.lattice.name} is not distributive")
        self.expanded = self.signature.expand()

    def table(self, name: str) -> np.ndarray:
        if name in self.ops:
            return self.ops[name]
        if name not in self._tables:
            conn = self.expanded[name]
            if conn.is_base:
                raise ModelError(f"no table for {name}")
            parent = self.expanded.parent_of(conn)
            if parent in (LATTICE_MEET, LATTICE_JOIN):
                ptable = _tabulate_lattice_op(self.lattice, parent)
            else:
                ptable = self.ops[parent.name]
            self._tables[name] = residual_table(self.lattice, parent, ptable, conn.coordinate)
        return self._tables[name]

    def __repr__(self) -> str:
        return f"FiniteLE({self.name or self.lattice.name})"


# ---------------------------------------------------------------- evaluation


@dataclass
class Assignment:
    vars: dict[str, int] = field(default_factory=dict)
    noms: dict[str, int] = field(default_factory=dict)
    conoms: dict[str, int] = field(default_factory=dict)


def _eval(f: Formula, m: FiniteLE, env: dict):
    lat = m.lattice
    if isinstance(f, Var):
        return env[("p", f.name)]
    if isinstance(f, Nom):
        return env[("j", f.name)]
    if isinstance(f, Conom):
        return env[("m", f.name)]
    if isinstance(f, Top):
        return np.int64(lat.top)
    if isinstance(f, Bot):
        return np.int64(lat.bot)
    if isinstance(f, Meet):
        return lat.meet[_eval(f.left, m, env), _eval(f.right, m, env)]
    if isinstance(f, Join):
        return lat.join[_eval(f.left, m, env), _eval(f.right, m, env)]
    if isinstance(f, App):
        table = m.table(f.op)
        if not f.args:
            return np.int64(table[()])
        return table[tuple(_eval(a, m, env) for a in f.args)]
    raise TypeError(f"not a formula: {f!r}")


def eval_formula(f: Formula, m: FiniteLE, a: Assignment) -> int:
    env = {("p", k): np.int64(v) for k, v in a.vars.items()}
    env.update({("j", k): np.int64(v) for k, v in a.noms.items()})
    env.update({("m", k): np.int64(v) for k, v in a.conoms.items()})
    return int(_eval(f, m, env))


def _grid(keys: list, ranges: list[list[int]]) -> dict:
    """Broadcast every combination of the ranges into flat arrays."""
    if not keys:
        return {}
    mesh = np.meshgrid(*[np.asarray(r, dtype=np.int64) for r in ranges], indexing="ij")
    return {k: g.ravel() for k, g in zip(keys, mesh)}


def _environment(m: FiniteLE, formulas: list[Formula], fixed: dict | None = None) -> dict:
    lat = m.lattice
    vs = variables(*formulas)
    js = nominals(*formulas)
    ms = conominals(*formulas)
    if lat.size > LARGE_LATTICE and len(vs) > MAX_VARS_ON_LARGE:
        raise ModelError(
            f"refusing {len(vs)} variables on a lattice with {lat.size} elements"
        )
    keys = [("p", v) for v in vs] + [("j", j) for j in js] + [("m", n) for n in ms]
    ranges = (
        [list(range(lat.size))] * len(vs)
        + [lat.join_irreducibles] * len(js)
        + [lat.meet_irreducibles] * len(ms)
    )
    env = _grid(keys, ranges)
    if fixed:
        env.update(fixed)
    return env


def holds(ineq: Inequality, m: FiniteLE, env: dict):
    lhs = _eval(ineq.lhs, m, env)
    rhs = _eval(ineq.rhs, m, env)
    return m.lattice.leq[lhs, rhs]


def valid(ineq: Inequality, m: FiniteLE) -> bool:
    """Holds under every assignment (nominals and co-nominals included)."""
    env = _environment(m, [ineq.lhs, ineq.rhs])
    return bool(np.all(holds(ineq, m, env)))


def valid_quasi(q: QuasiInequality, m: FiniteLE) -> bool:
    parts = [q.conclusion, *q.premises]
    env = _environment(m, [f for ineq in parts for f in (ineq.lhs, ineq.rhs)])
    ok = holds(q.conclusion, m, env)
    for p in q.premises:
        ok = ok | ~holds(p, m, env)
    return bool(np.all(ok))


def check_equivalence(ineq: Inequality, result, m: FiniteLE) -> bool:
    """Input validity agrees with validity of every output quasi-inequality."""
    if not result.success:
        raise ValueError("check_equivalence needs a successful run")
    return valid(ineq, m) == all(valid_quasi(q, m) for q in result.quasis)


# ---------------------------------------------------------------- model generation


def _generators(lat: FiniteLattice, conn: Connective) -> list[list[int]]:
    """Per coordinate, the elements whose values determine a normal operation."""
    out = []
    for pol in conn.order_type:
        use_j = (pol is POS) == (conn.family == "F")
        out.append(lat.join_irreducibles if use_j else lat.meet_irreducibles)
    return out


def _extend(lat: FiniteLattice, conn: Connective, gens: list[list[int]], values: dict) -> np.ndarray:
    """Extend values on generator tuples to a full table.

    ``F``: ``f(a) = join of f(g)`` over generator tuples with ``g_i <= a_i`` in
    monotone slots and ``g_i >= a_i`` in antitone ones.  ``G`` is dual.
    """
    n = lat.size
    is_f = conn.family == "F"
    table = np.empty((n,) * conn.arity, dtype=np.int64)
    for args in itertools.product(range(n), repeat=conn.arity):
        below = []
        for i, pol in enumerate(conn.order_type):
            up = (pol is POS) == is_f
            # F monotone: generators below the argument; G monotone: above
            below.append([g for g in gens[i] if (lat.leq[g, args[i]] if up else lat.leq[args[i], g])])
        vals = [values[t] for t in itertools.product(*below)]
        table[args] = lat.join_all(vals) if is_f else lat.meet_all(vals)
    return table


def normal_tables(lat: FiniteLattice, conn: Connective):
    """Every normal table for ``conn`` on ``lat``, in a fixed order."""
    n = lat.size
    if conn.arity == 0:
        for v in range(n):
            yield np.array(v, dtype=np.int64)
        return
    gens = _generators(lat, conn)
    tuples = list(itertools.product(*gens))
    seen = set()
    for combo in itertools.product(range(n), repeat=len(tuples)):
        table = _extend(lat, conn, gens, dict(zip(tuples, combo)))
        key = table.tobytes()
        if key in seen:
            continue
        seen.add(key)
        if check_normal(lat, conn, table) is None:
            yield table


def enumerate_models(lat: FiniteLattice, sig: Signature, limit: int | None = None):
    """Stream normal models on ``lat``, varying the last connective fastest."""
    if limit is not None and limit <= 0:
        raise ValueError("limit must be positive")
    if lat.size > 8 or any(c.arity > 2 for c in sig.connectives):
        raise ValueError("enumeration supports lattices of size <= 8 and arity <= 2")
    conns = list(sig.connectives)
    count = 0

    def rec(k: int, chosen: dict):
        nonlocal count
        if k == len(conns):
            count += 1
            yield FiniteLE(lat, sig, dict(chosen), f"{lat.name}#{count - 1}")
            return
        for table in normal_tables(lat, conns[k]):
            chosen[conns[k].name] = table
            yield from rec(k + 1, chosen)
            del chosen[conns[k].name]

    for model in rec(0, {}):
        yield model
        if limit is not None and count >= limit:
            return


def random_normal_table(lat: FiniteLattice, conn: Connective, rng: random.Random, tries: int = 200) -> np.ndarray:
    """A random normal table; falls back to the constant bottom or top map."""
    if conn.arity == 0:
        return np.array(rng.randrange(lat.size), dtype=np.int64)
    gens = _generators(lat, conn)
    tuples = list(itertools.product(*gens))
    for _ in range(tries):
        values = {t: rng.randrange(lat.size) for t in tuples}
        table = _extend(lat, conn, gens, values)
        if check_normal(lat, conn, table) is None:
            return table
    const = lat.bot if conn.family == "F" else lat.top
    return np.full((lat.size,) * conn.arity, const, dtype=np.int64)


def random_model(lat: FiniteLattice, sig: Signature, rng: random.Random, name: str = "") -> FiniteLE:
    ops = {c.name: random_normal_table(lat, c, rng) for c in sig.connectives}
    return FiniteLE(lat, sig, ops, name or f"{lat.name}-random")


def model_suite(sig: Signature, count: int = 100, seed: int = 0, max_size: int = 5) -> list[FiniteLE]:
    """Built-in lattices with randomly drawn normal operations.

    Distributive signatures only use distributive lattices.
    """
    rng = random.Random(seed)
    lats = suite_lattices(sig, max_size)
    out = []
    for k in range(count):
        lat = lats[k % len(lats)]
        out.append(random_model(lat, sig, rng, f"{lat.name}-{k}"))
    return out


def suite_lattices(sig: Signature, max_size: int = 5) -> list[FiniteLattice]:
    lats = [lat for lat in builtin_lattices() if lat.size <= max_size]
    if sig.distributive:
        lats = [lat for lat in lats if lat.is_distributive()]
    return lats


def builtin_suite(sig: Signature, enumerated: int = 100, random_count: int = 100,
                  seed: int = 0, max_size: int = 5) -> list[FiniteLE]:
    """Enumerated models taken round-robin over the built-in lattices, then
    random ones.

    The enumerated part follows :func:`enumerate_models` on each lattice, so
    small lattices with few normal models are exhausted first.
    """
    streams = [enumerate_models(lat, sig) for lat in suite_lattices(sig, max_size)]
    out: list[FiniteLE] = []
    while streams and len(out) < enumerated:
        alive = []
        for s in streams:
            if len(out) >= enumerated:
                break
            m = next(s, None)
            if m is not None:
                out.append(m)
                alive.append(s)
        streams = alive
    return out + model_suite(sig, random_count, seed, max_size)


def heyting_lambek_model() -> FiniteLE:
    """Two-atom five-element Heyting algebra with fusion as meet.

    The slashes are Heyting implication, so the negation ``a\\bot`` is
    the pseudo-complement.
    """
    from .signature import bundled_signature

    lat = two_atom_heyting()
    n = lat.size
    imp = np.empty((n, n), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            imp[a, b] = lat.join_all(c for c in range(n) if lat.leq[lat.meet[a, c], b])
    return FiniteLE(lat, bundled_signature("lambek"), {"circ": lat.meet.copy(), "bslash": imp, "slash": imp.T.copy()}, "heyting5")


# ---------------------------------------------------------------- model files


def parse_model(text: str, sig: Signature, name: str = "") -> FiniteLE:
    """Read the line-based model format.

    ``elements: a b c``, ``leq: a<=b b<=c`` (closure is taken) and one
    ``op name: args = value`` line per table cell.
    """
    elements: list[str] | None = None
    pairs: list[tuple[str, str]] = []
    cells: dict[str, dict[tuple[str, ...], str]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("elements:"):
            elements = line[len("elements:"):].split()
        elif line.startswith("leq:"):
            for item in line[len("leq:"):].split():
                a, sep, b = item.partition("<=")
                if not sep or not a or not b:
                    raise ModelError(f"line {lineno}: bad order pair {item!r}")
                pairs.append((a, b))
        elif line.startswith("op "):
            m = re.match(r"op\s+(\w+)\s*:(.*)=\s*(\S+)\s*$", line)
            if not m:
                raise ModelError(f"line {lineno}: expected 'op name: args = value'")
            cells.setdefault(m.group(1), {})[tuple(m.group(2).split())] = m.group(3)
        else:
            raise ModelError(f"line {lineno}: unrecognised line {line!r}")
    if elements is None:
        raise ModelError("missing 'elements:' line")
    for a, b in pairs:
        for x in (a, b):
            if x not in elements:
                raise ModelError(f"unknown element {x!r} in order")
    lat = lattice_from_covers(elements, pairs, name)
    ops = {}
    for conn in sig.connectives:
        given = cells.pop(conn.name, None)
        if given is None:
            raise ModelError(f"no table for {conn.name}")
        table = np.empty((lat.size,) * conn.arity, dtype=np.int64)
        for args in itertools.product(elements, repeat=conn.arity):
            if args not in given:
                raise ModelError(f"missing cell {conn.name}({', '.join(args)})")
            table[tuple(lat.index(a) for a in args)] = lat.index(given.pop(args))
        if given:
            raise ModelError(f"bad cells for {conn.name}: {sorted(given)}")
        ops[conn.name] = table
    if cells:
        raise ModelError(f"tables for undeclared connectives: {sorted(cells)}")
    return FiniteLE(lat, sig, ops, name)


def load_model(path: str, sig: Signature) -> FiniteLE:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ModelError(f"cannot read model {path}: {exc}") from None
    return parse_model(text, sig, p.stem)


def format_model(m: FiniteLE) -> str:
    lat = m.lattice
    lines = [f"elements: {' '.join(lat.elements)}"]
    order = [
        f"{lat.elements[a]}<={lat.elements[b]}"
        for a in range(lat.size) for b in range(lat.size) if a != b and lat.leq[a, b]
    ]
    lines.append("leq: " + " ".join(order))
    for conn in m.signature.connectives:
        table = m.ops[conn.name]
        for args in itertools.product(range(lat.size), repeat=conn.arity):
            names = " ".join(lat.elements[a] for a in args)
            lines.append(f"op {conn.name}: {names} = {lat.elements[int(table[args])]}")
    return "\n".join(lines) + "\n"
