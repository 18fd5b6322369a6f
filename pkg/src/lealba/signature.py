"""Signatures of normal lattice expansions.

A signature lists the base connectives of a language, split into the
join-preserving family ``F`` and the meet-preserving family ``G``, each with
an order type (``1`` for monotone coordinates, ``d`` for antitone ones).
Expanding a signature adds the residuals of every base connective in every
coordinate, which together form the families ``F*`` and ``G*``.

Residual names are derived mechanically: ``<name>_sharp_<i>`` for the
residual of an ``F`` connective in coordinate ``i`` and ``<name>_flat_<i>``
for a ``G`` connective.  They are never identified with other base
connectives, even when such an identification would be semantically valid.

Signature file format, one connective per line::

    mode lattice          # or: mode distributive (optional, default lattice)
    F dia 1 (1)           # family, name, arity, order type
    F circ 2 (1,1)
    G slash 2 (1,d)
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable


class SignatureError(ValueError):
    """Raised for malformed signature files or unknown connectives."""


class Polarity(Enum):
    POS = "1"
    NEG = "d"

    def flip(self) -> "Polarity":
        return Polarity.NEG if self is Polarity.POS else Polarity.POS

    def times(self, other: "Polarity") -> "Polarity":
        """Compose two polarities: flipping twice gives back ``POS``."""
        return self if other is Polarity.POS else self.flip()

    @property
    def symbol(self) -> str:
        return "+" if self is Polarity.POS else "-"

    def __str__(self) -> str:
        return self.value


POS = Polarity.POS
NEG = Polarity.NEG

OrderType = tuple[Polarity, ...]

RESERVED = frozenset({"top", "bot", "meet", "join"})
_DECL_RE = re.compile(
    r"([FG])\s+([A-Za-z_][A-Za-z0-9_]*)\s+(\d+)\s*(?:\(([^)]*)\))?\s*\Z"
)


@dataclass(frozen=True)
class Connective:
    """A connective of ``F*`` or ``G*``.

    ``family`` is ``"F"`` or ``"G"``.  ``parent`` and ``coordinate`` are set
    for residuals only and point to the base connective they come from.
    """

    name: str
    family: str
    order_type: OrderType
    parent: str | None = None
    coordinate: int | None = None

    @property
    def arity(self) -> int:
        return len(self.order_type)

    @property
    def is_base(self) -> bool:
        return self.parent is None


def polarity(text: str) -> Polarity:
    if text in ("1", "+"):
        return POS
    if text in ("d", "∂", "-"):
        return NEG
    raise SignatureError(f"unknown polarity {text!r}; expected 1 or d")


def residual_name(conn: Connective, i: int) -> str:
    suffix = "sharp" if conn.family == "F" else "flat"
    return f"{conn.name}_{suffix}_{i}"


def residual(conn: Connective, i: int) -> Connective:
    """Residual of a base connective in coordinate ``i`` (1-based).

    For ``f`` in ``F`` with ``f_i`` monotone the residual lands in ``G*``;
    with ``f_i`` antitone it stays in ``F*``.  Its order type keeps
    coordinate ``i`` monotone and flips the others in the first case, and
    keeps the order type unchanged in the second.  ``G`` is dual.
    """
    if not conn.is_base:
        raise SignatureError(f"{conn.name} is not a base connective")
    if not 1 <= i <= conn.arity:
        raise SignatureError(f"{conn.name} has no coordinate {i}")
    eps = conn.order_type
    if eps[i - 1] is POS:
        family = "G" if conn.family == "F" else "F"
        order = tuple(POS if k == i - 1 else e.flip() for k, e in enumerate(eps))
    else:
        family = conn.family
        order = eps
    return Connective(residual_name(conn, i), family, order, conn.name, i)


# Pseudo-connectives standing for the lattice operations.  In distributive
# mode their residuals (Heyting implication and co-implication) are
# available for the rewriting rules.
LATTICE_MEET = Connective("meet", "F", (POS, POS))
LATTICE_JOIN = Connective("join", "G", (POS, POS))


@dataclass(frozen=True)
class Signature:
    connectives: tuple[Connective, ...]
    mode: str = "lattice"
    name: str = ""

    def __post_init__(self) -> None:
        if self.mode not in ("lattice", "distributive"):
            raise SignatureError(f"unknown mode {self.mode!r}")
        seen = set()
        for c in self.connectives:
            if c.name in seen:
                raise SignatureError(f"duplicate connective {c.name}")
            seen.add(c.name)

    @property
    def distributive(self) -> bool:
        return self.mode == "distributive"

    def with_mode(self, mode: str) -> "Signature":
        return Signature(self.connectives, mode, self.name)

    def base(self, name: str) -> Connective:
        for c in self.connectives:
            if c.name == name:
                return c
        raise SignatureError(f"unknown base connective {name!r}")

    def expand(self) -> "ExpandedSignature":
        return ExpandedSignature(self)


@dataclass
class ExpandedSignature:
    """A signature together with all residuals of its base connectives."""

    base: Signature
    table: dict[str, Connective] = field(init=False)

    def __post_init__(self) -> None:
        table: dict[str, Connective] = {}
        sources = list(self.base.connectives)
        if self.base.distributive:
            sources += [LATTICE_MEET, LATTICE_JOIN]
        for c in self.base.connectives:
            table[c.name] = c
        for c in sources:
            for i in range(1, c.arity + 1):
                r = residual(c, i)
                if r.name in table:
                    raise SignatureError(f"residual name clash: {r.name}")
                table[r.name] = r
        self.table = table

    @property
    def mode(self) -> str:
        return self.base.mode

    @property
    def distributive(self) -> bool:
        return self.base.distributive

    def __contains__(self, name: str) -> bool:
        return name in self.table

    def __getitem__(self, name: str) -> Connective:
        try:
            return self.table[name]
        except KeyError:
            raise SignatureError(f"unknown connective {name!r}") from None

    def get(self, name: str) -> Connective | None:
        return self.table.get(name)

    def residual_of(self, name: str, i: int) -> Connective:
        if name == "meet":
            return residual(LATTICE_MEET, i)
        if name == "join":
            return residual(LATTICE_JOIN, i)
        conn = self[name]
        if not conn.is_base:
            raise SignatureError(f"{name} is not a base connective")
        if not 1 <= i <= conn.arity:
            raise SignatureError(f"{name} has no coordinate {i}")
        return self.table[residual_name(conn, i)]

    def parent_of(self, conn: Connective) -> Connective:
        """The base connective (or lattice pseudo-connective) of a residual."""
        if conn.parent == "meet":
            return LATTICE_MEET
        if conn.parent == "join":
            return LATTICE_JOIN
        return self.base.base(conn.parent)

    def connectives(self) -> Iterable[Connective]:
        return self.table.values()


def parse_signature(text: str, name: str = "") -> Signature:
    mode = "lattice"
    conns: list[Connective] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "mode":
            if len(parts) != 2:
                raise SignatureError(f"line {lineno}: expected 'mode lattice|distributive'")
            mode = parts[1]
            continue
        m = _DECL_RE.match(line)
        if not m:
            raise SignatureError(
                f"line {lineno}: expected '<F|G> <name> <arity> (<p1>,...,<pn>)'"
            )
        family, cname, arity, order_text = m.group(1), m.group(2), int(m.group(3)), m.group(4)
        if cname in RESERVED:
            raise SignatureError(f"line {lineno}: {cname!r} is reserved")
        if "_sharp_" in cname or "_flat_" in cname:
            raise SignatureError(f"line {lineno}: {cname!r} clashes with residual naming")
        entries = [e.strip() for e in (order_text or "").split(",") if e.strip()]
        try:
            order = tuple(polarity(e) for e in entries)
        except SignatureError as exc:
            raise SignatureError(f"line {lineno}: {exc}") from None
        if len(order) != arity:
            raise SignatureError(
                f"line {lineno}: {cname} declares arity {arity} but order type has {len(order)} entries"
            )
        conns.append(Connective(cname, family, order))
    return Signature(tuple(conns), mode, name)


BUNDLED = ("lml", "dml", "lambek", "lg")


def bundled_signature(name: str) -> Signature:
    """Load one of the signature files shipped with the package."""
    stem = name[:-4] if name.endswith(".sig") else name
    if stem not in BUNDLED:
        raise SignatureError(f"no bundled signature {name!r}")
    text = resources.files("lealba").joinpath("data", f"{stem}.sig").read_text()
    return parse_signature(text, stem)


def load_signature(spec: str) -> Signature:
    """Load a signature from a file path, falling back to bundled names."""
    path = Path(spec)
    if path.is_file():
        return parse_signature(path.read_text(), path.stem)
    try:
        return bundled_signature(spec)
    except SignatureError:
        raise SignatureError(f"signature file not found: {spec}") from None
