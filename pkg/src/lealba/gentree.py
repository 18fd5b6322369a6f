"""Signed generation trees: node classes, good branches, inductive recognition.

Every internal node of a signed generation tree is classified as a skeleton
node (``DELTA`` adjoint or ``SLR``) or a PIA node (``SRA`` or ``SRR``).  A
branch from a variable leaf to the root is *good* when it reads, from the
leaf upwards, as PIA nodes followed by skeleton nodes, and *excellent* when
the PIA part uses SRA nodes only.

An order type ``eps`` assigns each variable the polarity in which it will be
solved.  A leaf ``+p`` with ``eps[p] = 1`` or ``-p`` with ``eps[p] = d`` is
critical, and only branches from critical leaves are constrained.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

from .signature import NEG, POS, ExpandedSignature, Polarity
from .syntax import (
    App,
    Formula,
    Inequality,
    Join,
    Meet,
    Var,
    children,
    ineq_variables,
    map_formula,
    signed_walk,
    walk,
)


class NodeClass(Enum):
    DELTA = "DeltaAdjoint"
    SRA = "SRA"
    SLR = "SLR"
    SRR = "SRR"


class Quality(Enum):
    EXCELLENT = "Excellent"
    GOOD = "GoodNotExcellent"
    NOT_GOOD = "NotGood"


SKELETON = frozenset({NodeClass.DELTA, NodeClass.SLR})
PIA = frozenset({NodeClass.SRA, NodeClass.SRR})

Eps = dict[str, Polarity]
Omega = frozenset[tuple[str, str]]

MAX_VARIABLES = 12


class TooManyVariables(ValueError):
    pass


def classify(sign: Polarity, node: Formula, sig: ExpandedSignature) -> frozenset[NodeClass]:
    """Admissible classes of an internal node carrying ``sign``."""
    distributive = sig.distributive
    if isinstance(node, (Meet, Join)):
        # +join and -meet are the "join-like" lattice nodes
        joinlike = isinstance(node, Join) == (sign is POS)
        if distributive:
            if joinlike:
                return frozenset({NodeClass.DELTA, NodeClass.SRR})
            return frozenset({NodeClass.SLR, NodeClass.SRA})
        return frozenset({NodeClass.DELTA if joinlike else NodeClass.SRA})
    if isinstance(node, App) and node.args:
        conn = sig[node.op]
        # +f and -g behave like F-connectives
        flike = (conn.family == "F") == (sign is POS)
        if flike:
            return frozenset({NodeClass.SLR})
        return frozenset({NodeClass.SRA if conn.arity == 1 else NodeClass.SRR})
    raise ValueError(f"cannot classify a leaf: {node!r}")


@dataclass(frozen=True)
class BranchNode:
    """An internal node on a branch, with the child index the branch takes."""

    node: Formula
    sign: Polarity
    child: int
    classes: frozenset[NodeClass]


@dataclass(frozen=True)
class Branch:
    """A branch from a variable leaf; ``nodes`` run from the leaf to the root."""

    side: str  # "lhs" or "rhs"
    path: tuple[int, ...]
    var: str
    sign: Polarity
    nodes: tuple[BranchNode, ...]


def branches(f: Formula, sign: Polarity, sig: ExpandedSignature, side: str = "lhs") -> list[Branch]:
    """All branches ending in a variable leaf, left to right."""
    out: list[Branch] = []

    def go(g: Formula, s: Polarity, path: tuple[int, ...], above: list[BranchNode]) -> None:
        if isinstance(g, Var):
            out.append(Branch(side, path, g.name, s, tuple(reversed(above))))
            return
        kids = children(g)
        if not kids:
            return
        classes = classify(s, g, sig)
        for i, k in enumerate(kids):
            ks = s.times(sig[g.op].order_type[i]) if isinstance(g, App) else s
            go(k, ks, path + (i,), above + [BranchNode(g, s, i, classes)])

    go(f, sign, (), [])
    return out


def ineq_branches(ineq: Inequality, sig: ExpandedSignature) -> list[Branch]:
    return branches(ineq.lhs, POS, sig, "lhs") + branches(ineq.rhs, NEG, sig, "rhs")


def is_critical(var_sign: Polarity, eps_value: Polarity) -> bool:
    return var_sign is eps_value


def critical_branches(ineq: Inequality, eps: Eps, sig: ExpandedSignature) -> list[Branch]:
    return [b for b in ineq_branches(ineq, sig) if is_critical(b.sign, eps[b.var])]


def _split_points(nodes: tuple[BranchNode, ...], pia_ok) -> list[int]:
    """Split indices ``k`` with ``nodes[:k]`` PIA-admissible and the rest skeleton."""
    out = []
    for k in range(len(nodes) + 1):
        if all(pia_ok(n) for n in nodes[:k]) and all(n.classes & SKELETON for n in nodes[k:]):
            out.append(k)
    return out


def branch_quality(branch: Branch | tuple[BranchNode, ...]) -> Quality:
    nodes = branch.nodes if isinstance(branch, Branch) else branch
    if _split_points(nodes, lambda n: NodeClass.SRA in n.classes):
        return Quality.EXCELLENT
    if _split_points(nodes, lambda n: bool(n.classes & PIA)):
        return Quality.GOOD
    return Quality.NOT_GOOD


def _srr_requirements(branch: Branch, sig: ExpandedSignature):
    """Side conditions for the good split with the shortest PIA segment.

    Returns ``None`` if the branch is not good, otherwise a list of
    ``(leaf_name, leaf_sign)`` occurrences from the off-branch children of
    the SRR nodes in the PIA segment.  A longer PIA segment only adds
    conditions, so the shortest one is the most permissive.
    """
    points = _split_points(branch.nodes, lambda n: bool(n.classes & PIA))
    if not points:
        return None
    k = points[0]
    reqs: list[tuple[str, Polarity]] = []
    for n in branch.nodes[:k]:
        if NodeClass.SRA in n.classes:
            continue
        for h, child in enumerate(children(n.node)):
            if h == n.child:
                continue
            child_sign = n.sign.times(sig[n.node.op].order_type[h]) if isinstance(n.node, App) else n.sign
            for _, g, s in signed_walk(child, child_sign, sig):
                if isinstance(g, Var):
                    reqs.append((g.name, s))
    return reqs


def transitive_closure(pairs) -> frozenset[tuple[str, str]]:
    closure = set(pairs)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(closure), repeat=2):
            if b == c and (a, d) not in closure:
                closure.add((a, d))
                changed = True
    return frozenset(closure)


def _inductive_constraints(ineq: Inequality, eps: Eps, sig: ExpandedSignature):
    """Omega pairs forced by ``eps``, or ``None`` if some condition fails."""
    pairs: set[tuple[str, str]] = set()
    for b in critical_branches(ineq, eps, sig):
        reqs = _srr_requirements(b, sig)
        if reqs is None:
            return None
        for name, s in reqs:
            # off-branch leaves must be non-critical, and strictly below
            if is_critical(s, eps[name]) or name == b.var:
                return None
            pairs.add((name, b.var))
    return pairs


def is_inductive(ineq: Inequality, omega, eps: Eps, sig: ExpandedSignature) -> bool:
    closure = transitive_closure(omega)
    if any(a == b for a, b in closure):
        return False
    pairs = _inductive_constraints(ineq, eps, sig)
    return pairs is not None and pairs <= closure


def is_sahlqvist(ineq: Inequality, eps: Eps, sig: ExpandedSignature) -> bool:
    return all(branch_quality(b) is Quality.EXCELLENT for b in critical_branches(ineq, eps, sig))


def _order_types(names: list[str]):
    if len(names) > MAX_VARIABLES:
        raise TooManyVariables(f"{len(names)} variables exceed the limit of {MAX_VARIABLES}")
    for combo in itertools.product((POS, NEG), repeat=len(names)):
        yield dict(zip(names, combo))


def find_inductive(ineq: Inequality, sig: ExpandedSignature):
    """First ``(omega, eps)`` making ``ineq`` inductive, or ``None``.

    Order types are tried with ``1`` before ``d`` for each variable in order
    of first occurrence, the first variable varying slowest.  ``omega`` is
    the transitive closure of exactly the pairs the SRR conditions require.
    """
    for eps in _order_types(ineq_variables(ineq)):
        pairs = _inductive_constraints(ineq, eps, sig)
        if pairs is None:
            continue
        closure = transitive_closure(pairs)
        if any(a == b for a, b in closure):
            continue
        return closure, eps
    return None


def find_sahlqvist(ineq: Inequality, sig: ExpandedSignature):
    for eps in _order_types(ineq_variables(ineq)):
        if is_sahlqvist(ineq, eps, sig):
            return eps
    return None


def format_eps(eps: Eps) -> str:
    return ",".join(f"{k}:{v.value}" for k, v in eps.items())


def format_omega(omega) -> str:
    """Cover relation of ``omega`` (the pairs not implied by transitivity)."""
    pairs = sorted(omega)
    cover = [
        (a, b) for a, b in pairs
        if not any((a, c) in omega and (c, b) in omega for c in {x for pair in pairs for x in pair})
    ]
    return ",".join(f"{a}<{b}" for a, b in cover) if cover else "none"


def parse_eps(text: str) -> Eps:
    from .signature import polarity

    out: Eps = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        name, _, val = item.partition(":")
        out[name.strip()] = polarity(val.strip())
    return out


def parse_omega(text: str) -> frozenset[tuple[str, str]]:
    """Chains such as ``p<q<r`` separated by commas; ``none`` is empty."""
    pairs = set()
    if text.strip() in ("", "none"):
        return frozenset()
    for chain in text.split(","):
        names = [n.strip() for n in chain.split("<")]
        if len(names) < 2 or not all(names):
            raise ValueError(f"bad dependency chain {chain!r}")
        pairs.update(zip(names, names[1:]))
    return transitive_closure(pairs)


def classify_inequality(ineq: Inequality, sig: ExpandedSignature) -> str:
    """One-line verdict used by the command-line front end."""
    eps = find_sahlqvist(ineq, sig)
    if eps is not None:
        return f"SAHLQVIST eps={format_eps(eps)}"
    found = find_inductive(ineq, sig)
    if found is not None:
        omega, eps = found
        return f"INDUCTIVE eps={format_eps(eps)} omega={format_omega(omega)}"
    return "NEITHER"


LML_FUSION = {"circ": Meet, "star": Join}
LML_NAMES = frozenset({"dia", "box", "ltri", "rtri", "circ", "star"})


def project_pi(f: Formula | Inequality) -> Formula | Inequality:
    """Read fusion as meet and fission as join."""
    if isinstance(f, Inequality):
        return Inequality(project_pi(f.lhs), project_pi(f.rhs))
    for _, g in walk(f):
        if isinstance(g, App) and g.op not in LML_NAMES:
            raise ValueError(f"connective {g.op} is not in the lattice modal language")

    def fn(g: Formula):
        if isinstance(g, App) and g.op in LML_FUSION:
            return LML_FUSION[g.op](*g.args)
        return None

    return map_formula(f, fn)
