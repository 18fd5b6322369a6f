"""The ALBA rewrite engine.

A run has three stages.

1. Preprocessing: variables occurring uniformly are replaced by ``top`` or
   ``bot``, constants are simplified by normality, skeleton connectives are
   distributed over joins and meets below them, and top-level joins on the
   left and meets on the right are split.  Each resulting inequality starts
   its own system ``(S, Ineq)`` with ``S`` empty.
2. Reduction: approximation rules move subformulas of ``Ineq`` into ``S``
   behind fresh nominals ``j1, j2, ...`` and co-nominals ``m1, m2, ...``;
   residuation and splitting rules reshape entries of ``S``; Ackermann rules
   eliminate one variable at a time.
3. Output: each pure system becomes the quasi-inequality ``S => Ineq``.

Two strategies drive stage 2.  The guided strategy follows an order type
and dependency order witnessing that the inequality is inductive, so it
never backtracks.  The search strategy explores all rule applications
breadth-first within a step budget and is used when no witness exists.
Every rule application is recorded as a ``TraceStep`` that ``replay`` can
re-execute.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .gentree import Eps, NodeClass, classify, find_inductive, transitive_closure
from .signature import LATTICE_JOIN, LATTICE_MEET, NEG, POS, ExpandedSignature, Polarity
from .syntax import (
    BOT,
    TOP,
    App,
    Bot,
    Conom,
    Formula,
    Inequality,
    Join,
    Meet,
    Nom,
    Path,
    QuasiInequality,
    Top,
    Var,
    base_only,
    big_join,
    big_meet,
    children,
    conominals,
    contains_var,
    ineq_occurrences,
    ineq_variables,
    is_leaf,
    is_pure,
    nominals,
    print_inequality,
    rename,
    replace_at,
    sign_at,
    signed_walk,
    subterm,
    substitute_ineq,
    variables,
    walk,
    with_children,
)

DEFAULT_MAX_STEPS = 10000

APPROX_RULES = ("ApproxLPos", "ApproxLNeg", "ApproxRPos", "ApproxRNeg")


class RuleError(ValueError):
    """A rule was applied where its side conditions fail."""


class Stuck(Exception):
    """The guided strategy cannot continue."""


@dataclass(frozen=True)
class System:
    s: tuple[Inequality, ...]
    ineq: Inequality

    def variables(self) -> list[str]:
        return variables(*(f for e in (*self.s, self.ineq) for f in (e.lhs, e.rhs)))

    def is_pure(self) -> bool:
        return all(is_pure(e) for e in self.s) and is_pure(self.ineq)

    def quasi(self) -> QuasiInequality:
        return QuasiInequality(self.s, self.ineq)

    def names(self) -> set[str]:
        fs = [f for e in (*self.s, self.ineq) for f in (e.lhs, e.rhs)]
        return set(nominals(*fs)) | set(conominals(*fs))

    def __str__(self) -> str:
        return format_system(self)


def format_system(sys: System) -> str:
    entries = "; ".join(print_inequality(e) for e in sys.s)
    return f"S={{{entries}}} | Ineq={print_inequality(sys.ineq)}"


@dataclass(frozen=True)
class TraceStep:
    rule: str
    position: str
    before: System | tuple[Inequality, ...]
    after: System | tuple[Inequality, ...]
    fresh: str | None = None
    pivotal: bool = True

    def format(self, n: int) -> str:
        if isinstance(self.after, System):
            state = format_system(self.after)
        else:
            state = "S={} | Ineq=" + " ; ".join(print_inequality(e) for e in self.after)
        return f"STEP {n} {self.rule} @{self.position} | {state}"


@dataclass
class SystemRun:
    initial: System
    final: System
    steps: list[TraceStep]
    success: bool
    strategy: str
    eps: Eps | None = None
    omega: frozenset | None = None
    reason: str = ""

    @property
    def pivotal(self) -> bool:
        return all(s.pivotal for s in self.steps if s.rule in APPROX_RULES)


@dataclass
class AlbaResult:
    input: Inequality
    preprocess_steps: list[TraceStep]
    runs: list[SystemRun]

    @property
    def success(self) -> bool:
        return all(r.success for r in self.runs)

    @property
    def quasis(self) -> list[QuasiInequality]:
        if not self.success:
            return []
        return [r.final.quasi() for r in self.runs]

    @property
    def stuck(self) -> list[SystemRun]:
        return [r for r in self.runs if not r.success]

    @property
    def pivotal(self) -> bool:
        return all(r.pivotal for r in self.runs)

    @property
    def canonical(self) -> bool:
        return self.success and self.pivotal

    def trace_lines(self) -> list[str]:
        lines = []
        n = 0
        for step in self.preprocess_steps:
            n += 1
            lines.append(step.format(n))
        for k, run in enumerate(self.runs, 1):
            lines.append(f"SYSTEM {k} | {format_system(run.initial)}")
            for step in run.steps:
                n += 1
                lines.append(step.format(n))
        return lines


@dataclass
class AlbaOptions:
    strategy: str = "guided"
    max_steps: int = DEFAULT_MAX_STEPS
    eps: Eps | None = None
    omega: Iterable[tuple[str, str]] | None = None


# ---------------------------------------------------------------- positions


def _path_str(path: Path) -> str:
    return "".join(f".{i}" for i in path)


def _parse_path(text: str) -> Path:
    return tuple(int(x) for x in text.split(".") if x != "")


def _side(ineq: Inequality, side: str) -> Formula:
    return ineq.lhs if side == "lhs" else ineq.rhs


def _set_side(ineq: Inequality, side: str, f: Formula) -> Inequality:
    return Inequality(f, ineq.rhs) if side == "lhs" else Inequality(ineq.lhs, f)


def _root_sign(side: str) -> Polarity:
    return POS if side == "lhs" else NEG


def _is_slr(sign: Polarity, node: Formula, sig: ExpandedSignature) -> bool:
    return not is_leaf(node) and NodeClass.SLR in classify(sign, node, sig)


# ---------------------------------------------------------------- stage 1


def uniform_variables(ineq: Inequality, sig: ExpandedSignature) -> list[tuple[str, Polarity]]:
    signs: dict[str, set[Polarity]] = {}
    for name, s in ineq_occurrences(ineq, sig):
        signs.setdefault(name, set()).add(s)
    return [(v, next(iter(ss))) for v, ss in signs.items() if len(ss) == 1]


def _simplify_node(f: Formula, sign: Polarity, sig: ExpandedSignature) -> Formula | None:
    """One constant-absorption step at the root of ``f``, if any applies."""
    if isinstance(f, Meet):
        if isinstance(f.left, Bot) or isinstance(f.right, Bot):
            return BOT
        if isinstance(f.left, Top):
            return f.right
        if isinstance(f.right, Top):
            return f.left
    if isinstance(f, Join):
        if isinstance(f.left, Top) or isinstance(f.right, Top):
            return TOP
        if isinstance(f.left, Bot):
            return f.right
        if isinstance(f.right, Bot):
            return f.left
    if isinstance(f, App) and f.args:
        conn = sig[f.op]
        for a, pol in zip(f.args, conn.order_type):
            if conn.family == "F":
                if (pol is POS and isinstance(a, Bot)) or (pol is NEG and isinstance(a, Top)):
                    return BOT
            else:
                if (pol is POS and isinstance(a, Top)) or (pol is NEG and isinstance(a, Bot)):
                    return TOP
    return None


def _distribute_node(f: Formula, sign: Polarity, sig: ExpandedSignature) -> Formula | None:
    """Lift a join-like child through a skeleton parent.

    ``+f`` and ``-g`` nodes absorb ``+join`` and ``-meet`` children (the
    Delta-adjoints); in distributive mode so do ``+meet`` and ``-join``.
    """
    if is_leaf(f) or not _is_slr(sign, f, sig):
        return None
    kids = children(f)
    for i, k in enumerate(kids):
        if not isinstance(k, (Meet, Join)):
            continue
        ksign = sign.times(sig[f.op].order_type[i]) if isinstance(f, App) else sign
        if NodeClass.DELTA not in classify(ksign, k, sig):
            continue
        if isinstance(f, App):
            outer = Join if sig[f.op].family == "F" else Meet
        elif isinstance(f, Meet):
            outer = Join
        else:
            outer = Meet
        if outer is type(f):
            continue
        left = with_children(f, kids[:i] + (k.left,) + kids[i + 1:])
        right = with_children(f, kids[:i] + (k.right,) + kids[i + 1:])
        return outer(left, right)
    return None


def _first_rewrite(f: Formula, sign: Polarity, sig: ExpandedSignature, rewrite) -> tuple[Path, Formula] | None:
    """Innermost-first search for a node where ``rewrite`` applies."""
    for path, g, s in sorted(signed_walk(f, sign, sig), key=lambda t: -len(t[0])):
        out = rewrite(g, s, sig)
        if out is not None:
            return path, out
    return None


def _apply_stage1(ineqs: tuple[Inequality, ...], rule: str, position: str, sig: ExpandedSignature):
    head, _, rest = position.partition(".")
    if rule == "EliminateMonotone":
        head, _, var = position.partition(":")
    k = int(head[1:]) - 1
    ineq = ineqs[k]
    if rule == "EliminateMonotone":
        signs = {s for name, s in ineq_occurrences(ineq, sig) if name == var}
        if len(signs) != 1:
            raise RuleError(f"{var} is not uniform")
        value = TOP if signs == {POS} else BOT
        return ineqs[:k] + (substitute_ineq(ineq, var, value),) + ineqs[k + 1:]
    side, _, path_text = rest.partition(".")
    if rule == "Split":
        f = _side(ineq, side)
        if side == "lhs" and isinstance(f, Join):
            new = (Inequality(f.left, ineq.rhs), Inequality(f.right, ineq.rhs))
        elif side == "rhs" and isinstance(f, Meet):
            new = (Inequality(ineq.lhs, f.left), Inequality(ineq.lhs, f.right))
        else:
            raise RuleError("nothing to split")
        return ineqs[:k] + new + ineqs[k + 1:]
    path = _parse_path(path_text)
    f = _side(ineq, side)
    node = subterm(f, path)
    s = sign_at(f, path, _root_sign(side), sig)
    fn = _simplify_node if rule == "Simplify" else _distribute_node
    out = fn(node, s, sig)
    if out is None:
        raise RuleError(f"{rule} does not apply at {position}")
    return ineqs[:k] + (_set_side(ineq, side, replace_at(f, path, out)),) + ineqs[k + 1:]


def preprocess(ineq: Inequality, sig: ExpandedSignature) -> tuple[list[Inequality], list[TraceStep]]:
    """Stage 1, to a fixpoint."""
    ineqs: tuple[Inequality, ...] = (ineq,)
    steps: list[TraceStep] = []

    def record(rule: str, position: str) -> None:
        nonlocal ineqs
        after = _apply_stage1(ineqs, rule, position, sig)
        steps.append(TraceStep(rule, position, ineqs, after))
        ineqs = after

    def next_move() -> tuple[str, str] | None:
        for k, e in enumerate(ineqs, 1):
            for v, _ in uniform_variables(e, sig):
                return "EliminateMonotone", f"I{k}:{v}"
        for rule, fn in (("Simplify", _simplify_node), ("Distribute", _distribute_node)):
            for k, e in enumerate(ineqs, 1):
                for side in ("lhs", "rhs"):
                    found = _first_rewrite(_side(e, side), _root_sign(side), sig, fn)
                    if found is not None:
                        return rule, f"I{k}.{side}{_path_str(found[0])}"
        for k, e in enumerate(ineqs, 1):
            if isinstance(e.lhs, Join):
                return "Split", f"I{k}.lhs"
            if isinstance(e.rhs, Meet):
                return "Split", f"I{k}.rhs"
        return None

    while (move := next_move()) is not None:
        record(*move)
    return list(ineqs), steps


# ---------------------------------------------------------------- stage 2 rules


def slr_prefix_ok(f: Formula, path: Path, sign: Polarity, sig: ExpandedSignature) -> bool:
    """True if every node strictly above ``path`` is skeleton-SLR."""
    node = f
    for i in path:
        if not _is_slr(sign, node, sig):
            return False
        sign = sign.times(sig[node.op].order_type[i]) if isinstance(node, App) else sign
        node = children(node)[i]
    return True


def approximation_rule(side: str, sign: Polarity) -> str:
    if side == "lhs":
        return "ApproxLPos" if sign is POS else "ApproxLNeg"
    return "ApproxRPos" if sign is POS else "ApproxRNeg"


def fresh_name(sys: System, prefix: str, counter: int) -> str:
    used = sys.names()
    k = counter
    while f"{prefix}{k}" in used:
        k += 1
    return f"{prefix}{k}"


def approximate(sys: System, side: str, path: Path, fresh: str, sig: ExpandedSignature) -> tuple[System, str, bool]:
    """Extract the subformula at ``path`` of one side of ``Ineq``.

    Returns the new system, the rule name and whether the application is
    pivotal (the extracted node is not itself SLR on that branch).
    """
    f = _side(sys.ineq, side)
    root = _root_sign(side)
    if not slr_prefix_ok(f, path, root, sig):
        raise RuleError("approximation needs an SLR branch above the hole")
    gamma = subterm(f, path)
    if not (base_only(gamma, sig) or isinstance(gamma, (Nom, Conom))):
        raise RuleError("extracted subformula must be in the base language")
    sign = sign_at(f, path, root, sig)
    rule = approximation_rule(side, sign)
    if sign is POS:
        if not fresh.startswith("j"):
            raise RuleError(f"{rule} introduces a nominal")
        hole, entry = Nom(fresh), Inequality(Nom(fresh), gamma)
    else:
        if not fresh.startswith("m"):
            raise RuleError(f"{rule} introduces a co-nominal")
        hole, entry = Conom(fresh), Inequality(gamma, Conom(fresh))
    if fresh in sys.names():
        raise RuleError(f"{fresh} is not fresh")
    pivotal = is_leaf(gamma) or not _is_slr(sign, gamma, sig)
    new = System(sys.s + (entry,), _set_side(sys.ineq, side, replace_at(f, path, hole)))
    return new, rule, pivotal


def residuate(entry: Inequality, side: str, coord: int, sig: ExpandedSignature) -> tuple[Inequality, str]:
    """Apply the residuation rule for the head of one side of ``entry``."""
    i = coord - 1
    if side == "lhs":
        head, psi = entry.lhs, entry.rhs
        if isinstance(head, App) and head.args and sig[head.op].is_base and sig[head.op].family == "F":
            conn, args = sig[head.op], head.args
        elif isinstance(head, Meet) and sig.distributive:
            conn, args = LATTICE_MEET, (head.left, head.right)
        else:
            raise RuleError("left side is not headed by an F connective")
        rule = "ResiduateF"
    else:
        head, psi = entry.rhs, entry.lhs
        if isinstance(head, App) and head.args and sig[head.op].is_base and sig[head.op].family == "G":
            conn, args = sig[head.op], head.args
        elif isinstance(head, Join) and sig.distributive:
            conn, args = LATTICE_JOIN, (head.left, head.right)
        else:
            raise RuleError("right side is not headed by a G connective")
        rule = "ResiduateG"
    if not 0 <= i < len(args):
        raise RuleError(f"no coordinate {coord}")
    res = sig.residual_of(conn.name, coord)
    other = App(res.name, args[:i] + (psi,) + args[i + 1:])
    # F: monotone slot gives phi_i <= res, antitone gives res <= phi_i; G dual
    solved_below = (conn.order_type[i] is POS) == (conn.family == "F")
    if solved_below:
        return Inequality(args[i], other), rule
    return Inequality(other, args[i]), rule


def split_entry(entry: Inequality, side: str) -> tuple[Inequality, Inequality]:
    if side == "lhs" and isinstance(entry.lhs, Join):
        return Inequality(entry.lhs.left, entry.rhs), Inequality(entry.lhs.right, entry.rhs)
    if side == "rhs" and isinstance(entry.rhs, Meet):
        return Inequality(entry.lhs, entry.rhs.left), Inequality(entry.lhs, entry.rhs.right)
    raise RuleError("splitting rule not applicable")


def _var_signs(f: Formula, p: str, sig: ExpandedSignature) -> set[Polarity]:
    return {s for _, g, s in signed_walk(f, POS, sig) if isinstance(g, Var) and g.name == p}


def ackermann(sys: System, p: str, side: str, sig: ExpandedSignature) -> System:
    """Right (``side="right"``) or left Ackermann rule eliminating ``p``."""
    right = side == "right"
    if contains_var(sys.ineq.lhs, p) or contains_var(sys.ineq.rhs, p):
        raise RuleError(f"{p} occurs in Ineq")
    alphas: list[Formula] = []
    rest: list[Inequality] = []
    for e in sys.s:
        if right and e.rhs == Var(p) and not contains_var(e.lhs, p):
            alphas.append(e.lhs)
        elif not right and e.lhs == Var(p) and not contains_var(e.rhs, p):
            alphas.append(e.rhs)
        else:
            rest.append(e)
    beta_sign, gamma_sign = (POS, NEG) if right else (NEG, POS)
    for e in rest:
        if not _var_signs(e.lhs, p, sig) <= {beta_sign} or not _var_signs(e.rhs, p, sig) <= {gamma_sign}:
            raise RuleError(f"{print_inequality(e)} has the wrong polarity in {p}")
    value = big_join(alphas) if right else big_meet(alphas)
    return System(tuple(substitute_ineq(e, p, value) for e in rest), sys.ineq)


def apply_rule(sys: System, rule: str, position: str, sig: ExpandedSignature, fresh: str | None = None):
    """Apply one stage-2 rule; returns ``(system, pivotal)``."""
    if rule in APPROX_RULES:
        _, side, path_text = (position.split(".", 2) + [""])[:3]
        new, actual, pivotal = approximate(sys, side, _parse_path(path_text), fresh or "", sig)
        if actual != rule:
            raise RuleError(f"position {position} calls for {actual}, not {rule}")
        return new, pivotal
    if rule in ("AckermannRight", "AckermannLeft"):
        return ackermann(sys, position, "right" if rule == "AckermannRight" else "left", sig), True
    parts = position.split(".")
    k = int(parts[0][1:]) - 1
    entry = sys.s[k]
    if rule == "Split":
        new_entries = split_entry(entry, parts[1])
    elif rule in ("ResiduateF", "ResiduateG"):
        out, actual = residuate(entry, parts[1], int(parts[2]), sig)
        if actual != rule:
            raise RuleError(f"position {position} calls for {actual}, not {rule}")
        new_entries = (out,)
    else:
        raise RuleError(f"unknown rule {rule}")
    return System(sys.s[:k] + new_entries + sys.s[k + 1:], sys.ineq), True


# ---------------------------------------------------------------- guided strategy


class _Runner:
    def __init__(self, sys: System, sig: ExpandedSignature, max_steps: int):
        self.sys = sys
        self.sig = sig
        self.steps: list[TraceStep] = []
        self.counters = {"j": 1, "m": 1}
        self.max_steps = max_steps

    def apply(self, rule: str, position: str, fresh: str | None = None) -> None:
        if len(self.steps) >= self.max_steps:
            raise Stuck("step budget exceeded")
        new, pivotal = apply_rule(self.sys, rule, position, self.sig, fresh)
        self.steps.append(TraceStep(rule, position, self.sys, new, fresh, pivotal))
        self.sys = new

    def approximate_at(self, side: str, path: Path) -> None:
        f = _side(self.sys.ineq, side)
        sign = sign_at(f, path, _root_sign(side), self.sig)
        prefix = "j" if sign is POS else "m"
        name = fresh_name(self.sys, prefix, self.counters[prefix])
        self.counters[prefix] = int(name[1:]) + 1
        self.apply(approximation_rule(side, sign), f"ineq.{side}{_path_str(path)}", name)


def _pivot_point(f: Formula, leaf_path: Path, sign: Polarity, sig: ExpandedSignature) -> Path:
    """First node on the way to ``leaf_path`` that is not SLR."""
    node = f
    for k, i in enumerate(leaf_path):
        if not _is_slr(sign, node, sig):
            return leaf_path[:k]
        sign = sign.times(sig[node.op].order_type[i]) if isinstance(node, App) else sign
        node = children(node)[i]
    return leaf_path


def _first_occurrence(ineq: Inequality, p: str) -> tuple[str, Path] | None:
    for side in ("lhs", "rhs"):
        for path, g in walk(_side(ineq, side)):
            if isinstance(g, Var) and g.name == p:
                return side, path
    return None


def _bad_leaf(f: Formula, root: Polarity, p: str, want: Polarity, sig: ExpandedSignature) -> Path | None:
    for path, g, s in signed_walk(f, root, sig):
        if isinstance(g, Var) and g.name == p and s is want:
            return path
    return None


def _displayed(e: Inequality, p: str, eps: Polarity) -> bool:
    if eps is POS:
        return e.rhs == Var(p) and not contains_var(e.lhs, p)
    return e.lhs == Var(p) and not contains_var(e.rhs, p)


def _display_move(e: Inequality, k: int, p: str, eps: Polarity, sig: ExpandedSignature) -> tuple[str, str] | None:
    """Next residuation or split bringing entry ``k`` towards display form.

    Returns ``None`` if the entry needs nothing; raises ``Stuck`` if it
    needs something no rule provides.
    """
    if _displayed(e, p, eps):
        return None
    # occurrences with the eps-sign in -lhs or +rhs block the Ackermann rule
    lpath = _bad_leaf(e.lhs, NEG, p, eps, sig)
    rpath = _bad_leaf(e.rhs, POS, p, eps, sig)
    if lpath is None and rpath is None:
        return None
    if lpath is not None:
        head = e.lhs
        if isinstance(head, Join):
            return "Split", f"S{k}.lhs"
        if (isinstance(head, App) and head.args and sig[head.op].is_base and sig[head.op].family == "F") or (
            isinstance(head, Meet) and sig.distributive
        ):
            return "ResiduateF", f"S{k}.lhs.{lpath[0] + 1}"
        raise Stuck(f"cannot display {p} in {print_inequality(e)}")
    head = e.rhs
    if isinstance(head, Meet):
        return "Split", f"S{k}.rhs"
    if (isinstance(head, App) and head.args and sig[head.op].is_base and sig[head.op].family == "G") or (
        isinstance(head, Join) and sig.distributive
    ):
        return "ResiduateG", f"S{k}.rhs.{rpath[0] + 1}"
    raise Stuck(f"cannot display {p} in {print_inequality(e)}")


def _pick_variable(remaining: list[str], omega, order: list[str]) -> str:
    rem = set(remaining)
    minimal = [v for v in remaining if not any((u, v) in omega for u in rem)]
    if not minimal:
        raise Stuck("dependency order is cyclic")

    def key(v: str):
        succ = sum(1 for w in rem if (v, w) in omega)
        pos = order.index(v) if v in order else len(order)
        return (-succ, pos)

    return min(minimal, key=key)


def run_guided(sys: System, eps: Eps, omega, sig: ExpandedSignature, max_steps: int = DEFAULT_MAX_STEPS) -> _Runner:
    """Drive one system to purity following ``eps`` and ``omega``.

    Variables are handled one at a time, Omega-minimal first.  For each:
    approximate every occurrence left in ``Ineq`` at the top of its maximal
    SLR branch, display every entry of ``S`` by residuation and splitting,
    then apply the Ackermann rule matching ``eps``.
    """
    runner = _Runner(sys, sig, max_steps)
    order = ineq_variables(sys.ineq)
    omega = transitive_closure(omega)
    while True:
        remaining = runner.sys.variables()
        if not remaining:
            return runner
        p = _pick_variable(remaining, omega, order)
        if p not in eps:
            raise Stuck(f"no order type given for {p}")
        while (occ := _first_occurrence(runner.sys.ineq, p)) is not None:
            side, leaf = occ
            f = _side(runner.sys.ineq, side)
            runner.approximate_at(side, _pivot_point(f, leaf, _root_sign(side), sig))
        while True:
            move = None
            for k, e in enumerate(runner.sys.s, 1):
                move = _display_move(e, k, p, eps[p], sig)
                if move is not None:
                    break
            if move is None:
                break
            runner.apply(*move)
        rule = "AckermannRight" if eps[p] is POS else "AckermannLeft"
        try:
            runner.apply(rule, p)
        except RuleError as exc:
            raise Stuck(str(exc)) from None


# ---------------------------------------------------------------- search strategy


_NAME_RE = re.compile(r"[#@][jm]\d+")


def _canonical_key(sys: System) -> str:
    text = format_system(sys)
    mapping: dict[str, str] = {}

    def sub(m: re.Match) -> str:
        tok = m.group(0)
        if tok not in mapping:
            mapping[tok] = f"{tok[:2]}_{len(mapping)}"
        return mapping[tok]

    return _NAME_RE.sub(sub, text)


def _successors(sys: System, sig: ExpandedSignature, counters: dict, pivotal_only: bool):
    """All ``(rule, position, fresh)`` moves applicable to ``sys``."""
    moves = []
    for side in ("lhs", "rhs"):
        f = _side(sys.ineq, side)
        root = _root_sign(side)
        for path, g, s in signed_walk(f, root, sig):
            if not slr_prefix_ok(f, path, root, sig):
                continue
            if isinstance(g, (Nom, Conom)) or not variables(g) or not base_only(g, sig):
                continue
            if pivotal_only and not (is_leaf(g) or not _is_slr(s, g, sig)):
                continue
            prefix = "j" if s is POS else "m"
            moves.append((approximation_rule(side, s), f"ineq.{side}{_path_str(path)}", prefix))
    for k, e in enumerate(sys.s, 1):
        if isinstance(e.lhs, Join):
            moves.append(("Split", f"S{k}.lhs", None))
        if isinstance(e.rhs, Meet):
            moves.append(("Split", f"S{k}.rhs", None))
        for side, family, lattice_node in (("lhs", "F", Meet), ("rhs", "G", Join)):
            head = _side(e, side)
            ok = isinstance(head, App) and head.args and sig[head.op].is_base and sig[head.op].family == family
            ok = ok or (isinstance(head, lattice_node) and sig.distributive)
            if ok:
                if not any(variables(c) for c in children(head)):
                    continue
                rule = "ResiduateF" if side == "lhs" else "ResiduateG"
                for i, c in enumerate(children(head), 1):
                    if variables(c):
                        moves.append((rule, f"S{k}.{side}.{i}", None))
    for p in sys.variables():
        moves.append(("AckermannRight", p, None))
        moves.append(("AckermannLeft", p, None))
    return moves


def run_search(sys: System, sig: ExpandedSignature, max_steps: int = DEFAULT_MAX_STEPS):
    """Breadth-first search for a pure system.

    Phase one only uses pivotal approximations; phase two allows all of
    them.  Returns ``(steps, final, reason)``; ``final`` is ``None`` on
    failure and ``reason`` says whether the frontier ran dry or the budget
    ran out.
    """
    budget = max_steps
    for pivotal_only in (True, False):
        start = (sys, {"j": 1, "m": 1}, [])
        frontier = deque([start])
        seen = {_canonical_key(sys)}
        exhausted = True
        while frontier:
            cur, counters, path = frontier.popleft()
            if cur.is_pure():
                return path, cur, ""
            for rule, position, prefix in _successors(cur, sig, counters, pivotal_only):
                if budget <= 0:
                    exhausted = False
                    break
                budget -= 1
                fresh = None
                new_counters = counters
                if prefix is not None:
                    fresh = fresh_name(cur, prefix, counters[prefix])
                    new_counters = dict(counters)
                    new_counters[prefix] = int(fresh[1:]) + 1
                try:
                    new, pivotal = apply_rule(cur, rule, position, sig, fresh)
                except RuleError:
                    continue
                key = _canonical_key(new)
                if key in seen:
                    continue
                seen.add(key)
                step = TraceStep(rule, position, cur, new, fresh, pivotal)
                frontier.append((new, new_counters, path + [step]))
            if not exhausted:
                break
        if not exhausted:
            return None, None, "budget exceeded"
    return None, None, "no applicable rule"


# ---------------------------------------------------------------- driver


def run(ineq: Inequality, sig: ExpandedSignature, opts: AlbaOptions | None = None) -> AlbaResult:
    opts = opts or AlbaOptions()
    if opts.strategy not in ("guided", "search"):
        raise ValueError(f"unknown strategy {opts.strategy!r}")
    if not (base_only(ineq.lhs, sig) and base_only(ineq.rhs, sig)):
        raise ValueError("ALBA input must be in the base language")
    pieces, pre_steps = preprocess(ineq, sig)
    runs = []
    for piece in pieces:
        runs.append(_run_system(System((), piece), sig, opts))
    return AlbaResult(ineq, pre_steps, runs)


def _run_system(sys: System, sig: ExpandedSignature, opts: AlbaOptions) -> SystemRun:
    reason = ""
    if opts.strategy == "guided":
        witness = None
        piece_vars = ineq_variables(sys.ineq)
        if opts.eps is not None:
            missing = [v for v in piece_vars if v not in opts.eps]
            if missing:
                raise ValueError(f"order type misses variables {missing}")
            omega = transitive_closure(opts.omega or ())
            witness = (omega, {v: opts.eps[v] for v in piece_vars})
        else:
            found = find_inductive(sys.ineq, sig)
            if found is not None:
                witness = found
        if witness is not None:
            omega, eps = witness
            try:
                runner = run_guided(sys, eps, omega, sig, opts.max_steps)
                return SystemRun(sys, runner.sys, runner.steps, True, "guided", eps, omega)
            except Stuck as exc:
                reason = f"guided strategy stuck: {exc}; "
        else:
            reason = "not inductive; "
    steps, final, why = run_search(sys, sig, opts.max_steps)
    if final is None:
        return SystemRun(sys, sys, [], False, "search", reason=reason + why)
    return SystemRun(sys, final, steps, True, "search", reason=reason.rstrip("; "))


def replay(result: AlbaResult, sig: ExpandedSignature) -> bool:
    """Re-execute every recorded step and compare with the recorded states."""
    ineqs: tuple[Inequality, ...] = (result.input,)
    for step in result.preprocess_steps:
        ineqs = _apply_stage1(ineqs, step.rule, step.position, sig)
        if ineqs != step.after:
            return False
    if [r.initial.ineq for r in result.runs] != list(ineqs):
        return False
    for run_ in result.runs:
        cur = run_.initial
        for step in run_.steps:
            cur, _ = apply_rule(cur, step.rule, step.position, sig, step.fresh)
            if cur != step.after:
                return False
        if cur != run_.final:
            return False
    return True


_STEP_RE = re.compile(r"STEP (\d+) (\w+) @(\S+) \| (.*)\Z")
_SYSTEM_RE = re.compile(r"SYSTEM (\d+) \| (.*)\Z")
_NAME_TOKEN_RE = re.compile(r"[#@]([A-Za-z_][A-Za-z0-9_']*)")


def _stage1_state(ineqs: tuple[Inequality, ...]) -> str:
    return "S={} | Ineq=" + " ; ".join(print_inequality(e) for e in ineqs)


def replay_trace(lines: Iterable[str], ineq: Inequality, sig: ExpandedSignature) -> tuple[bool, str]:
    """Re-execute a printed trace from its input inequality.

    Every ``STEP`` line is applied to the current state and the printed
    result must match the line exactly.  Fresh names of approximation steps
    are read off the recorded state.  Lines that are neither ``STEP`` nor
    ``SYSTEM`` lines are ignored.  Returns ``(ok, message)``.
    """
    ineqs: tuple[Inequality, ...] = (ineq,)
    cur: System | None = None
    count = 0
    for raw in lines:
        line = raw.strip()
        sm = _SYSTEM_RE.match(line)
        m = _STEP_RE.match(line)
        try:
            if sm:
                k = int(sm.group(1)) - 1
                if not 0 <= k < len(ineqs):
                    return False, f"{line}: no such system"
                cur = System((), ineqs[k])
                if format_system(cur) != sm.group(2):
                    return False, f"{line}: initial system differs"
                continue
            if not m:
                continue
            count += 1
            rule, position, state = m.group(2), m.group(3), m.group(4)
            if cur is None:
                ineqs = _apply_stage1(ineqs, rule, position, sig)
                got = _stage1_state(ineqs)
            else:
                fresh = None
                if rule in APPROX_RULES:
                    new_names = set(_NAME_TOKEN_RE.findall(state)) - cur.names()
                    if len(new_names) != 1:
                        return False, f"{line}: cannot identify the fresh name"
                    fresh = new_names.pop()
                cur, _ = apply_rule(cur, rule, position, sig, fresh)
                got = format_system(cur)
        except (RuleError, ValueError, IndexError) as exc:
            return False, f"{line}: {exc}"
        if got != state:
            return False, f"{line}: replay gives {got}"
    return True, f"{count} steps replayed"


# ---------------------------------------------------------------- shape check


@dataclass(frozen=True)
class ShapeEntry:
    label: str
    inequality: Inequality
    lhs_closed: bool
    rhs_open: bool

    @property
    def ok(self) -> bool:
        return self.lhs_closed and self.rhs_open


def _shape(f: Formula, sig: ExpandedSignature, closed: bool) -> bool:
    """Closed: nominals and F*-only connectives positive, co-nominals and
    G*-only connectives negative.  Open is the reverse."""
    for _, g, s in signed_walk(f, POS, sig):
        if isinstance(g, Nom):
            want = POS
        elif isinstance(g, Conom):
            want = NEG
        elif isinstance(g, App) and not sig[g.op].is_base:
            want = POS if sig[g.op].family == "F" else NEG
        else:
            continue
        if (s is want) != closed:
            return False
    return True


def is_closed(f: Formula, sig: ExpandedSignature) -> bool:
    return _shape(f, sig, True)


def is_open(f: Formula, sig: ExpandedSignature) -> bool:
    return _shape(f, sig, False)


def shape_check(sys: System, sig: ExpandedSignature) -> list[ShapeEntry]:
    """Shape flags for every non-pure inequality of ``S`` and ``Ineq``."""
    out = []
    for label, e in [(f"S{k}", e) for k, e in enumerate(sys.s, 1)] + [("Ineq", sys.ineq)]:
        if is_pure(e):
            continue
        out.append(ShapeEntry(label, e, is_closed(e.lhs, sig), is_open(e.rhs, sig)))
    return out


# ---------------------------------------------------------------- output simplification


def _isolate(ineq: Inequality, target: Formula, sig: ExpandedSignature) -> Inequality | None:
    """Residuate until ``target`` stands alone on one side, if possible."""
    for _ in range(100):
        if ineq.lhs == target or ineq.rhs == target:
            return ineq
        moved = False
        for side in ("lhs", "rhs"):
            head = _side(ineq, side)
            for i, c in enumerate(children(head)):
                if any(g == target for _, g in walk(c)):
                    try:
                        ineq, _ = residuate(ineq, side, i + 1, sig)
                    except RuleError:
                        return None
                    moved = True
                    break
            if moved:
                break
        if not moved:
            return None
    return None


def _occurs(f: Formula, target: Formula) -> int:
    return sum(1 for _, g in walk(f) if g == target)


def simplify_output(q: QuasiInequality, sig: ExpandedSignature) -> QuasiInequality:
    """Discharge premises ``t <= n`` or ``j <= t`` whose fresh name occurs
    exactly once more, in the conclusion.

    ``forall n (t <= n => t' <= n)`` is equivalent to ``t' <= t`` and
    ``forall j (j <= t => j <= t')`` to ``t <= t'``; the conclusion is first
    residuated so that the name stands alone.  Anything else is left as is.
    """
    premises = list(q.premises)
    concl = q.conclusion
    changed = True
    while changed:
        changed = False
        for k, prem in enumerate(premises):
            if isinstance(prem.rhs, Conom) and _occurs(prem.lhs, prem.rhs) == 0:
                name, t = prem.rhs, prem.lhs
            elif isinstance(prem.lhs, Nom) and _occurs(prem.rhs, prem.lhs) == 0:
                name, t = prem.lhs, prem.rhs
            else:
                continue
            others = premises[:k] + premises[k + 1:]
            if any(_occurs(o.lhs, name) + _occurs(o.rhs, name) for o in others):
                continue
            if _occurs(concl.lhs, name) + _occurs(concl.rhs, name) != 1:
                continue
            iso = _isolate(concl, name, sig)
            if iso is None:
                continue
            if isinstance(name, Conom) and iso.rhs == name:
                new = Inequality(iso.lhs, t)
            elif isinstance(name, Nom) and iso.lhs == name:
                new = Inequality(t, iso.rhs)
            else:
                continue
            premises, concl, changed = others, new, True
            break
    return QuasiInequality(tuple(premises), concl)


NOMINAL_NAMES = ("j", "i", "k", "h", "l")
CONOMINAL_NAMES = ("m", "n", "o", "u", "w")


def canonical_names(q: QuasiInequality) -> QuasiInequality:
    """Rename nominals to j, i, k, ... and co-nominals to m, n, o, ...
    in order of first appearance."""
    fs = [f for e in (*q.premises, q.conclusion) for f in (e.lhs, e.rhs)]
    noms = nominals(*fs)
    conoms = conominals(*fs)

    def names(pool, count, stem):
        if count <= len(pool):
            return list(pool[:count])
        return [f"{stem}{k}" for k in range(1, count + 1)]

    nmap = dict(zip(noms, names(NOMINAL_NAMES, len(noms), "j")))
    cmap = dict(zip(conoms, names(CONOMINAL_NAMES, len(conoms), "m")))

    def ren(e: Inequality) -> Inequality:
        return Inequality(rename(e.lhs, nmap, cmap), rename(e.rhs, nmap, cmap))

    return QuasiInequality(tuple(ren(e) for e in q.premises), ren(q.conclusion))
