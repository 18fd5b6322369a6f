"""Matching helpers shared by the test modules."""

from __future__ import annotations

import itertools

from lealba.syntax import (
    Inequality,
    QuasiInequality,
    conominals,
    nominals,
    parse_quasi,
    print_inequality,
    rename,
)


def _formulas(q: QuasiInequality):
    return [f for e in (*q.premises, q.conclusion) for f in (e.lhs, e.rhs)]


def _key(q: QuasiInequality):
    return (tuple(sorted(print_inequality(e) for e in q.premises)), print_inequality(q.conclusion))


def _renamed(q: QuasiInequality, nmap, cmap) -> QuasiInequality:
    def ren(e: Inequality) -> Inequality:
        return Inequality(rename(e.lhs, nmap, cmap), rename(e.rhs, nmap, cmap))

    return QuasiInequality(tuple(ren(e) for e in q.premises), ren(q.conclusion))


def same_up_to_renaming(a: QuasiInequality, b: QuasiInequality) -> bool:
    """Premises compared as multisets; nominals and co-nominals under any bijection."""
    na, ca = nominals(*_formulas(a)), conominals(*_formulas(a))
    nb, cb = nominals(*_formulas(b)), conominals(*_formulas(b))
    if len(na) != len(nb) or len(ca) != len(cb) or len(a.premises) != len(b.premises):
        return False
    target = _key(b)
    for pn in itertools.permutations(nb):
        for pc in itertools.permutations(cb):
            if _key(_renamed(a, dict(zip(na, pn)), dict(zip(ca, pc)))) == target:
                return True
    return False


def as_quasi(text: str, sig) -> QuasiInequality:
    return parse_quasi(text, sig)


def states(run) -> list[QuasiInequality]:
    """Systems after every reduction step of one run."""
    return [step.after.quasi() for step in run.steps]


def match_subsequence(expected: list[QuasiInequality], got: list[QuasiInequality]) -> list[int] | None:
    """Indices (1-based) of ``got`` matching ``expected`` in order, or None."""
    out, k = [], 0
    for want in expected:
        while k < len(got) and not same_up_to_renaming(got[k], want):
            k += 1
        if k == len(got):
            return None
        out.append(k + 1)
        k += 1
    return out


def formula_strategy(sig, max_leaves: int = 12, extended: bool = True, pure: bool = False):
    """Hypothesis strategy over formulas of an expanded signature."""
    from hypothesis import strategies as st

    from lealba.syntax import BOT, TOP, App, Conom, Join, Meet, Nom, Var

    leaves = [st.just(TOP), st.just(BOT)]
    if not pure:
        leaves.append(st.sampled_from(["p", "q", "r"]).map(Var))
    if extended or pure:
        leaves += [st.sampled_from(["j1", "j2"]).map(Nom), st.sampled_from(["m1", "m2"]).map(Conom)]
    conns = [c for c in sig.connectives() if c.arity > 0 and (extended or c.is_base)]

    def grow(kids):
        apps = [
            st.tuples(*[kids] * c.arity).map(lambda args, name=c.name: App(name, tuple(args)))
            for c in conns
        ]
        return st.one_of(
            st.tuples(kids, kids).map(lambda t: Meet(*t)),
            st.tuples(kids, kids).map(lambda t: Join(*t)),
            *apps,
        )

    return st.recursive(st.one_of(*leaves), grow, max_leaves=max_leaves)
