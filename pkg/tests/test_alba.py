import dataclasses
import re

import pytest

from goldens import (
    DML_FORM, GRISHIN, GRISHIN_IA_PURE, GRISHIN_IA_SYSTEMS, INVOLUTION, INVOLUTION_PURE,
    INVOLUTION_SYSTEMS, PHI1, PHI1_SYSTEMS, PHI3, PHI3_SYSTEMS, PHI4, PHI4_RTRI,
)
from helpers import match_subsequence, same_up_to_renaming, states
from lealba import alba, gentree, oracle
from lealba.alba import AlbaOptions, RuleError, System
from lealba.signature import bundled_signature
from lealba.syntax import BOT, Inequality, is_pure, parse_inequality, parse_quasi

SIGS = {n: bundled_signature(n).expand() for n in ("lml", "lambek", "lg", "dml")}
LML, LAMBEK, LG = SIGS["lml"], SIGS["lambek"], SIGS["lg"]
LML_D = bundled_signature("lml").with_mode("distributive").expand()


def ineq(text, sig):
    return parse_inequality(text, sig, allow_extended=False)


def quasi(text, sig):
    return parse_quasi(text, sig)


def system(text, sig):
    q = quasi(text, sig)
    return System(q.premises, q.conclusion)


GRISHIN_OPTS = AlbaOptions(eps=gentree.parse_eps("p:1,q:d,r:1"), omega=gentree.parse_omega("q<r"))

WORKED = [
    ("involution", INVOLUTION, LAMBEK, None, INVOLUTION_SYSTEMS),
    ("grishin-ia", GRISHIN["I a"], LG, GRISHIN_OPTS, GRISHIN_IA_SYSTEMS),
    ("phi1", PHI1, LML, None, PHI1_SYSTEMS),
    ("phi3", PHI3, LML, None, PHI3_SYSTEMS),
]


@pytest.mark.parametrize("name,text,sig,opts,expected", WORKED, ids=[w[0] for w in WORKED])
def test_worked_runs_pass_through_expected_systems(name, text, sig, opts, expected):
    result = alba.run(ineq(text, sig), sig, opts)
    assert result.success and len(result.runs) == 1
    got = states(result.runs[0])
    want = [quasi(t, sig) for t in expected]
    assert match_subsequence(want, got) is not None
    assert same_up_to_renaming(result.quasis[0], want[-1])


def test_involution_output():
    result = alba.run(ineq(INVOLUTION, LAMBEK), LAMBEK)
    assert [s.rule for s in result.runs[0].steps] == ["ApproxLPos", "ApproxRNeg", "AckermannLeft"]
    simple = alba.simplify_output(result.quasis[0], LAMBEK)
    assert same_up_to_renaming(simple, quasi(INVOLUTION_PURE, LAMBEK))


def test_grishin_simplified():
    result = alba.run(ineq(GRISHIN["I a"], LG), LG, GRISHIN_OPTS)
    simple = alba.canonical_names(alba.simplify_output(result.quasis[0], LG))
    assert same_up_to_renaming(simple, quasi(GRISHIN_IA_PURE, LG))


@pytest.mark.parametrize("text", [PHI4, PHI4_RTRI])
def test_phi4_fails(text):
    result = alba.run(ineq(text, LML), LML)
    assert not result.success
    assert result.quasis == []
    assert "not inductive" in result.runs[0].reason
    assert "no applicable rule" in result.runs[0].reason
    assert not result.canonical


def test_fusion_free_form_lattice_vs_distributive():
    lat = bundled_signature("lml").expand()
    assert not alba.run(ineq(DML_FORM, lat), lat).success
    result = alba.run(ineq(DML_FORM, LML_D), LML_D)
    assert result.success and all(r.final.is_pure() for r in result.runs)


# ---- preprocessing


def test_preprocess_uniform_negative():
    out, _ = alba.preprocess(ineq("bot <= p", LML), LML)
    assert out == [Inequality(BOT, BOT)]


def test_preprocess_distributes_then_splits():
    ctx = "star(p, ltri(p)) \\/ star(q, ltri(q))"
    out, steps = alba.preprocess(ineq(f"dia(p \\/ q) <= {ctx}", LML), LML)
    assert out == [ineq(f"dia(p) <= {ctx}", LML), ineq(f"dia(q) <= {ctx}", LML)]
    assert [s.rule for s in steps] == ["Distribute", "Split"]


def test_preprocess_leaves_phi1():
    i = ineq(PHI1, LML)
    out, steps = alba.preprocess(i, LML)
    assert out == [i] and steps == []


def test_preprocess_substitutes_top_for_positive():
    out, _ = alba.preprocess(ineq("p <= dia(q) \\/ q", LML), LML)
    # p goes to top, q to bottom, then the constants are absorbed
    assert out == [ineq("top <= bot", LML)]


# ---- single rules


def test_approximation_first_step():
    sys = System((), ineq(PHI1, LML))
    new, rule, pivotal = alba.approximate(sys, "lhs", (0, 0), "j1", LML)
    assert rule == "ApproxLPos" and pivotal
    assert same_up_to_renaming(new.quasi(), quasi(PHI1_SYSTEMS[0], LML))


def test_approximation_right_negative():
    sys = system(PHI1_SYSTEMS[1], LML)
    new, rule, _ = alba.approximate(sys, "rhs", (0,), "m1", LML)
    assert rule == "ApproxRNeg"
    assert same_up_to_renaming(new.quasi(), quasi(PHI1_SYSTEMS[2], LML))


def test_approximation_needs_slr_branch():
    sys = System((), ineq("box(dia(p)) <= q", LML))
    with pytest.raises(RuleError):
        alba.approximate(sys, "lhs", (0,), "j1", LML)


def test_approximation_rejects_stale_name():
    sys = system("#j1 <= box(p) => circ(#j1, dia(q)) <= q", LML)
    with pytest.raises(RuleError):
        alba.approximate(sys, "lhs", (1,), "j1", LML)


def test_whole_side_approximation():
    sys = System((), ineq("box(p) <= dia(p)", LML))
    s1, _, _ = alba.approximate(sys, "lhs", (), "j1", LML)
    s2, _, _ = alba.approximate(s1, "rhs", (), "m1", LML)
    assert s2.quasi() == quasi("#j1 <= box(p) & dia(p) <= @m1 => #j1 <= @m1", LML)


@pytest.mark.parametrize(
    "entry,side,coord,want",
    [
        ("#j1 <= box(p1)", "rhs", 1, "box_flat_1(#j1) <= p1"),
        ("ltri(p1) <= @m1", "lhs", 1, "ltri_sharp_1(@m1) <= p1"),
        ("dia(p) <= @m", "lhs", 1, "p <= dia_sharp_1(@m)"),
    ],
)
def test_residuation_lml(entry, side, coord, want):
    e = parse_inequality(entry, LML)
    assert alba.residuate(e, side, coord, LML)[0] == parse_inequality(want, LML)


def test_residuation_fission():
    e = parse_inequality("#j <= star(@m, r)", LG)
    assert alba.residuate(e, "rhs", 2, LG)[0] == parse_inequality("star_flat_2(@m, #j) <= r", LG)


def test_residuation_head_mismatch():
    with pytest.raises(RuleError):
        alba.residuate(parse_inequality("#j <= dia(p)", LML), "rhs", 1, LML)


def test_splitting():
    e = parse_inequality("ltri(box(p /\\ r)) \\/ dia(p) <= @m", LML)
    a, b = alba.split_entry(e, "lhs")
    assert a == parse_inequality("ltri(box(p /\\ r)) <= @m", LML)
    assert b == parse_inequality("dia(p) <= @m", LML)
    a, b = alba.split_entry(parse_inequality("#j <= box(p) /\\ dia(q)", LML), "rhs")
    assert (a.rhs, b.rhs) == (parse_inequality("p <= box(p)", LML).rhs, parse_inequality("p <= dia(q)", LML).rhs)
    with pytest.raises(RuleError):
        alba.split_entry(parse_inequality("#j <= box(p)", LML), "rhs")


def test_ackermann_examples():
    s = system(INVOLUTION_SYSTEMS[0], LAMBEK)
    assert alba.ackermann(s, "p", "left", LAMBEK).quasi() == quasi(INVOLUTION_SYSTEMS[1], LAMBEK)
    s = system(PHI1_SYSTEMS[3], LML)
    assert same_up_to_renaming(alba.ackermann(s, "p1", "right", LML).quasi(), quasi(PHI1_SYSTEMS[4], LML))
    s = system("#j <= p & p <= @m => #j <= @m", LML)
    assert alba.ackermann(s, "p", "right", LML).quasi() == quasi("#j <= @m => #j <= @m", LML)


def test_ackermann_empty_family_uses_bottom():
    s = system("dia(p) <= @m => #j <= @m", LML)
    assert alba.ackermann(s, "p", "right", LML).s == (parse_inequality("dia(bot) <= @m", LML),)


def test_ackermann_side_conditions():
    with pytest.raises(RuleError, match="wrong polarity"):
        alba.ackermann(system("#j <= p & @m <= box(p) => #j <= @m", LML), "p", "right", LML)
    with pytest.raises(RuleError, match="occurs in Ineq"):
        alba.ackermann(system("#j <= p => #j <= p", LML), "p", "right", LML)


# ---- traces, replay and shape


def _all_runs():
    yield alba.run(ineq(INVOLUTION, LAMBEK), LAMBEK), LAMBEK
    yield alba.run(ineq(GRISHIN["I a"], LG), LG, GRISHIN_OPTS), LG
    for t in (PHI1, PHI3):
        yield alba.run(ineq(t, LML), LML), LML
    for t in GRISHIN.values():
        yield alba.run(ineq(t, LG), LG), LG
    yield alba.run(ineq(DML_FORM, LML_D), LML_D), LML_D


def test_replay_and_trace_replay():
    for result, sig in _all_runs():
        assert result.success
        assert alba.replay(result, sig)
        ok, msg = alba.replay_trace(result.trace_lines(), result.input, sig)
        assert ok, msg


def test_trace_replay_detects_tampering():
    result = alba.run(ineq(PHI1, LML), LML)
    lines = result.trace_lines()
    bad = [re.sub(r"box_flat_1\(#j1\)", "dia(#j1)", line) for line in lines]
    ok, msg = alba.replay_trace(bad, result.input, LML)
    assert not ok and "replay gives" in msg
    swapped = [line.replace("ResiduateF", "ResiduateG") for line in lines]
    assert not alba.replay_trace(swapped, result.input, LML)[0]


def test_trace_format():
    lines = alba.run(ineq(INVOLUTION, LAMBEK), LAMBEK).trace_lines()
    step = re.compile(r"STEP \d+ \w+ @\S+ \| S=\{.*\} \| Ineq=.+\Z")
    assert lines[0].startswith("SYSTEM 1 | ")
    assert all(step.match(line) for line in lines[1:])


def test_success_outputs_are_pure_and_names_fresh():
    for result, _ in _all_runs():
        for q in result.quasis:
            assert is_pure(q)
        for run in result.runs:
            introduced = [s.fresh for s in run.steps if s.fresh]
            assert len(introduced) == len(set(introduced))


def test_shape_preserved_at_every_step():
    for result, sig in _all_runs():
        assert result.pivotal
        for run in result.runs:
            for step in run.steps:
                bad = [e for e in alba.shape_check(step.after, sig) if not e.ok]
                assert not bad, (step.rule, bad)


def test_shape_examples():
    e = parse_quasi("#j2 <= box(ltri(box_flat_1(#j1) \\/ ltri_sharp_1(@m1))) => #j1 <= @m1", LML)
    flagged = alba.shape_check(System(e.premises, e.conclusion), LML)
    assert flagged == []  # pure systems are skipped
    s = System((parse_inequality("#j2 <= box(ltri(box_flat_1(#j1) \\/ ltri_sharp_1(@m1) \\/ p))", LML),),
               parse_inequality("top <= bot", LML))
    (entry,) = alba.shape_check(s, LML)
    assert entry.lhs_closed and entry.rhs_open
    (entry,) = alba.shape_check(System((parse_inequality("@m <= p", LML),), parse_inequality("top <= bot", LML)), LML)
    assert not entry.lhs_closed
    assert alba.is_closed(parse_inequality("#j <= p", LML).lhs, LML)
    assert alba.is_open(parse_inequality("p <= box(@m)", LML).rhs, LML)


def test_canonical_certificate_requires_pivotal():
    result = alba.run(ineq(PHI1, LML), LML)
    assert result.canonical
    result.runs[0].steps[0] = dataclasses.replace(result.runs[0].steps[0], pivotal=False)
    assert not result.canonical


def test_search_strategy_also_succeeds():
    result = alba.run(ineq(INVOLUTION, LAMBEK), LAMBEK, AlbaOptions(strategy="search"))
    assert result.success and result.runs[0].strategy == "search"
    assert alba.replay(result, LAMBEK)


def test_budget_exhaustion_is_reported():
    result = alba.run(ineq(PHI4, LML), LML, AlbaOptions(max_steps=1))
    assert not result.success
    assert "budget" in result.runs[0].reason


def test_options_validation():
    with pytest.raises(ValueError):
        alba.run(ineq(INVOLUTION, LAMBEK), LAMBEK, AlbaOptions(strategy="magic"))
    with pytest.raises(ValueError):
        alba.run(parse_inequality("#j <= p", LML), LML)
    with pytest.raises(ValueError):
        alba.run(ineq(PHI4, LML), LML, AlbaOptions(eps=gentree.parse_eps("p:1")))


def test_simplify_leaves_unmatched_alone():
    q = quasi("#j <= dia(#i) & #i <= box(#j) => #j <= box(#i)", LML)
    assert alba.simplify_output(q, LML) == q


def test_canonical_names():
    q = quasi("#j7 <= box(@m3) => #j7 <= @m3", LML)
    assert alba.canonical_names(q) == quasi("#j <= box(@m) => #j <= @m", LML)


def _states_of(result):
    for run in result.runs:
        yield run.initial.quasi()
        for step in run.steps:
            yield step.after.quasi()


def test_each_step_preserves_validity():
    """Every reduction step keeps the system equivalent on finite models."""
    for result, sig in _all_runs():
        models = oracle.builtin_suite(sig.base, enumerated=12, random_count=8, seed=3)
        for m in models:
            for run in result.runs:
                seq = [run.initial.quasi()] + [s.after.quasi() for s in run.steps]
                verdicts = {oracle.valid_quasi(q, m) for q in seq}
                assert len(verdicts) == 1, (m.name, result.input)
