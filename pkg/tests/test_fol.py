import itertools

import pytest

import fo_oracle
from goldens import INVOLUTION_PURE
from lealba import alba, fol, oracle
from lealba.fol import X, Y, Z, FOLError, Forall
from lealba.signature import bundled_signature, parse_signature
from lealba.syntax import parse_formula, parse_inequality, parse_quasi

LML = bundled_signature("lml").expand()
CIRC = parse_signature("F circ 2 (1,1)").expand()
FREE = {"x": X, "y": Y, "z": Z, "j": X, "m": Y, "i": Z, "n": Z}


def fo(text, free=FREE):
    return fol.parse_fo(text, free)


def prefix(f):
    vs = []
    while isinstance(f, Forall):
        vs.append(f.var)
        f = f.body
    return vs, f


def same_sentence(ours, expected):
    """Alpha-equivalent after some reordering of the leading universal block."""
    vs, matrix = prefix(expected)
    for perm in itertools.permutations(vs):
        g = matrix
        for v in reversed(perm):
            g = Forall(v, g)
        if fol.alpha_equivalent(ours, g):
            return True
    return False


# -------------------------------------------------------------- RS table rows

# ST_x / ST_y on the LML+ language, one row per connective and side.  The
# two star rows are given with the arrow and distinct bound variables.
RS_ROWS = [
    ("x", "bot", "x != x"),
    ("y", "bot", "y = y"),
    ("x", "top", "x = x"),
    ("y", "top", "y != y"),
    ("x", "p", "P1_p(x)"),
    ("y", "p", "P2_p(y)"),
    ("x", "#j", "forall y:Y. j <= y -> x <= y"),
    ("y", "#j", "j <= y"),
    ("x", "@m", "x <= m"),
    ("y", "@m", "forall x:X. x <= m -> x <= y"),
    ("x", "p \\/ q", "forall y:Y. P2_p(y) & P2_q(y) -> x <= y"),
    ("y", "p \\/ q", "P2_p(y) & P2_q(y)"),
    ("x", "p /\\ q", "P1_p(x) & P1_q(x)"),
    ("y", "p /\\ q", "forall x:X. P1_p(x) & P1_q(x) -> x <= y"),
    ("x", "dia(p)", "forall y:Y. (forall x:X. P1_p(x) -> R_dia(y,x)) -> x <= y"),
    ("y", "dia(p)", "forall x:X. P1_p(x) -> R_dia(y,x)"),
    ("x", "box(p)", "forall y:Y. P2_p(y) -> R_box(x,y)"),
    ("y", "box(p)", "forall x:X. (forall y:Y. P2_p(y) -> R_box(x,y)) -> x <= y"),
    ("x", "ltri(p)", "forall y:Y. (forall y2:Y. P2_p(y2) -> R_ltri(y,y2)) -> x <= y"),
    ("y", "ltri(p)", "forall y2:Y. P2_p(y2) -> R_ltri(y,y2)"),
    ("x", "rtri(p)", "forall x2:X. P1_p(x2) -> R_rtri(x,x2)"),
    ("y", "rtri(p)", "forall x:X. (forall x2:X. P1_p(x2) -> R_rtri(x,x2)) -> x <= y"),
    ("x", "circ(p, q)", "forall y:Y. (forall x1:X. forall x2:X. P1_p(x1) & P1_q(x2) -> R_circ(y,x1,x2)) -> x <= y"),
    ("y", "circ(p, q)", "forall x1:X. forall x2:X. P1_p(x1) & P1_q(x2) -> R_circ(y,x1,x2)"),
    ("x", "star(p, q)", "forall y1:Y. forall y2:Y. P2_p(y1) & P2_q(y2) -> R_star(x,y1,y2)"),
    ("y", "star(p, q)", "forall x:X. (forall y1:Y. forall y2:Y. P2_p(y1) & P2_q(y2) -> R_star(x,y1,y2)) -> x <= y"),
    # residuals: black diamond, black box, black left and right triangles
    ("x", "box_flat_1(p)", "forall y:Y. (forall x:X. P1_p(x) -> R_box^-1(y,x)) -> x <= y"),
    ("y", "box_flat_1(p)", "forall x:X. P1_p(x) -> R_box^-1(y,x)"),
    ("x", "dia_sharp_1(p)", "forall y:Y. P2_p(y) -> R_dia^-1(x,y)"),
    ("y", "dia_sharp_1(p)", "forall x:X. (forall y:Y. P2_p(y) -> R_dia^-1(x,y)) -> x <= y"),
    ("x", "ltri_sharp_1(p)", "forall y:Y. (forall y2:Y. P2_p(y2) -> R_ltri^-1(y,y2)) -> x <= y"),
    ("y", "ltri_sharp_1(p)", "forall y2:Y. P2_p(y2) -> R_ltri^-1(y,y2)"),
    ("x", "rtri_flat_1(p)", "forall x2:X. P1_p(x2) -> R_rtri^-1(x,x2)"),
    ("y", "rtri_flat_1(p)", "forall x:X. (forall x2:X. P1_p(x2) -> R_rtri^-1(x,x2)) -> x <= y"),
    ("x", "circ_sharp_2(p, q)", "forall x1:X. forall y2:Y. P1_p(x1) & P2_q(y2) -> R_circ^-2(x,x1,y2)"),
    ("y", "circ_sharp_2(p, q)",
     "forall x:X. (forall x1:X. forall y2:Y. P1_p(x1) & P2_q(y2) -> R_circ^-2(x,x1,y2)) -> x <= y"),
    ("x", "circ_sharp_1(p, q)", "forall y1:Y. forall x2:X. P2_p(y1) & P1_q(x2) -> R_circ^-1(x,y1,x2)"),
    ("y", "circ_sharp_1(p, q)",
     "forall x:X. (forall y1:Y. forall x2:X. P2_p(y1) & P1_q(x2) -> R_circ^-1(x,y1,x2)) -> x <= y"),
    ("x", "star_flat_2(p, q)",
     "forall y:Y. (forall y1:Y. forall x2:X. P2_p(y1) & P1_q(x2) -> R_star^-2(y,y1,x2)) -> x <= y"),
    ("y", "star_flat_2(p, q)", "forall y1:Y. forall x2:X. P2_p(y1) & P1_q(x2) -> R_star^-2(y,y1,x2)"),
    ("x", "star_flat_1(p, q)",
     "forall y:Y. (forall x1:X. forall y2:Y. P1_p(x1) & P2_q(y2) -> R_star^-1(y,x1,y2)) -> x <= y"),
    ("y", "star_flat_1(p, q)", "forall x1:X. forall y2:Y. P1_p(x1) & P2_q(y2) -> R_star^-1(y,x1,y2)"),
]


@pytest.mark.parametrize("side,formula,expected", RS_ROWS, ids=[f"{s}:{f}" for s, f, _ in RS_ROWS])
def test_rs_table_row(side, formula, expected):
    f = parse_formula(formula, LML)
    st = fol.st_x if side == "x" else fol.st_y
    ours = st(f, LML, allow_variables=True)
    assert fol.alpha_equivalent(ours, fo(expected)), fol.format_fo(fol.canonical(ours))
    assert fol.sort_errors(ours, LML) == []


def test_rs_table_covers_every_lml_connective():
    names = {c.name for c in LML.connectives() if c.name not in ("meet", "join")}
    used = {r[1].split("(")[0] for r in RS_ROWS}
    assert names <= used


def test_rs_nested_example():
    # ST_y of a diamond applied to a nominal, as in the worked p <= dia(p) case
    ours = fol.st_y(parse_formula("dia(#j)", LML), LML)
    expected = fo("forall x1:X. (forall y2:Y. j <= y2 -> x1 <= y2) -> R_dia(y,x1)")
    assert fol.alpha_equivalent(ours, expected)


# -------------------------------------------------------------- sentences

RS_DIA = (
    "forall x:X. forall y:Y. forall i:X. "
    "(forall y1:Y. i <= y1 -> x <= y1) & (forall x1:X. (forall y2:Y. i <= y2 -> x1 <= y2) -> R_dia(y,x1)) "
    "-> x <= y"
)

# the expansion before the bottom clause is dropped
INVOLUTION_RS = (
    "forall x:X. forall y:Y. forall m:Y. "
    "(forall x1:X. forall y2:Y. (forall x3:X. forall y4:Y. x3 <= m & y4 = y4 -> R_circ^-2(x1,x3,y4)) & y2 = y2 "
    "-> R_circ^-2(x,x1,y2)) & (forall x2:X. x2 <= m -> x2 <= y) -> x <= y"
)

# the final line, after using that the bottom clause is trivially true
INVOLUTION_RS_FINAL = (
    "forall x:X. forall y:Y. forall m:Y. "
    "(forall x1:X. (forall x3:X. x3 <= m -> (forall y4:Y. R_circ^-2(x1,x3,y4))) "
    "-> (forall y2:Y. R_circ^-2(x,x1,y2))) & (forall x2:X. x2 <= m -> x2 <= y) -> x <= y"
)

TIRS_DIA = (
    "forall z:Z. forall w:Z. forall i:Z. "
    "(forall z2:Z. z E z2 -> i E z2) & (forall u:Z. R_dia(w,u) -> (exists v:Z. ~(i E v) & u E v)) "
    "-> ~(z E w)"
)


def test_rs_dia_sentence():
    ours = fol.translate(parse_inequality("#i <= dia(#i)", LML), LML, "rs")
    assert same_sentence(ours, fo(RS_DIA, {}))


def test_rs_involution_sentence():
    q = parse_inequality("circ_sharp_2(circ_sharp_2(@m, bot), bot) <= @m", CIRC)
    ours = fol.translate(q, CIRC, "rs")
    assert same_sentence(ours, fo(INVOLUTION_RS, {}))
    assert fol.sort_errors(ours, CIRC) == []


def test_rs_involution_matches_final_line_on_frames():
    ours = fol.translate(parse_inequality("circ_sharp_2(circ_sharp_2(@m, bot), bot) <= @m", CIRC), CIRC, "rs")
    final = fo(INVOLUTION_RS_FINAL, {})
    models = [m for lat in oracle.builtin_lattices()[:4] for m in oracle.enumerate_models(lat, CIRC.base, limit=20)]
    assert len(models) >= 40
    for m in models:
        frame = fo_oracle.rs_frame(m)
        assert fo_oracle.evaluate(ours, frame) == fo_oracle.evaluate(final, frame)


def test_lambek_involution_uses_base_relation():
    lam = bundled_signature("lambek").expand()
    ours = fol.translate(parse_inequality(INVOLUTION_PURE, lam), lam, "rs")
    assert "R_bslash(" in fol.format_fo(ours)
    assert fol.sort_errors(ours, lam) == []


def test_tirs_dia_sentence():
    ours = fol.translate(parse_inequality("#i <= dia(#i)", LML), LML, "tirs")
    assert same_sentence(ours, fo(TIRS_DIA, {}))


def test_top_below_top_is_logically_valid():
    ours = fol.translate(parse_inequality("top <= top", LML), LML, "rs")
    for m in oracle.model_suite(LML.base, count=10):
        assert fo_oracle.evaluate(ours, fo_oracle.rs_frame(m))


# -------------------------------------------------------------- TiRS table rows

TIRS_ROWS = [
    ("+", "bot", "z != z"),
    ("-", "bot", "z = z"),
    ("+", "top", "z = z"),
    ("-", "top", "z != z"),
    ("+", "p", "P_p(z)"),
    ("-", "p", "forall z1:Z. z1 E z -> ~P_p(z1)"),
    ("+", "#i", "forall z1:Z. ~(i E z1) -> ~(z E z1)"),
    ("-", "#i", "forall z1:Z. z1 E z -> ~(forall z2:Z. ~(i E z2) -> ~(z1 E z2))"),
    ("+", "@n", "forall z1:Z. z E z1 -> ~~(z1 E n)"),
    ("-", "@n", "~(z E n)"),
    ("+", "p \\/ q", "forall z1:Z. z E z1 -> ~((forall z2:Z. z2 E z1 -> ~P_p(z2)) & (forall z3:Z. z3 E z1 -> ~P_q(z3)))"),
    ("-", "p \\/ q", "(forall z2:Z. z2 E z -> ~P_p(z2)) & (forall z3:Z. z3 E z -> ~P_q(z3))"),
    ("+", "p /\\ q", "P_p(z) & P_q(z)"),
    ("-", "p /\\ q", "forall z1:Z. z1 E z -> ~(P_p(z1) & P_q(z1))"),
    ("+", "dia(p)", "forall z1:Z. z E z1 -> ~(forall z2:Z. R_dia(z1,z2) -> ~P_p(z2))"),
    ("-", "dia(p)", "forall z1:Z. R_dia(z,z1) -> ~P_p(z1)"),
    ("+", "box(p)", "forall z1:Z. R_box(z,z1) -> ~(forall z2:Z. z2 E z1 -> ~P_p(z2))"),
    ("-", "box(p)", "forall z1:Z. z1 E z -> ~(forall z2:Z. R_box(z1,z2) -> ~(forall z3:Z. z3 E z2 -> ~P_p(z3)))"),
]


@pytest.mark.parametrize("side,formula,expected", TIRS_ROWS, ids=[f"{s}:{f}" for s, f, _ in TIRS_ROWS])
def test_tirs_table_row(side, formula, expected):
    f = parse_formula(formula, LML)
    ours = fol.st_plus(f, LML, allow_variables=True) if side == "+" else fol.st_minus(f, LML, allow_variables=True)
    assert fol.alpha_equivalent(ours, fo(expected)), fol.format_fo(fol.canonical(ours))


def test_tirs_dual_conominal_clause():
    ours = fol.st_minus(parse_formula("@n", LML), LML, conominal_clause="dual")
    assert ours != fol.st_minus(parse_formula("@n", LML), LML)
    assert fol.sort_errors(ours, LML, backend="tirs") == []


def test_tirs_rejects_other_connectives():
    with pytest.raises(FOLError):
        fol.translate(parse_inequality("circ(#i, #j) <= @n", LML), LML, "tirs")
    with pytest.raises(FOLError):
        fol.translate(parse_inequality("ltri(#i) <= @n", LML), LML, "tirs")


def test_non_pure_input_is_rejected():
    with pytest.raises(FOLError, match="not pure"):
        fol.translate(parse_inequality("p <= dia(p)", LML), LML, "rs")
    with pytest.raises(FOLError, match="not pure"):
        fol.translate(parse_inequality("p <= dia(p)", LML), LML, "tirs")
    with pytest.raises(ValueError):
        fol.translate(parse_inequality("#i <= dia(#i)", LML), LML, "kripke")


def test_meet_residuals_have_no_rs_relation():
    dml = bundled_signature("dml").expand()
    with pytest.raises(FOLError):
        fol.translate(parse_inequality("meet_sharp_1(#i, @m) <= @m", dml), dml, "rs")


# -------------------------------------------------------------- agreement with the algebra


def _outputs(sig_name, texts):
    ex = bundled_signature(sig_name).expand()
    out = []
    for t in texts:
        r = alba.run(parse_inequality(t, ex), ex)
        assert r.success
        out.extend(r.quasis)
    return ex, out


AGREEMENT_INPUTS = {
    "lml": ["p <= dia(p)", "box(p) <= p", "dia(box(p)) <= box(dia(p))", "ltri(rtri(p)) <= p",
            "circ(p, q) <= star(dia(p), q)", "dia(p /\\ q) <= dia(p)", "box(p) /\\ q <= box(dia(q))"],
    "lambek": ["bslash(bslash(p, bot), bot) <= p", "circ(p, q) <= circ(q, p)"],
    "lg": ["circ(p, star(q, r)) <= star(circ(p, q), r)"],
}


@pytest.mark.parametrize("sig_name", sorted(AGREEMENT_INPUTS))
def test_rs_translation_agrees_with_validity(sig_name):
    ex, quasis = _outputs(sig_name, AGREEMENT_INPUTS[sig_name])
    suite = oracle.builtin_suite(ex.base, enumerated=30, random_count=20, seed=2)
    for q in quasis:
        sentence = fol.translate(q, ex, "rs")
        assert fol.sort_errors(sentence, ex) == []
        for m in suite:
            assert oracle.valid_quasi(q, m) == fo_oracle.evaluate(sentence, fo_oracle.rs_frame(m)), (q, m.name)


MODAL = parse_signature("F dia 1 (1)\nG box 1 (1)")


def _modal_models():
    return [m for lat in oracle.builtin_lattices() for m in oracle.enumerate_models(lat, MODAL, limit=25)]


@pytest.mark.parametrize("text", [
    "#i <= dia(#i)", "box(dia(#i)) <= dia(#i)", "#i /\\ #j <= dia(#i \\/ #j)", "dia(dia(#i)) <= dia(#i)",
    "#i <= top", "dia(bot) <= bot",
])
def test_tirs_nominal_sentences_agree_with_validity(text):
    ex = MODAL.expand()
    q = parse_inequality(text, ex)
    sentence = fol.translate(q, ex, "tirs")
    assert fol.sort_errors(sentence, ex, backend="tirs") == []
    for m in _modal_models():
        assert oracle.valid(q, m) == fo_oracle.evaluate(sentence, fo_oracle.tirs_graph(m)), m.name


@pytest.mark.parametrize("text", ["#i <= @n", "dia(#i) <= @n => #i <= box(@n)", "box(@n) <= @n", "#i <= dia(box(@n)) \\/ @n"])
def test_tirs_dual_clause_agrees_with_validity(text):
    ex = MODAL.expand()
    q = parse_quasi(text, ex)
    sentence = fol.translate(q, ex, "tirs", conominal_clause="dual")
    for m in _modal_models():
        assert oracle.valid_quasi(q, m) == fo_oracle.evaluate(sentence, fo_oracle.tirs_graph(m)), m.name


def test_tirs_table_clause_disagrees_somewhere():
    ex = MODAL.expand()
    q = parse_inequality("#i <= @n", ex)
    sentence = fol.translate(q, ex, "tirs")
    assert any(oracle.valid(q, m) != fo_oracle.evaluate(sentence, fo_oracle.tirs_graph(m)) for m in _modal_models())


def test_tidy_preserves_truth():
    ex = MODAL.expand()
    for text in ["#i <= dia(#i)", "box(dia(#i)) <= dia(box(@n)) \\/ @n", "#i /\\ dia(#j) <= box(#i)"]:
        q = parse_inequality(text, ex)
        raw = fol.translate_quasi_tirs(q, ex, tidy_output=False)
        tidied = fol.tidy(raw)
        assert raw != tidied
        for m in _modal_models():
            g = fo_oracle.tirs_graph(m)
            assert fo_oracle.evaluate(raw, g) == fo_oracle.evaluate(tidied, g)


# -------------------------------------------------------------- printing


def test_print_parse_round_trip():
    ex, quasis = _outputs("lml", AGREEMENT_INPUTS["lml"])
    sentences = [fol.translate(q, ex, "rs") for q in quasis]
    sentences += [fol.translate(parse_inequality(t, MODAL.expand()), MODAL.expand(), "tirs")
                  for t in ["#i <= dia(#i)", "box(@n) <= dia(#i)"]]
    for s in sentences:
        c = fol.canonical(s)
        assert fol.parse_fo(fol.format_fo(c)) == c


def test_canonical_is_renaming_insensitive():
    a = fo("forall u:X. forall v:Y. u <= v -> R_dia(v,u)", {})
    b = fo("forall x9:X. forall y3:Y. x9 <= y3 -> R_dia(y3,x9)", {})
    c = fo("forall x9:X. forall y3:Y. x9 <= y3 -> R_box(x9,y3)", {})
    assert fol.alpha_equivalent(a, b) and not fol.alpha_equivalent(a, c)


def test_print_format():
    text = fol.format_fo(fol.canonical(fol.translate(parse_inequality("#i <= dia(#i)", LML), LML, "rs")))
    assert text.startswith("forall x1:X. ")
    assert "R_dia(y1,x3)" in text and "->" in text


def test_sort_errors_are_reported():
    bad = fo("forall x:X. forall y:Y. R_dia(x,y)", {})
    assert fol.sort_errors(bad, LML)
    assert fol.sort_errors(fo("forall x:X. R_nothing(x)", {}), LML)


@pytest.mark.parametrize("text", ["forall x:X.", "x <= ", "forall q:Q. q = q", "R_dia(y,x", "x $ y"])
def test_parse_errors(text):
    with pytest.raises(FOLError):
        fol.parse_fo(text)
