import json
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fillobs.catalog import (
    FORMAT,
    RingExpr,
    evaluate,
    load_ring,
    mentions,
    mod_p_ring,
    parse,
    parse_class,
    read_manifold,
    render,
    serialize,
)
from fillobs.errors import (
    ArityError,
    AxiomViolation,
    InputError,
    ParamRange,
    ParseError,
    SchemaError,
    TorsionKunneth,
    UnbalancedParens,
    UnexpectedToken,
    UnknownConstructor,
)
from fillobs.gradedring import multiply, validate
from fillobs.obstruct import hyphom_check, stein_check

from catalog_cases import LENS, PRODUCTS, PROJECTIVE, ROUND_TRIP, TORI

DATA = Path(__file__).parent / "data"


# -- parsing ------------------------------------------------------------------


def test_parse_product():
    e = parse("product(torus(3), sphere(2))")
    assert e == RingExpr("product", (RingExpr("torus", (3,)), RingExpr("sphere", (2,))))
    assert render(e) == "product(torus(3), sphere(2))"


def test_parse_is_whitespace_insensitive():
    assert render(parse("  product( torus(3) ,sphere( 2 ) ) ")) == "product(torus(3), sphere(2))"
    assert parse("point") == parse("point()")


def test_offsets_are_recorded():
    e = parse("product(torus(3), sphere(2))")
    assert e.args[1].offset == 18


@pytest.mark.parametrize(
    "text,error,offset",
    [
        ("torus(", UnbalancedParens, 6),
        ("cp(1)", ParamRange, 3),
        ("mod(torus(3), 2)", UnknownConstructor, 0),
        ("torus(3))", UnbalancedParens, 8),
        ("torus(3, 4)", ArityError, 0),
        ("lens(2)", ArityError, 0),
        ("product(torus(3), 2)", ParamRange, 18),
        ("rationalize(3)", ParamRange, 12),
        ("torus(cp(2))", ParamRange, 6),
        ("Torus(3)", UnexpectedToken, 0),
        ("", UnexpectedToken, 0),
        ("torus(13)", ParamRange, 6),
        ("torus(0)", ParamRange, 6),
        ("sphere(0)", ParamRange, 7),
        ("rp_mod2(4)", ParamRange, 8),
        ("lens(1, 3)", ParamRange, 5),
        ("lens(2, 1)", ParamRange, 8),
        ("truncpoly(3, 2)", ParamRange, 10),
        ("truncpoly(4, 1)", ParamRange, 13),
        ("torus(3) torus", UnexpectedToken, 9),
        ("torus(3;)", UnexpectedToken, 7),
        ("product(torus(3), sphere(2)", UnbalancedParens, 27),
        ("klein(2)", UnknownConstructor, 0),
    ],
)
def test_parse_errors(text, error, offset):
    with pytest.raises(error) as info:
        parse(text)
    assert info.value.offset == offset
    assert f"(offset {offset})" in str(info.value)


def test_offsets_count_bytes():
    # the non-ASCII space is two bytes in UTF-8
    with pytest.raises(ParseError) as info:
        parse("torus(3) é")
    assert info.value.offset == len("torus(3) ".encode())


def test_mod_is_rejected_with_hint():
    with pytest.raises(UnknownConstructor, match="rp_mod2"):
        parse("mod(torus(3), 2)")


ATOMS = st.one_of(
    st.integers(1, 12).map(lambda n: RingExpr("torus", (n,))),
    st.integers(1, 9).map(lambda d: RingExpr("sphere", (d,))),
    st.integers(2, 6).map(lambda n: RingExpr("cp", (n,))),
    st.tuples(st.sampled_from([2, 4, 6]), st.integers(2, 4)).map(lambda t: RingExpr("truncpoly", t)),
    st.sampled_from([1, 3, 5, 7]).map(lambda d: RingExpr("rp_mod2", (d,))),
    st.tuples(st.integers(2, 7), st.integers(2, 5)).map(lambda t: RingExpr("lens", t)),
    st.just(RingExpr("point", ())),
)
EXPRS = st.recursive(
    ATOMS,
    lambda inner: st.one_of(
        st.tuples(inner, inner).map(lambda t: RingExpr("product", t)),
        inner.map(lambda e: RingExpr("rationalize", (e,))),
    ),
    max_leaves=6,
)


def spaced(text: str, data) -> str:
    out = []
    for ch in text:
        if ch in "(),":
            out.append(" " * data.draw(st.integers(0, 2)))
        out.append(ch)
    return "".join(out).replace(", ", ",")


@settings(max_examples=200, deadline=None)
@given(EXPRS, st.data())
def test_render_parse_round_trip(e, data):
    text = render(e)
    assert parse(text) == e
    assert render(parse(text)) == text
    assert parse(spaced(text, data)) == e


# -- evaluation -----------------------------------------------------------------


def groups(r):
    return [str(g) for g in r.groups]


def test_eval_examples():
    assert evaluate("torus(5)").ranks() == [1, 5, 10, 10, 5, 1]
    assert groups(evaluate("lens(2, 3)")) == ["Z", "0", "Z/2", "0", "Z/2", "Z"]
    r = evaluate("product(torus(3), sphere(2))")
    assert r.top_degree == 5 and r.ranks()[4] == 3


@pytest.mark.parametrize("n", range(2, 8))
def test_cp_dimension(n):
    r = evaluate(f"cp({n})")
    assert r.top_degree == 2 * n - 2
    assert r.ranks() == [1 if d % 2 == 0 else 0 for d in range(2 * n - 1)]


def test_rp_mod2():
    r = evaluate("rp_mod2(5)")
    assert r.top_degree == 5 and str(r.coeffs) == "Z/2"
    a = r.generator(1, 0)
    p = a
    for d in range(2, 6):
        p = multiply(r, p, a)
        assert p.coords == (1,)
    assert r.names[5] == ("a^5",)


@pytest.mark.parametrize("expr", LENS)
def test_lens_structure(expr):
    r = evaluate(expr)
    a, n = map(int, expr[5:-1].split(","))
    assert r.top_degree == 2 * n - 1
    for d in range(1, 2 * n - 1):
        assert str(r.groups[d]) == (f"Z/{a}" if d % 2 == 0 else "0")
    y = r.generator(2, 0)
    p = y
    for i in range(2, n):
        p = multiply(r, p, y)
        assert r.format_class(p) == f"y^{i}"
    q = rationalize_ranks(r)
    assert q == [1] + [0] * (2 * n - 2) + [1]


def rationalize_ranks(r):
    return evaluate(f"rationalize({r.label})").ranks()


def test_product_with_torsion_over_z():
    with pytest.raises(TorsionKunneth):
        evaluate("product(lens(2, 2), lens(2, 2))")


@pytest.mark.parametrize("pair", [("torus(3)", "sphere(2)"), ("cp(2)", "cp(3)"), ("torus(2)", "lens(3, 2)"),
                                  ("sphere(3)", "sphere(5)"), ("rp_mod2(3)", "rp_mod2(1)")])
def test_product_symmetry(pair):
    a, b = pair
    r1 = evaluate(f"product({a}, {b})")
    r2 = evaluate(f"product({b}, {a})")
    assert all(g.isomorphic(h) for g, h in zip(r1.groups, r2.groups))
    D = r1.top_degree
    m = D + 1
    for h in range(1, m - 2):
        v1, v2 = hyphom_check(r1, m, h), hyphom_check(r2, m, h)
        assert (v1.status, v1.witness and v1.witness.tuple) == (v2.status, v2.witness and v2.witness.tuple)


def test_mentions():
    e = parse("product(rationalize(lens(2, 3)), torus(1))")
    assert mentions(e, "lens") and mentions(e, "torus") and not mentions(e, "cp")


def test_mod_p_ring():
    assert mod_p_ring(parse("rp_mod2(5)"), 2) is evaluate("rp_mod2(5)")
    lens_mod2 = mod_p_ring(parse("lens(2, 3)"), 2)
    assert lens_mod2.label == "lens(2, 3) mod 2"
    assert lens_mod2.mult == evaluate("rp_mod2(5)").mult
    assert mod_p_ring(parse("lens(2, 3)"), 3) is None
    assert mod_p_ring(parse("lens(3, 3)"), 3) is None
    t = mod_p_ring(parse("torus(3)"), 5)
    assert str(t.coeffs) == "Z/5" and t.ranks() == evaluate("torus(3)").ranks()
    assert mod_p_ring(parse("rationalize(torus(3))"), 2) is None


# -- classes ----------------------------------------------------------------------


def test_parse_class():
    r = evaluate("product(cp(2), cp(2))")
    assert parse_class(r, 2, "-2*a-2*b").coords == (-2, -2)
    assert parse_class(r, 2, " a - 3 * b ").coords == (1, -3)
    assert parse_class(r, 2, "0").coords == (0, 0)
    t = evaluate("torus(4)")
    assert parse_class(t, 2, "2*x12").coords == (2, 0, 0, 0, 0, 0)
    assert parse_class(t, 2, "x12+x34 + x12").coords[0] == 2


@pytest.mark.parametrize("text,offset", [("2*z", 2), ("a b", 2), ("", 0), ("2*", 2), ("a+*b", 2)])
def test_parse_class_errors(text, offset):
    r = evaluate("product(cp(2), cp(2))")
    with pytest.raises(ParseError) as info:
        parse_class(r, 2, text)
    assert info.value.offset == offset


def test_parse_class_degree_range():
    with pytest.raises(InputError):
        parse_class(evaluate("cp(2)"), 3, "x")


# -- documents ----------------------------------------------------------------------


def doc_of(expr):
    return json.loads(serialize(evaluate(expr)))


@pytest.mark.parametrize("expr", ROUND_TRIP)
def test_round_trip(expr):
    r = evaluate(expr)
    text = serialize(r)
    back = load_ring(text)
    assert serialize(back) == text
    assert all(g.isomorphic(h) for g, h in zip(r.groups, back.groups))
    assert back.mult == r.mult


def test_serialize_shape():
    text = serialize(evaluate("cp(3)"))
    doc = json.loads(text)
    assert doc["format"] == FORMAT
    assert list(doc) == ["format", "label", "coefficients", "top_degree", "degrees", "products"]
    keys = [(e["p"], e["q"], e["i"], e["j"]) for e in doc["products"]]
    assert keys == sorted(keys)
    assert text.endswith("}\n")


def test_hand_written_document():
    r = load_ring((DATA / "quadric_link_a2.json").read_text())
    assert validate(r) == []
    assert [str(g) for g in r.groups] == ["Z", "0", "Z + Z/2", "Z", "Z/2", "Z"]


def test_missing_field():
    d = doc_of("cp(2)")
    del d["top_degree"]
    with pytest.raises(SchemaError, match="top_degree"):
        load_ring(d)


def test_ragged_relations():
    d = doc_of("lens(3, 2)")
    d["degrees"][2]["relations"] = [[3, 0]]
    with pytest.raises(SchemaError):
        load_ring(d)


@pytest.mark.parametrize(
    "patch",
    [
        lambda d: d.update(format="other/1"),
        lambda d: d.update(coefficients="R"),
        lambda d: d.update(top_degree=-1),
        lambda d: d["degrees"].pop(),
        lambda d: d["degrees"][2].update(generators=["x", "x"]),
        lambda d: d["degrees"][0].update(generators=[]),
        lambda d: d["products"].append(dict(d["products"][0])),
        lambda d: d["products"][0].update(p=9),
        lambda d: d["products"][0].update(value=[[5, 1]]),
        lambda d: d["products"][0].update(value=[1]),
        lambda d: d["products"][0].update(i="0"),
        lambda d: d.update(label=3),
    ],
)
def test_schema_errors(patch):
    d = doc_of("cp(3)")
    patch(d)
    with pytest.raises(SchemaError):
        load_ring(d)


def test_not_json():
    with pytest.raises(SchemaError):
        load_ring("{not json")


def test_associativity_violation():
    d = doc_of("cp(4)")
    for e in d["products"]:
        if (e["p"], e["q"]) == (2, 4):
            e["value"] = [[0, 2]]
    with pytest.raises(AxiomViolation) as info:
        load_ring(d)
    text = str(info.value)
    assert "associativity fails at (H^2[0], H^2[0], H^2[0])" in text


def test_unchecked_load_skips_axioms():
    d = doc_of("cp(4)")
    for e in d["products"]:
        if (e["p"], e["q"]) == (2, 4):
            e["value"] = [[0, 2]]
    r = load_ring(d, check=False)
    assert validate(r)


def test_read_manifold(tmp_path):
    r, e = read_manifold("torus(3)")
    assert render(e) == "torus(3)" and r.ranks() == [1, 3, 3, 1]
    f = tmp_path / "ring.json"
    f.write_text(serialize(evaluate("cp(3)")))
    r2, e2 = read_manifold(f"@{f}")
    assert e2 is None and r2.label == "cp(3)"
    with pytest.raises(InputError):
        read_manifold(f"@{tmp_path / 'missing.json'}")


@pytest.mark.parametrize("expr", TORI[:6] + PROJECTIVE[:4] + PRODUCTS[:6])
def test_verdicts_survive_round_trip(expr):
    r = evaluate(expr)
    back = load_ring(serialize(r))
    D = r.top_degree
    if D % 2 == 1 and D >= 5:
        n = (D + 1) // 2
        a, b = stein_check(r, n), stein_check(back, n)
        assert a == b
