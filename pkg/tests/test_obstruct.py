from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fillobs.catalog import evaluate, load_ring, rp_mod2
from fillobs.errors import PreconditionError
from fillobs.gradedring import exterior_algebra, rationalize, sphere, tensor_product
from fillobs.obstruct import (
    FIRES,
    INCONCLUSIVE,
    NO_OBSTRUCTION,
    TupleFamily,
    Verdict,
    cup_map_vanishes,
    enumerate_tuples,
    exceptional_dim_bound,
    holo_check,
    hyphom_check,
    milnor_check,
    min_homotopical_dim_bound,
    smoothability_check,
    stein_check,
)

from catalog_cases import CLOSED
from oracles import brute_cup_nonzero, brute_partitions

DATA = Path(__file__).parent / "data"


def quadric_link():
    return load_ring((DATA / "quadric_link_a2.json").read_text())


# -- tuple enumeration ------------------------------------------------------


def test_enumerate_examples():
    assert list(enumerate_tuples(TupleFamily(1, 3, 3))) == [(1, 1, 1)]
    assert list(enumerate_tuples(TupleFamily(2, 3, 4))) == [
        (1, 1, 1), (1, 2), (1, 1, 1, 1), (1, 1, 2), (2, 2),
    ]
    assert list(enumerate_tuples(TupleFamily(2, 5, 4))) == []


def test_family_validation():
    with pytest.raises(ValueError):
        TupleFamily(0, 1, 3)
    with pytest.raises(ValueError):
        TupleFamily(1, 0, 3)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(1, 9), st.integers(0, 5))
def test_enumeration_matches_nested_loops(max_index, min_sum, span):
    max_sum = min(12, min_sum + span)
    assert list(enumerate_tuples(TupleFamily(max_index, min_sum, max_sum))) == brute_partitions(
        max_index, min_sum, max_sum
    )


# -- cup maps ---------------------------------------------------------------


def test_cup_map_examples():
    w = cup_map_vanishes(exterior_algebra(5), (1, 1, 1))
    assert w is not None and w.factor_names(exterior_algebra(5)) == ["x1", "x2", "x3"]
    assert cup_map_vanishes(rationalize(sphere(3)), (1, 1, 1)) is None
    r = rp_mod2(5)
    w = cup_map_vanishes(r, (1, 1, 1, 1))
    assert w is not None and r.format_class(w.product) == "a^4"


def test_cup_map_bad_index():
    with pytest.raises(ValueError):
        cup_map_vanishes(exterior_algebra(3), (0, 1))
    with pytest.raises(ValueError):
        cup_map_vanishes(exterior_algebra(3), (4,))


def test_cup_map_above_top_degree_vanishes():
    assert cup_map_vanishes(exterior_algebra(3), (2, 2)) is None


def test_witness_is_lexicographically_first():
    r = exterior_algebra(4)
    w = cup_map_vanishes(r, (1, 2))
    assert w.generators == (0, 3)  # x1 . x23, the first nonzero pair
    assert w.describe(r) == "x1*x23 = x123 != 0"


def test_torsion_product_detected():
    r = evaluate("lens(3, 3)")
    w = cup_map_vanishes(r, (2, 2))
    assert w is not None and r.format_class(w.product) == "y^2"
    assert cup_map_vanishes(rationalize(r), (2, 2)) is None


CUP_RINGS = ["torus(4)", "product(torus(3), sphere(2))", "cp(4)", "lens(2, 3)",
             "rp_mod2(5)", "product(cp(2), cp(2))", "product(sphere(2), torus(3))"]


@pytest.mark.parametrize("expr", CUP_RINGS)
def test_cup_map_matches_brute_force(expr):
    r = evaluate(expr)
    for t in enumerate_tuples(TupleFamily(r.top_degree, 1, r.top_degree)):
        assert (cup_map_vanishes(r, t) is not None) == brute_cup_nonzero(r, t), t


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(CUP_RINGS), st.data())
def test_order_independence(expr, data):
    r = evaluate(expr)
    t = data.draw(st.lists(st.integers(1, min(3, r.top_degree)), min_size=1, max_size=4))
    if sum(t) > r.top_degree:
        return
    shuffled = data.draw(st.permutations(t))
    assert (cup_map_vanishes(r, t) is None) == (cup_map_vanishes(r, shuffled) is None)
    assert brute_cup_nonzero(r, list(shuffled)) == (cup_map_vanishes(r, t) is not None)


TORSION_FREE = [e for e in CLOSED if "lens" not in e and "rp_mod2" not in e
                and "rationalize" not in e and "torus(1" not in e[:8]]


@pytest.mark.parametrize("expr", TORSION_FREE)
def test_coefficient_monotonicity(expr):
    r = evaluate(expr)
    q = rationalize(r)
    for t in enumerate_tuples(TupleFamily(min(r.top_degree, 4), 2, min(r.top_degree, 8))):
        if cup_map_vanishes(q, t) is not None:
            assert cup_map_vanishes(r, t) is not None


# -- verdicts ---------------------------------------------------------------


def test_verdict_invariant():
    with pytest.raises(ValueError):
        Verdict(FIRES, "x", "y")


def test_hyphom_examples():
    v = hyphom_check(exterior_algebra(5), 6, 3)
    assert v.status == FIRES and v.witness.tuple == (1, 1, 1, 1)
    for h in (1, 2, 3):
        assert hyphom_check(rationalize(sphere(5)), 6, h).status == INCONCLUSIVE
    v = hyphom_check(rp_mod2(5), 6, 3)
    assert v.fires and v.witness.tuple == (1, 1, 1, 1)


@pytest.mark.parametrize("m,h", [(6, 0), (6, 4), (3, 1)])
def test_hyphom_ranges(m, h):
    with pytest.raises(PreconditionError):
        hyphom_check(exterior_algebra(m - 1), m, h)


def test_hyphom_dimension_precondition():
    with pytest.raises(PreconditionError):
        hyphom_check(exterior_algebra(4), 6, 2)


def test_min_homotopical_bound():
    assert min_homotopical_dim_bound(exterior_algebra(5), 6) == 4
    assert min_homotopical_dim_bound(rationalize(sphere(5)), 6) == 0
    assert min_homotopical_dim_bound(rp_mod2(5), 6) == 4


def test_stein_examples():
    v = stein_check(rp_mod2(5), 3)
    assert v.fires and v.witness.tuple == (1, 1, 1, 1)
    v = stein_check(rationalize(exterior_algebra(7)), 4)
    assert v.fires and v.witness.tuple == (1, 1, 1, 1, 1)
    v = stein_check(rationalize(tensor_product(exterior_algebra(3), sphere(2))), 3)
    assert v.status == INCONCLUSIVE
    assert NO_OBSTRUCTION in v.notes


def test_stein_needs_n_3():
    with pytest.raises(PreconditionError):
        stein_check(exterior_algebra(3), 2)


def test_milnor_examples():
    v = milnor_check(rationalize(exterior_algebra(3)), 2)
    assert v.fires and v.witness.tuple == (1, 1)
    r = rationalize(tensor_product(exterior_algebra(3), sphere(2)))
    assert milnor_check(r, 3).fires
    assert cup_map_vanishes(r, (2, 2)) is not None
    assert milnor_check(rationalize(evaluate("lens(2, 3)")), 3).status == INCONCLUSIVE


def test_milnor_needs_rational_ring():
    with pytest.raises(PreconditionError):
        milnor_check(exterior_algebra(3), 2)


def test_holo_examples():
    v = holo_check(rationalize(exterior_algebra(5)), 3)
    assert v.fires and v.witness.tuple == (1, 1, 1, 1)
    assert holo_check(rationalize(tensor_product(exterior_algebra(3), sphere(2))), 3).status == INCONCLUSIVE
    assert holo_check(rationalize(sphere(5)), 3).status == INCONCLUSIVE


def test_holo_silent_in_dimension_three():
    with pytest.raises(PreconditionError):
        holo_check(rationalize(exterior_algebra(3)), 2)


def test_inconclusive_text():
    v = holo_check(rationalize(sphere(5)), 3)
    assert v.witness is None
    assert any("no obstruction found" in n for n in v.notes)


def test_exceptional_bound_examples():
    assert exceptional_dim_bound(quadric_link(), 3) == 2
    assert exceptional_dim_bound(rationalize(sphere(5)), 3) == 0
    assert exceptional_dim_bound(exterior_algebra(5), 3) == 2


def test_quadric_link_needs_torsion():
    # rationally a homology S^2 x S^3: only u.z = v survives, at h = 1
    q = rationalize(quadric_link())
    assert q.ranks() == [1, 0, 1, 1, 0, 1]
    assert exceptional_dim_bound(q, 3) == 1


def test_smoothability_relabels_stein():
    for r, n in [(rp_mod2(5), 3), (rationalize(exterior_algebra(7)), 4),
                 (rationalize(tensor_product(exterior_algebra(3), sphere(2))), 3)]:
        a, b = stein_check(r, n), smoothability_check(r, n)
        assert a.status == b.status and a.witness == b.witness
        assert a.criterion != b.criterion


BIG_TORI = {"torus(10)", "torus(11)", "torus(12)"}
# mod-2 entries have no rational ring, so they sit out the rational chain
ODD = [
    e for e in CLOSED
    if e not in BIG_TORI and evaluate(e).top_degree in (5, 7, 9) and evaluate(e).coeffs.kind != "Z/m"
]


@pytest.mark.parametrize("expr", ODD)
def test_implication_chain(expr):
    r = evaluate(expr)
    q = r if r.coeffs.kind == "Q" else rationalize(r)
    n = (q.top_degree + 1) // 2
    holo, stein, milnor = holo_check(q, n), stein_check(q, n), milnor_check(q, n)
    if holo.fires:
        assert stein.fires
    if stein.fires:
        assert milnor.fires
