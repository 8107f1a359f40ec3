from fractions import Fraction

import pytest

from bookineq.core import (
    GroundSet,
    LinExpr,
    Polymatroid,
    canonical_form,
    cond_expr,
    elemental_inequalities,
    ingleton_expr,
    pair_expr,
    polymatroid_from_json,
    polymatroid_to_json,
    validate_polymatroid,
    validate_polymatroid_full,
    zhang_yeung_expr,
)

from conftest import load


def test_ground_masks():
    G = GroundSet.of("abcd")
    assert G.mask("ac") == 0b0101
    assert G.label(0b1010) == "bd"
    assert G.parse("abd") == G.mask("abd")
    E = GroundSet(["a", "b", "c_1", "d_1", "c_2"])
    assert E.parse("ac_1c_2") == E.mask(["a", "c_1", "c_2"])
    with pytest.raises(ValueError):
        GroundSet(["a", "a"])


def test_validation_examples(U24, V):
    assert validate_polymatroid(U24).ok
    assert validate_polymatroid(V).ok
    assert validate_polymatroid_full(V).ok
    g = Polymatroid.from_dict("ab", {"a": 1, "b": 1, "ab": 3})
    rep = validate_polymatroid(g)
    assert not rep.ok
    assert min(v.value for v in rep.violations) == -1


def test_elemental_count():
    # n + C(n,2) 2^(n-2) elementals
    assert len(elemental_inequalities("abcd")) == 4 + 6 * 4
    assert len(elemental_inequalities("abc")) == 3 + 3 * 2


def test_expression_values(U24, V):
    G = V.ground
    assert pair_expr(G, "a", "b")(V) == 1
    assert ingleton_expr(G, "a", "b", "c", "d")(V) == -1
    assert ingleton_expr(G, "a", "b", "c", "d")(U24) == 2
    zy = zhang_yeung_expr(G, "a", "b", "c", "d")
    assert zy(U24) == 5
    assert zy(V) == -1
    assert zy(Polymatroid.zero(G)) == 0
    assert pair_expr(G, "ab", "ab").is_zero()


def test_cond_expr_terms():
    G = GroundSet.of("abc")
    e = cond_expr(G, "a", "b", "c")
    assert dict(e.coeffs) == {G.mask("ac"): 1, G.mask("bc"): 1, G.mask("abc"): -1, G.mask("c"): -1}


def test_canonical_form():
    G = GroundSet.of("ab")
    e = LinExpr(G, {G.mask("a"): 2, G.mask("ab"): -4})
    assert canonical_form(e) == LinExpr(G, {G.mask("a"): 1, G.mask("ab"): -2})
    assert canonical_form(-e) != canonical_form(e)
    assert canonical_form(canonical_form(e)) == canonical_form(e)
    assert canonical_form(e * Fraction(3, 7)) == canonical_form(e)


def test_json_round_trip(V):
    assert polymatroid_from_json(polymatroid_to_json(V)) == V
    g = Polymatroid.from_function("abc", lambda m: Fraction(bin(m).count("1"), 3))
    assert polymatroid_from_json(polymatroid_to_json(g)) == g


def test_json_rejects_bad_input():
    with pytest.raises(ValueError):
        polymatroid_from_json('{"ground": ["a"], "rank": {"a": 1, "a": 2}}')
    with pytest.raises(ValueError):
        polymatroid_from_json('{"ground": ["a"], "rank": {"a": 0.5}}')
    with pytest.raises(ValueError):
        polymatroid_from_json('{"ground": ["a"], "rank": {"z": 1}}')


def test_fixture_files(U24, V, free4):
    assert load("U24.json") == U24
    assert load("V.json") == V
    assert load("free.json") == free4
