"""Property-based checks with hypothesis."""

from fractions import Fraction

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from bookineq import _hint, _simplex, polyhedra
from bookineq.bookcone import exists_extension
from bookineq.core import (
    LinExpr,
    Polymatroid,
    canonical_form,
    polymatroid_from_json,
    polymatroid_to_json,
    validate_polymatroid,
)
from bookineq.inequalities import ABCD, format_inequality, generate_family, parse_inequality
from bookineq.ops import is_tight, tighten, tighten_all
from bookineq.polyhedra import HCone, ge

fractions = st.fractions(min_value=0, max_value=6, max_denominator=4)


@st.composite
def coverage_polymatroids(draw, ground="abcd"):
    """Weighted coverage functions: always polymatroids, often entropic."""
    atoms = draw(st.integers(1, 6))
    w = draw(st.lists(fractions, min_size=atoms, max_size=atoms))
    sets = draw(st.lists(st.integers(0, 2**atoms - 1), min_size=len(ground), max_size=len(ground)))

    def rank(m):
        u = 0
        for i, s in enumerate(sets):
            if m >> i & 1:
                u |= s
        return sum((w[j] for j in range(atoms) if u >> j & 1), Fraction(0))

    return Polymatroid.from_function(ground, rank)


@st.composite
def polymatroids(draw):
    """Positive combinations of coverage functions and uniform matroids."""
    g = draw(coverage_polymatroids())
    if draw(st.booleans()):
        g = g + Polymatroid.uniform("abcd", draw(st.integers(1, 4))).scale(draw(fractions))
    return g


@st.composite
def exprs(draw):
    terms = draw(st.dictionaries(st.integers(1, 15), st.fractions(-5, 5, max_denominator=3), min_size=1, max_size=6))
    return LinExpr(ABCD, terms)


quick = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@quick
@given(polymatroids())
def test_generated_points_are_polymatroids(g):
    assert validate_polymatroid(g).ok


@quick
@given(polymatroids())
def test_json_round_trip(g):
    assert polymatroid_from_json(polymatroid_to_json(g)) == g


@quick
@given(polymatroids(), st.sampled_from("abcd"))
def test_tighten_idempotent_and_valid(g, x):
    t = tighten(g, x)
    assert validate_polymatroid(t).ok
    assert tighten(t, x) == t
    assert is_tight(tighten_all(g))


@quick
@given(exprs().filter(lambda e: not e.is_zero()))
def test_canonical_form_idempotent(e):
    c = canonical_form(e)
    assert canonical_form(c) == c


@quick
@given(exprs())
def test_format_parse_round_trip(e):
    assert parse_inequality(format_inequality(e)) == e


@quick
@given(polymatroids())
def test_family_holds_whenever_extension_exists(g):
    # an extension with two pages forces both members of the family
    if exists_extension(g, 2).exists:
        assert all(e(g) >= 0 for e in generate_family(2, True))
    else:
        assert any(e(g) < 0 for e in generate_family(2, True))


@st.composite
def small_lps(draw):
    nvars = draw(st.integers(1, 4))
    coeff = st.integers(-3, 3)
    rows = []
    for _ in range(draw(st.integers(1, 5))):
        a = {j: draw(coeff) for j in range(nvars)}
        rows.append((a, draw(st.sampled_from(["<=", ">=", "="])), draw(st.integers(-4, 4))))
    # keep the feasible region bounded
    rows.append(({j: 1 for j in range(nvars)}, "<=", draw(st.integers(1, 5))))
    obj = {j: draw(coeff) for j in range(nvars)}
    return nvars, rows, obj


@settings(max_examples=150, deadline=None)
@given(small_lps())
def test_hinted_lp_agrees_with_exact_simplex(lp):
    nvars, rows, obj = lp
    exact = _simplex.solve(nvars, rows, obj)
    status, res = _hint.solve(nvars, rows, obj)
    if res is not None:
        assert exact.status == "optimal"
        assert res.value == exact.value
    elif status in ("optimal", "infeasible"):
        assert exact.status == status or status == "optimal"


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-2, 2), min_size=3, max_size=3), min_size=1, max_size=5), st.lists(st.integers(-2, 2), min_size=3, max_size=3))
def test_implication_with_and_without_hints(rows, target):
    coords = ("x", "y", "z")
    cone = HCone(coords, tuple(ge(dict(zip(coords, r))) for r in rows), frozenset(coords))
    t = dict(zip(coords, target))
    hinted = bool(polyhedra.is_implied(t, cone))
    polyhedra.FLOAT_HINTS = False
    try:
        exact = bool(polyhedra.is_implied(t, cone))
    finally:
        polyhedra.FLOAT_HINTS = True
    assert hinted == exact
