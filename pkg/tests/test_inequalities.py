import itertools
from fractions import Fraction

import pytest

from bookineq.core import Polymatroid, canonical_form, cond_expr, ingleton_expr, zhang_yeung_expr
from bookineq.inequalities import (
    ABCD,
    C_expr,
    D_expr,
    IdealSet,
    book_ineq_A,
    book_ineq_B,
    check_against,
    coeff_vector,
    combination_certificate,
    enumerate_ideals,
    export_family,
    family_members,
    format_inequality,
    generate_family,
    ineq_from_triple,
    parse_family,
    parse_ideal,
    parse_inequality,
    plot_csv,
    plot_data,
    remove_redundant,
    t_set,
    transpose,
    u_set,
    v_set,
)


def brute_force_ideal_count(n):
    pts = [(k, l) for k in range(n - 1) for l in range(n - 1) if k + l <= n - 2]
    count = 0
    for r in range(1, len(pts) + 1):
        for sub in itertools.combinations(pts, r):
            S = set(sub)
            if all((k - 1, l) in S for k, l in S if k) and all((k, l - 1) in S for k, l in S if l):
                count += 1
    return count


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_ideal_counts_brute_force(n):
    assert len(enumerate_ideals(n)) == brute_force_ideal_count(n)


def test_ideal_counts_small():
    assert [len(enumerate_ideals(n)) for n in (2, 3, 4)] == [1, 4, 13]
    assert enumerate_ideals(2)[0].points == frozenset({(0, 0)})


def test_ideal_enumeration_is_stable_and_distinct():
    a = enumerate_ideals(5)
    assert [s.key() for s in a] == [s.key() for s in enumerate_ideals(5)]
    assert len({s.points for s in a}) == len(a)


def test_ideal_validation():
    with pytest.raises(ValueError):
        IdealSet([(1, 0)], 4)  # not downward closed
    with pytest.raises(ValueError):
        IdealSet([(0, 0), (0, 1), (0, 2), (0, 3)], 4)  # leaves t_4


def test_coefficient_examples():
    assert coeff_vector(IdealSet([(0, 0)], 2)) == (1, 1, 0)
    assert coeff_vector(t_set(4)) == (7, 12, 5)
    assert coeff_vector(u_set(4)) == (3, 6, 0)
    assert coeff_vector(v_set(4)) == (3, 3, 3)


def test_transpose():
    for n in range(2, 7):
        assert transpose(u_set(n)) == v_set(n)
    for s in enumerate_ideals(5):
        assert transpose(transpose(s)) == s
    assert coeff_vector(transpose(t_set(4))) == (7, 12, 5)


def test_parse_ideal():
    assert parse_ideal("0,0;1,0;0,1", 3).points == frozenset({(0, 0), (1, 0), (0, 1)})
    assert parse_ideal("u", 4) == u_set(4)
    assert parse_ideal("t", 3) == t_set(3)
    with pytest.raises(ValueError):
        parse_ideal("0,0;2,0", 4)


def test_zy_is_first_member():
    s = IdealSet([(0, 0)], 2)
    assert canonical_form(book_ineq_A(s)) == canonical_form(zhang_yeung_expr(ABCD, "a", "b", "c", "d"))


def test_u_family_form():
    for n in range(2, 7):
        want = ingleton_expr(ABCD, "a", "b", "c", "d") * (n - 1) + cond_expr(ABCD, "a", "b", "c") + C_expr() * (n * (n - 1) // 2)
        assert book_ineq_A(u_set(n)) == want


def test_second_kind_examples():
    bdac = ingleton_expr(ABCD, "b", "d", "a", "c")
    ab_d = cond_expr(ABCD, "a", "b", "d")
    d1 = cond_expr(ABCD, "b", "d", "a") + cond_expr(ABCD, "a", "d", "b")
    assert book_ineq_B(1) == bdac + ab_d + d1
    assert book_ineq_B(2) == bdac * 2 + ab_d + d1 * 3
    U24 = Polymatroid.uniform("abcd", 2)
    assert all(book_ineq_B(l)(U24) >= 0 for l in range(1, 9))


def test_b2():
    fam = generate_family(2)
    assert len(fam) == 2
    assert len(set(fam)) == 2
    V = Polymatroid.from_dict("abcd", {"a": 2, "b": 2, "c": 2, "d": 2, "ab": 3, "ac": 3, "ad": 3, "bc": 3, "bd": 3,
                                        "cd": 4, "abc": 4, "abd": 4, "acd": 4, "bcd": 4, "abcd": 4})
    # by hand: the first member is -1 at V, the second is [bdac](V) = 1 plus zeros
    assert [e(V) for e in fam] == [-1, 1]
    viol = check_against(V, generate_family(2, True))
    assert sorted(str(v.value) for v in viol) == ["-1", "-1"]


def test_swap_closure_count():
    # A is symmetric under a<->b, so its orbit has two members; B's has four
    fam = generate_family(2, include_swaps=True)
    assert len(fam) == 6
    names = [m.name for m in family_members(2, True)]
    assert names.count("A[0,0]") == 1 and "A[0,0]^ab" not in names


def test_families_nest():
    for n in range(2, 6):
        assert set(generate_family(n, True)) <= set(generate_family(n + 1, True))


def test_u24_and_zero_satisfy_everything(U24):
    fam = generate_family(9, True)
    assert check_against(U24, fam) == []
    assert all(e(Polymatroid.zero("abcd")) == 0 for e in fam)


def test_four_page_ideal_triplets():
    s3 = {s.points for s in enumerate_ideals(3)}
    new = [s for s in enumerate_ideals(4) if s.points not in s3]
    assert len(new) == 9
    got = sorted(coeff_vector(s) for s in new)
    want = sorted([(3, 3, 3), (4, 5, 3), (6, 9, 5), (7, 12, 5), (6, 11, 3), (4, 7, 1), (3, 6, 0), (5, 8, 3), (5, 8, 3)])
    assert got == want
    triplets = [coeff_vector(s) for s in enumerate_ideals(4)]
    assert len(set(triplets)) == 12 and triplets.count((5, 8, 3)) == 2


def test_average_redundancy():
    e = ineq_from_triple(5, 8, 3)
    assert e * 2 == ineq_from_triple(4, 5, 3) + ineq_from_triple(6, 11, 3)
    cert = combination_certificate(e, [ineq_from_triple(4, 5, 3), ineq_from_triple(6, 11, 3)])
    assert cert is not None


def test_remove_redundant():
    zy = canonical_form(zhang_yeung_expr(ABCD, "a", "b", "c", "d"))
    kept = remove_redundant([zy, zy * 2])
    assert len(kept) == 1 and canonical_form(kept[0]) == zy
    fam = [canonical_form(ineq_from_triple(*t)) for t in [(4, 5, 3), (5, 8, 3), (6, 11, 3)]]
    assert remove_redundant(fam) == [fam[0], fam[2]]


def test_format_round_trip():
    for e in generate_family(4, True):
        assert parse_inequality(format_inequality(e)) == e
    text = export_family(generate_family(3, True))
    assert parse_family(text) == generate_family(3, True)
    assert parse_inequality("1*a − 2*ab ≥ 0") == parse_inequality("1*a - 2*ab >= 0")


def test_plot_data():
    rows = plot_data(4)
    assert (5, 8, 3) not in [r[1] for r in rows]
    assert all(r[2] == Fraction(r[1][1], r[1][0]) for r in rows)
    csv = plot_csv(4)
    assert csv.splitlines()[0] == "ideal,x,y,z,y_over_x,z_over_x"
    assert len(csv.splitlines()) == len(rows) + 1
