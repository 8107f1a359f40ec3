import itertools
import random

import pytest

from bookineq.book import (
    BookLayout,
    compose,
    compose_layouts,
    extend_over_cosingleton,
    extend_over_singleton,
    is_book_extension,
    is_symmetric,
    lift_tight_extension,
    page_permute,
    restrict_pages,
    symmetrize,
    tighten_extension,
    twin,
)
from bookineq.bookcone import base_restriction, book_layout, sample_cone_point
from bookineq.core import Polymatroid, validate_polymatroid
from bookineq.ops import ElementMap, pullback, tighten
from bookineq.sampling import random_polymatroid


def test_layout_labels():
    L = BookLayout("abcd", "ab", 2)
    assert L.extended_ground.labels == ("a", "b", "c_1", "d_1", "c_2", "d_2")
    assert twin("c", 3) == "c_3"
    with pytest.raises(ValueError):
        BookLayout("abcd", "", 2)
    with pytest.raises(ValueError):
        BookLayout("abcd", "abcd", 2)


def test_one_page_is_trivial(V):
    L = BookLayout("abcd", "ab", 1)
    h = Polymatroid(L.extended_ground, V.rank)
    assert is_book_extension(h, V, L).ok


def test_copied_pages_fail_independence(V):
    L = BookLayout("abcd", "ab", 2)
    mp = {"a": "a", "b": "b", "c_1": "c", "d_1": "d", "c_2": "c", "d_2": "d"}
    h = pullback(V, ElementMap.of(L.extended_ground, V.ground, mp))
    rep = is_book_extension(h, V, L)
    assert not rep.failed_pullbacks
    assert rep.failed_independence


def test_singleton_free_example():
    g = Polymatroid.free("ac")
    h, L = extend_over_singleton(g, "a", 2)
    assert h(["a", "c_1"]) == 2
    assert h(["a", "c_1", "c_2"]) == 3
    assert is_book_extension(h, g, L).ok


def test_constructions_random():
    rng = random.Random(11)
    for trial in range(40):
        k = rng.randint(2, 4)
        ground = "abcd"[:k]
        g = random_polymatroid(ground, rng)
        a = rng.choice(ground)
        n = rng.randint(2, 4 if k < 4 else 3)
        h, L = extend_over_singleton(g, a, n)
        assert h(a) == g(a)
        assert is_book_extension(h, g, L).ok, (trial, g, a, n)
        h, L = extend_over_cosingleton(g, a, n)
        assert is_book_extension(h, g, L).ok, (trial, g, a, n)


def test_cosingleton_u24():
    g = Polymatroid.uniform("abcd", 2)
    h, L = extend_over_cosingleton(g, "d", 2)
    assert len(h.ground) == 5
    assert is_book_extension(h, g, L).ok


def test_tighten_and_lift_round_trip():
    rng = random.Random(12)
    for _ in range(15):
        g = random_polymatroid("abc", rng, "shannon")
        for a in "abc":
            for spine in ("a", "ab"):
                L = BookLayout("abc", spine, 2)
                gt = tighten(g, a)
                ht, _ = (extend_over_singleton(gt, "a", 2) if spine == "a" else extend_over_cosingleton(gt, "c", 2))
                assert is_book_extension(ht, gt, L).ok
                lifted = lift_tight_extension(g, ht, L, a)
                assert is_book_extension(lifted, g, L).ok
                assert tighten_extension(lifted, g, L, a) == ht


def test_tighten_extension_spine_drop():
    g = Polymatroid.free("abc")
    h, L = extend_over_singleton(g, "a", 2)
    t = tighten_extension(h, g, L, "a")
    bit = L.extended_ground.bit("a")
    for m in range(len(h.rank)):
        if m & bit:
            assert t.rank[m] == h.rank[m] - 1
    assert is_book_extension(t, tighten(g, "a"), L).ok


def test_page_permute_composition():
    h = sample_cone_point(3, seed=1)
    L = book_layout(3)
    # the singleton construction of a random g is a convenient test object
    hh, LL = extend_over_singleton(random_polymatroid("abcd", random.Random(2), "shannon"), "a", 3)
    for p, q in itertools.product(itertools.permutations((1, 2, 3)), repeat=2):
        assert page_permute(page_permute(hh, LL, q), LL, p) == page_permute(hh, LL, compose(q, p))
    assert page_permute(hh, LL, (1, 2, 3)) == hh
    assert is_symmetric(h, L)


def test_page_permute_keeps_extensions():
    g = base_restriction(sample_cone_point(2, seed=4), 2)
    h = sample_cone_point(2, seed=4)
    L = book_layout(2)
    assert is_book_extension(page_permute(h, L, (2, 1)), g, L).ok


def test_symmetrize():
    rng = random.Random(13)
    g = random_polymatroid("abc", rng, "coverage")
    h, L = extend_over_singleton(g, "a", 3)
    s = symmetrize(h, L)
    assert is_symmetric(s, L)
    assert symmetrize(s, L) == s
    assert symmetrize(page_permute(h, L, (3, 1, 2)), L) == s
    assert is_book_extension(s, g, L).ok
    for m in range(len(s.rank)):
        for m2 in range(len(s.rank)):
            if L.signature(m) == L.signature(m2):
                assert s.rank[m] == s.rank[m2]


def test_page_dropping():
    rng = random.Random(14)
    g = random_polymatroid("abc", rng, "shannon")
    h, L = extend_over_cosingleton(g, "c", 4)
    for k in range(1, 5):
        for pages in itertools.combinations(range(1, 5), k):
            hs, Ls = restrict_pages(h, L, pages)
            assert is_book_extension(hs, g, Ls).ok


def test_composition_of_extensions():
    rng = random.Random(15)
    for _ in range(3):
        g = random_polymatroid("abc", rng, "shannon")
        h, inner = extend_over_singleton(g, "a", 2)
        h2, outer = extend_over_singleton(h, "a", 2)
        assert outer.extended_ground == h2.ground
        outer2, flat, phi = compose_layouts(inner, 2)
        assert outer2 == outer
        flat_h = pullback(h2, phi)
        assert is_book_extension(flat_h, g, flat).ok
