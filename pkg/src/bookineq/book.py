"""Book extensions: layouts, verification, page permutations, symmetrisation,
the singleton / co-singleton constructions and the tightening lift."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from .core import GroundSet, Polymatroid, SubsetLike, popcount
from .ops import ElementMap, direct_sum, min_extend, pullback, tight_gap, tighten, tighten_all


def twin(label: str, page: int) -> str:
    return f"{label}_{page}"


class BookLayout:
    """Ground set ``S ∪ P_1 ∪ ... ∪ P_n`` for a base ground ``P ∪ S``.

    The extended ground lists the spine labels first (base order), then page
    1, page 2, ... each in base order; element ``x`` of ``P`` on page ``i``
    is labelled ``x_i``.
    """

    def __init__(self, base_ground, spine: SubsetLike, pages: int):
        self.base_ground = GroundSet.of(base_ground)
        self.spine = self.base_ground.mask(spine)
        if self.spine == 0:
            raise ValueError("the spine must be non-empty")
        if self.spine == self.base_ground.full:
            raise ValueError("the spine must be a proper subset")
        if pages < 1:
            raise ValueError("at least one page is needed")
        self.pages = pages
        self.spine_labels = self.base_ground.elements(self.spine)
        self.page_labels = self.base_ground.elements(self.base_ground.full & ~self.spine)
        ext = list(self.spine_labels)
        for i in range(1, pages + 1):
            ext.extend(twin(x, i) for x in self.page_labels)
        self.extended_ground = GroundSet(ext)
        s = len(self.spine_labels)
        p = len(self.page_labels)
        self._s, self._p = s, p
        self.spine_ext = (1 << s) - 1
        self._page_full = (1 << p) - 1
        # base bit of each spine / page-local position
        self._spine_bits = [self.base_ground.bit(x) for x in self.spine_labels]
        self._page_bits = [self.base_ground.bit(x) for x in self.page_labels]

    def __repr__(self):
        return (
            f"BookLayout({''.join(self.base_ground.labels)!r}, spine="
            f"{self.base_ground.label(self.spine)!r}, pages={self.pages})"
        )

    def __eq__(self, other):
        return (
            isinstance(other, BookLayout)
            and self.base_ground == other.base_ground
            and self.spine == other.spine
            and self.pages == other.pages
        )

    def page_mask(self, i: int) -> int:
        """Extended mask of page ``i`` (1-based)."""
        if not 1 <= i <= self.pages:
            raise ValueError(f"page {i} out of range 1..{self.pages}")
        return self._page_full << (self._s + (i - 1) * self._p)

    def pages_mask(self, idx: Iterable[int]) -> int:
        m = 0
        for i in idx:
            m |= self.page_mask(i)
        return m

    def phi(self, i: int) -> ElementMap:
        """The bijection ``P ∪ S -> P_i ∪ S`` as an element map into the extended ground."""
        mp = {x: x for x in self.spine_labels}
        mp.update({x: twin(x, i) for x in self.page_labels})
        return ElementMap.of(self.base_ground, self.extended_ground, mp)

    def split(self, mask: int) -> tuple[int, tuple[int, ...]]:
        """Extended mask -> (spine part as a base mask, per-page traces as local masks)."""
        sp = mask & self.spine_ext
        spine_base = 0
        for k, b in enumerate(self._spine_bits):
            if sp >> k & 1:
                spine_base |= b
        rest = mask >> self._s
        traces = []
        for _ in range(self.pages):
            traces.append(rest & self._page_full)
            rest >>= self._p
        return spine_base, tuple(traces)

    def join(self, spine_base: int, traces: Sequence[int]) -> int:
        """Inverse of :meth:`split`."""
        m = 0
        for k, b in enumerate(self._spine_bits):
            if spine_base & b:
                m |= 1 << k
        for i, t in enumerate(traces):
            m |= t << (self._s + i * self._p)
        return m

    def local_to_base(self, local: int) -> int:
        out = 0
        for k, b in enumerate(self._page_bits):
            if local >> k & 1:
                out |= b
        return out

    def base_to_local(self, base: int) -> int:
        out = 0
        for k, b in enumerate(self._page_bits):
            if base & b:
                out |= 1 << k
        return out

    def signature(self, mask: int) -> tuple[int, tuple[int, ...]]:
        """Orbit signature under page permutations: spine part plus sorted traces."""
        sp, traces = self.split(mask)
        return sp, tuple(sorted(traces))

    def index_pairs(self) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
        """Unordered pairs of disjoint non-empty page index sets."""
        n = self.pages
        # assign each page to 0 (unused), 1 (first set) or 2 (second set)
        for labels in _ternary(n):
            A = tuple(i + 1 for i, v in enumerate(labels) if v == 1)
            B = tuple(i + 1 for i, v in enumerate(labels) if v == 2)
            if A and B and A < B:
                yield A, B


def _ternary(n: int) -> Iterator[tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    for rest in _ternary(n - 1):
        for v in (0, 1, 2):
            yield rest + (v,)


@dataclass
class BookReport:
    failed_pullbacks: list[int] = field(default_factory=list)
    failed_independence: list[tuple[tuple[int, ...], tuple[int, ...], Fraction]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failed_pullbacks and not self.failed_independence

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "ok"
        parts = [f"pullback along page {i} differs from g" for i in self.failed_pullbacks]
        parts += [
            f"pages {list(A)} and {list(B)} not independent over the spine (value {v})"
            for A, B, v in self.failed_independence
        ]
        return "; ".join(parts)


def is_book_extension(h: Polymatroid, g: Polymatroid, layout: BookLayout, first_only: bool = False) -> BookReport:
    """Check the pullback condition for every page and total independence of
    the pages over the spine, for every pair of disjoint non-empty index sets."""
    if h.ground != layout.extended_ground:
        raise ValueError("h is not on the layout's extended ground set")
    if g.ground != layout.base_ground:
        raise ValueError("g is not on the layout's base ground set")
    rep = BookReport()
    for i in range(1, layout.pages + 1):
        if pullback(h, layout.phi(i)) != g:
            rep.failed_pullbacks.append(i)
            if first_only:
                return rep
    r = h.rank
    S = layout.spine_ext
    for A, B in layout.index_pairs():
        mA = layout.pages_mask(A)
        mB = layout.pages_mask(B)
        v = r[mA | S] + r[mB | S] - r[mA | mB | S] - r[S]
        if v != 0:
            rep.failed_independence.append((A, B, v))
            if first_only:
                return rep
    return rep


def _check_perm(pi: Sequence[int], n: int) -> tuple[int, ...]:
    pi = tuple(pi)
    if sorted(pi) != list(range(1, n + 1)):
        raise ValueError(f"{pi} is not a permutation of 1..{n}")
    return pi


def sigma(layout: BookLayout, pi: Sequence[int], mask: int) -> int:
    """``σ_π``: moves the trace on page ``i`` to page ``π(i)``; spine fixed."""
    sp, traces = layout.split(mask)
    moved = [0] * layout.pages
    for i, t in enumerate(traces):
        moved[pi[i] - 1] = t
    return layout.join(sp, moved)


def page_permute(h: Polymatroid, layout: BookLayout, pi: Sequence[int]) -> Polymatroid:
    """``(πh)(I) = h(σ_π(I))``; ``pi[i-1]`` is the image of page ``i``.

    With this convention ``page_permute(page_permute(h, p2), p1)`` equals
    ``page_permute(h, compose(p2, p1))``.
    """
    if h.ground != layout.extended_ground:
        raise ValueError("h is not on the layout's extended ground set")
    pi = _check_perm(pi, layout.pages)
    r = h.rank
    return Polymatroid(h.ground, tuple(r[sigma(layout, pi, m)] for m in range(len(r))))


def compose(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """``(p∘q)(i) = p(q(i))``."""
    return tuple(p[q[i] - 1] for i in range(len(q)))


def symmetrize(h: Polymatroid, layout: BookLayout, g: Polymatroid | None = None) -> Polymatroid:
    """Average of ``πh`` over all page permutations, by orbit averaging.

    Every subset of an orbit is hit by the same number of permutations, so
    the average over permutations equals the plain mean over the orbit.
    When ``g`` is given the input is first checked to be an extension of it.
    """
    if h.ground != layout.extended_ground:
        raise ValueError("h is not on the layout's extended ground set")
    if g is not None:
        rep = is_book_extension(h, g, layout, first_only=True)
        if not rep.ok:
            raise ValueError(f"input is not a book extension: {rep}")
    sums: dict[tuple, list] = defaultdict(lambda: [Fraction(0), 0])
    sig_of = []
    for m, v in enumerate(h.rank):
        s = layout.signature(m)
        sig_of.append(s)
        acc = sums[s]
        acc[0] += v
        acc[1] += 1
    avg = {s: tot / cnt for s, (tot, cnt) in sums.items()}
    return Polymatroid(h.ground, tuple(avg[s] for s in sig_of))


def is_symmetric(h: Polymatroid, layout: BookLayout) -> bool:
    seen: dict[tuple, Fraction] = {}
    for m, v in enumerate(h.rank):
        s = layout.signature(m)
        if seen.setdefault(s, v) != v:
            return False
    return True


def restrict_pages(h: Polymatroid, layout: BookLayout, pages: Sequence[int]) -> tuple[Polymatroid, BookLayout]:
    """Restrict to the spine and the listed pages, renumbered 1..k in the given order."""
    k = len(pages)
    if k == 0 or len(set(pages)) != k:
        raise ValueError("need a non-empty list of distinct pages")
    small = BookLayout(layout.base_ground, layout.spine, k)
    mp = {x: x for x in layout.spine_labels}
    for j, i in enumerate(pages, start=1):
        if not 1 <= i <= layout.pages:
            raise ValueError(f"page {i} out of range")
        mp.update({twin(x, j): twin(x, i) for x in layout.page_labels})
    phi = ElementMap.of(small.extended_ground, layout.extended_ground, mp)
    return pullback(h, phi), small


def extend_over_singleton(g: Polymatroid, a: str, n: int) -> tuple[Polymatroid, BookLayout]:
    """n-page extension over ``{a}``: direct sum of n copies, glue the copies
    of ``a`` together, then apply the minimum construction with ``t=(n-1)g(a)``."""
    if n < 2:
        raise ValueError("need at least two pages")
    layout = BookLayout(g.ground, [a], n)
    f = direct_sum([g] * n)
    mp = {a: [twin(a, i) for i in range(1, n + 1)]}
    for i in range(1, n + 1):
        mp.update({twin(x, i): twin(x, i) for x in layout.page_labels})
    glued = pullback(f, ElementMap.of(layout.extended_ground, f.ground, mp))
    h = min_extend(glued, a, (n - 1) * g(a))
    return h, layout


def extend_over_cosingleton(g: Polymatroid, a: str, n: int) -> tuple[Polymatroid, BookLayout]:
    """n-page extension over ``N - a``: extend the fully tightened polymatroid by
    copying ``a`` onto every page, then undo the tightening element by element."""
    if n < 2:
        raise ValueError("need at least two pages")
    if len(g.ground) < 2:
        raise ValueError("a co-singleton spine needs at least two elements")
    layout = BookLayout(g.ground, [x for x in g.ground.labels if x != a], n)
    chain = [g]
    for x in g.ground.labels:
        chain.append(tighten(chain[-1], x))
    tight = chain[-1]
    mp = {x: x for x in layout.spine_labels}
    mp.update({twin(a, i): a for i in range(1, n + 1)})
    h = pullback(tight, ElementMap.of(layout.extended_ground, g.ground, mp))
    for x, prev in zip(reversed(g.ground.labels), reversed(chain[:-1])):
        h = lift_tight_extension(prev, h, layout, x, check=False)
    return h, layout


def tighten_extension(h: Polymatroid, g: Polymatroid, layout: BookLayout, a: str) -> Polymatroid:
    """From an extension of ``g`` build one of ``tighten(g, a)``."""
    if h.ground != layout.extended_ground or g.ground != layout.base_ground:
        raise ValueError("ground sets do not match the layout")
    t = tight_gap(g, a)
    if t == 0:
        return h
    if a in layout.spine_labels:
        return min_extend(h, a, t)
    for i in range(1, layout.pages + 1):
        h = min_extend(h, twin(a, i), t)
    return h


def lift_tight_extension(
    g: Polymatroid, h_tight: Polymatroid, layout: BookLayout, a: str, check: bool = True
) -> Polymatroid:
    """From an extension of ``tighten(g, a)`` build one of ``g``.

    Adds ``t = g(N) - g(N-a)`` once if ``a`` is in the spine, and ``t`` per
    twin of ``a`` present otherwise.
    """
    if h_tight.ground != layout.extended_ground or g.ground != layout.base_ground:
        raise ValueError("ground sets do not match the layout")
    if check:
        rep = is_book_extension(h_tight, tighten(g, a), layout, first_only=True)
        if not rep.ok:
            raise ValueError(f"h is not an extension of the tightened polymatroid: {rep}")
    t = tight_gap(g, a)
    if t == 0:
        return h_tight
    E = layout.extended_ground
    if a in layout.spine_labels:
        bit = E.bit(a)
        return Polymatroid(E, tuple(v + t if m & bit else v for m, v in enumerate(h_tight.rank)))
    twins = 0
    for i in range(1, layout.pages + 1):
        twins |= E.bit(twin(a, i))
    return Polymatroid(E, tuple(v + t * popcount(m & twins) for m, v in enumerate(h_tight.rank)))


def compose_layouts(inner: BookLayout, k2: int) -> tuple[BookLayout, BookLayout, ElementMap]:
    """Layouts for extending an extension again over the same spine.

    ``inner`` is a ``k1``-page layout of ``g``; the outer layout treats the
    inner extended ground as a base with the same spine and ``k2`` pages.
    Returns ``(outer, flat, phi)`` where ``flat`` is the ``k1*k2``-page layout
    of ``g`` and ``phi`` maps the flat ground onto the outer extended ground.
    """
    outer = BookLayout(inner.extended_ground, inner.extended_ground.mask(list(inner.spine_labels)), k2)
    k1 = inner.pages
    flat = BookLayout(inner.base_ground, inner.spine, k1 * k2)
    mp = {x: x for x in inner.spine_labels}
    for j in range(1, k2 + 1):
        for i in range(1, k1 + 1):
            for x in inner.page_labels:
                mp[twin(x, (j - 1) * k1 + i)] = twin(twin(x, i), j)
    return outer, flat, ElementMap.of(flat.extended_ground, outer.extended_ground, mp)
