"""Operations on polymatroids: direct sum, restriction, pullback, the minimum
construction and tightening."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Mapping, Sequence, Union

from .core import GroundSet, Polymatroid, SubsetLike, to_fraction


@dataclass(frozen=True)
class ElementMap:
    """Map from ``source`` elements to elements of ``target``.

    An image may also be a set of target elements; pulling back along such
    a map evaluates the rank of the union of images, which is how several
    copies of an element get glued into one.
    """

    source: GroundSet
    target: GroundSet
    images: tuple[int, ...]  # per source index: target mask

    @classmethod
    def of(cls, source, target, mapping: Mapping[str, Union[str, Iterable[str]]]) -> "ElementMap":
        source, target = GroundSet.of(source), GroundSet.of(target)
        missing = [x for x in source.labels if x not in mapping]
        if missing:
            raise ValueError(f"element map is not total, missing {missing}")
        extra = set(mapping) - set(source.labels)
        if extra:
            raise ValueError(f"element map mentions unknown source labels {sorted(extra)}")
        imgs = []
        for x in source.labels:
            y = mapping[x]
            m = target.bit(y) if isinstance(y, str) else target.mask(list(y))
            imgs.append(m)
        return cls(source, target, tuple(imgs))

    @classmethod
    def identity(cls, source, target=None) -> "ElementMap":
        source = GroundSet.of(source)
        target = source if target is None else GroundSet.of(target)
        return cls.of(source, target, {x: x for x in source.labels})

    def image(self, mask: int) -> int:
        out = 0
        i = 0
        while mask:
            if mask & 1:
                out |= self.images[i]
            mask >>= 1
            i += 1
        return out


def direct_sum(parts: Sequence[Polymatroid], suffixes: Sequence[str] | None = None) -> Polymatroid:
    """Direct sum; part ``k`` (1-based) has its labels suffixed with ``_k``."""
    if not parts:
        raise ValueError("direct sum of no parts")
    if suffixes is None:
        suffixes = [f"_{k + 1}" for k in range(len(parts))]
    labels: list[str] = []
    offsets = []
    for g, suf in zip(parts, suffixes):
        offsets.append(len(labels))
        labels.extend(lab + suf for lab in g.ground.labels)
    if len(set(labels)) != len(labels):
        raise ValueError("label collision after relabeling")
    ground = GroundSet(labels)
    slices = [((1 << len(g.ground)) - 1, off, g) for g, off in zip(parts, offsets)]

    def rank(m: int) -> Fraction:
        return sum((g.rank[(m >> off) & full] for full, off, g in slices), Fraction(0))

    return Polymatroid.from_function(ground, rank)


def restrict(g: Polymatroid, M: SubsetLike) -> Polymatroid:
    m = g.ground.mask(M)
    if m == 0:
        raise ValueError("cannot restrict to the empty set")
    labels = g.ground.elements(m)
    return pullback(g, ElementMap.identity(labels, g.ground))


def pullback(g: Polymatroid, phi: ElementMap) -> Polymatroid:
    """``(phi^-1 g)(I) = g(phi(I))``."""
    if phi.target != g.ground:
        raise ValueError("element map target differs from the polymatroid's ground set")
    return Polymatroid.from_function(phi.source, lambda m: g.rank[phi.image(m)])


def min_extend(g: Polymatroid, a: str, t) -> Polymatroid:
    """``h(J) = min{g(J), g(aJ) - t}``; a polymatroid whenever ``0 <= t <= g(a)``."""
    t = to_fraction(t)
    if t < 0:
        raise ValueError("t must be non-negative")
    bit = g.ground.bit(a)
    if t > g.rank[bit]:
        raise ValueError(f"t = {t} exceeds g({a}) = {g.rank[bit]}")
    r = g.rank
    return Polymatroid.from_function(g.ground, lambda m: min(r[m], r[m | bit] - t))


def tight_gap(g: Polymatroid, a: str) -> Fraction:
    """``g(N) - g(N - a)``."""
    full = g.ground.full
    return g.rank[full] - g.rank[full & ~g.ground.bit(a)]


def tighten(g: Polymatroid, a: str) -> Polymatroid:
    bit = g.ground.bit(a)
    t = tight_gap(g, a)
    if t == 0:
        return g
    return Polymatroid(g.ground, tuple(v - t if m & bit else v for m, v in enumerate(g.rank)))


def tighten_all(g: Polymatroid, J: SubsetLike | None = None, order: Sequence[str] | None = None) -> Polymatroid:
    mask = g.ground.full if J is None else g.ground.mask(J)
    elems = list(order) if order is not None else list(g.ground.elements(mask))
    if sorted(elems) != sorted(g.ground.elements(mask)):
        raise ValueError("order must list the elements of J exactly once")
    for a in elems:
        g = tighten(g, a)
    return g


def is_tight(g: Polymatroid) -> bool:
    return all(tight_gap(g, a) == 0 for a in g.ground.labels)


def tighten_orders_agree(g: Polymatroid, J: SubsetLike | None = None) -> bool:
    """Check that every ordering of J gives the same ``tighten_all`` result."""
    mask = g.ground.full if J is None else g.ground.mask(J)
    elems = g.ground.elements(mask)
    ref = tighten_all(g, mask)
    return all(tighten_all(g, mask, p) == ref for p in permutations(elems))
