"""Seeded random polymatroids for tests and experiments.

All generators take a ``random.Random`` so that runs are reproducible.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache

from .core import GroundSet, Polymatroid, popcount
from .inequalities import ABCD, shannon_cone
from .polyhedra import lp_min


def _rat(rng: random.Random, lo: int = 0, hi: int = 9, den: int = 4) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.randint(1, den))


@lru_cache(maxsize=None)
def _cone(labels: tuple[str, ...]):
    return shannon_cone(GroundSet(labels))


def shannon_vertex(ground, rng: random.Random) -> Polymatroid:
    """An extreme ray of the Shannon cone: optimum of a random objective on
    the slice where all subset ranks sum to one."""
    ground = GroundSet.of(ground)
    cone = _cone(ground.labels)
    obj = {k: Fraction(rng.randint(-20, 20), rng.randint(1, 5)) for k in cone.coordinates}
    res = lp_min(cone, obj)
    if res.status != "optimal":
        raise RuntimeError(f"sampling LP ended {res.status}")
    vals = {ground.parse(k) if k else 0: v for k, v in res.point.items()}
    return Polymatroid.from_function(ground, lambda m: vals.get(m, Fraction(0)))


def shannon_mix(ground, rng: random.Random, vertices: int = 3) -> Polymatroid:
    """Positive combination of a few Shannon extreme rays."""
    ground = GroundSet.of(ground)
    g = Polymatroid.zero(ground)
    for _ in range(vertices):
        g = g + shannon_vertex(ground, rng).scale(rng.randint(1, 9))
    return g


def coverage(ground, rng: random.Random, atoms: int = 6) -> Polymatroid:
    """``g(J) = weight of the union of the sets attached to J``; entropic."""
    ground = GroundSet.of(ground)
    w = [_rat(rng, 1, 6) for _ in range(atoms)]
    sets = [rng.getrandbits(atoms) for _ in ground.labels]

    def rank(m: int) -> Fraction:
        u = 0
        for i, s in enumerate(sets):
            if m >> i & 1:
                u |= s
        return sum((w[j] for j in range(atoms) if u >> j & 1), Fraction(0))

    return Polymatroid.from_function(ground, rank)


def modular(ground, rng: random.Random) -> Polymatroid:
    ground = GroundSet.of(ground)
    w = [_rat(rng) for _ in ground.labels]
    return Polymatroid.from_function(ground, lambda m: sum((w[i] for i in range(len(w)) if m >> i & 1), Fraction(0)))


def uniform_matroid(ground, rng: random.Random) -> Polymatroid:
    ground = GroundSet.of(ground)
    return Polymatroid.uniform(ground, rng.randint(1, len(ground)))


def _v() -> Polymatroid:
    # singletons 2, cd 4, other pairs 3, everything larger 4; violates ZY by 1
    def rank(m: int) -> Fraction:
        k = popcount(m)
        if k == 1:
            return Fraction(2)
        if k == 2:
            return Fraction(4) if m == ABCD.mask("cd") else Fraction(3)
        return Fraction(4)

    return Polymatroid.from_function(ABCD, rank)


V_POLYMATROID = _v()


def perturbed_v(rng: random.Random) -> Polymatroid:
    """V plus random entropic and Shannon points; lands on either side of ZY."""
    return V_POLYMATROID + coverage(ABCD, rng).scale(Fraction(rng.randint(0, 8), 4)) + shannon_vertex(ABCD, rng).scale(rng.randint(0, 20))


KINDS = ("shannon", "coverage", "modular", "uniform", "vperturbed")


def random_polymatroid(ground, rng: random.Random, kind: str | None = None) -> Polymatroid:
    """Draw from one of :data:`KINDS` (chosen at random when ``kind`` is None)."""
    ground = GroundSet.of(ground)
    if kind is None:
        kind = rng.choice(KINDS if ground == ABCD else KINDS[:-1])
    if kind == "shannon":
        return shannon_mix(ground, rng, rng.randint(1, 4))
    if kind == "coverage":
        return coverage(ground, rng)
    if kind == "modular":
        return modular(ground, rng)
    if kind == "uniform":
        return uniform_matroid(ground, rng)
    if kind == "vperturbed":
        if ground != ABCD:
            raise ValueError("V perturbations live on abcd")
        return perturbed_v(rng)
    raise ValueError(f"unknown kind {kind!r}")
