"""The n-page extension cone of polymatroids on abcd over the spine ab, in
symmetric (orbit) coordinates.

A subset of the extended ground ``a, b, c_1, d_1, ..., c_n, d_n`` of a
symmetric extension is described by its spine part and by how many pages
contribute ``c_i`` only (q), ``d_i`` only (r) or both (m).  The coordinate
name is ``<spine part>[q,r,m]``, e.g. ``ab[0,0,2]``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb
from typing import Iterable, Mapping, Sequence

from .book import BookLayout
from .core import GroundSet, LinExpr, Polymatroid, canonical_scale, validate_polymatroid
from .inequalities import ABCD, expr_to_coeffs, subset_coordinates
from .polyhedra import (
    EQ,
    GE,
    BudgetExceeded,
    Certificate,
    HCone,
    LinIneq,
    ProjectionStats,
    facets_canonical,
    fm_project,
    lp_feasible,
    lp_min,
)

SPINE_PARTS = ("", "a", "b", "ab")
# local page trace (bit 0 = c, bit 1 = d) -> slot in (q, r, m)
_SLOT = {1: 0, 2: 1, 3: 2}


@dataclass(frozen=True, order=True)
class OrbitCoord:
    spine: str  # one of "", "a", "b", "ab"
    q: int
    r: int
    m: int

    def __post_init__(self):
        if self.spine not in SPINE_PARTS:
            raise ValueError(f"bad spine part {self.spine!r}")
        if min(self.q, self.r, self.m) < 0:
            raise ValueError("negative page count")
        if not self.spine and self.q == self.r == self.m == 0:
            raise ValueError("the empty set has no coordinate")

    @property
    def name(self) -> str:
        return f"{self.spine}[{self.q},{self.r},{self.m}]"

    @property
    def size(self) -> int:
        return len(self.spine) + self.q + self.r + 2 * self.m

    @property
    def pages_used(self) -> int:
        return self.q + self.r + self.m

    def sort_key(self):
        return (self.size, SPINE_PARTS.index(self.spine), self.m, self.r, self.q)

    @classmethod
    def parse(cls, name: str) -> "OrbitCoord":
        sp, _, rest = name.partition("[")
        q, r, m = (int(x) for x in rest.rstrip("]").split(","))
        return cls(sp, q, r, m)

    def __str__(self):
        return self.name


def coord_of(spine: str, traces: Iterable[int]) -> OrbitCoord:
    """Orbit coordinate of a subset given by spine part and per-page local traces."""
    cnt = [0, 0, 0]
    for t in traces:
        if t:
            cnt[_SLOT[t]] += 1
    return OrbitCoord(spine, *cnt)


def orbit_coordinates(n: int) -> list[OrbitCoord]:
    if n < 1:
        raise ValueError("n must be at least 1")
    out = []
    for sp in SPINE_PARTS:
        for m in range(n + 1):
            for r in range(n + 1 - m):
                for q in range(n + 1 - m - r):
                    if sp or q or r or m:
                        out.append(OrbitCoord(sp, q, r, m))
    out.sort(key=OrbitCoord.sort_key)
    return out


def base_coordinate(subset: str) -> OrbitCoord:
    """Coordinate of a subset of abcd, read on page 1."""
    sp = "".join(x for x in "ab" if x in subset)
    t = (1 if "c" in subset else 0) | (2 if "d" in subset else 0)
    return coord_of(sp, [t])


def base_coordinates() -> dict[str, str]:
    """abcd subset label -> orbit coordinate name, for the 15 non-empty subsets."""
    return {lab: base_coordinate(lab).name for lab in subset_coordinates(ABCD)}


def book_layout(n: int) -> BookLayout:
    return BookLayout(ABCD, "ab", n)


# ---------------------------------------------------------------------------
# elemental inequalities of a symmetric extension
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitSet:
    """A concrete representative: spine part plus explicit page traces."""

    spine: str
    traces: tuple[int, ...]

    def coord(self) -> OrbitCoord | None:
        if not self.spine and not any(self.traces):
            return None
        return coord_of(self.spine, self.traces)


def _row(terms: Sequence[tuple[OrbitSet, int]]) -> dict[str, Fraction]:
    out: dict[str, Fraction] = {}
    for s, c in terms:
        k = s.coord()
        if k is None:
            continue
        out[k.name] = out.get(k.name, Fraction(0)) + c
    return {k: v for k, v in out.items() if v}


def _union(x: OrbitSet, y: OrbitSet) -> OrbitSet:
    sp = "".join(e for e in "ab" if e in x.spine or e in y.spine)
    return OrbitSet(sp, tuple(s | t for s, t in zip(x.traces, y.traces)))


def _sub_row(i: OrbitSet, j: OrbitSet, K: OrbitSet) -> dict[str, Fraction]:
    """``h(iK) + h(jK) - h(ijK) - h(K)``."""
    iK, jK = _union(i, K), _union(j, K)
    return _row([(iK, 1), (jK, 1), (_union(iK, j), -1), (K, -1)])


def _count_patterns(pages: int) -> Iterable[tuple[int, ...]]:
    """Trace tuples for ``pages`` pages up to permutation (sorted)."""
    for m in range(pages + 1):
        for r in range(pages + 1 - m):
            for q in range(pages + 1 - m - r):
                p = pages - q - r - m
                yield (0,) * p + (1,) * q + (2,) * r + (3,) * m


@dataclass(frozen=True)
class OrbitElemental:
    kind: str
    name: str
    coeffs: Mapping[str, Fraction]


def orbit_elementals(n: int) -> list[OrbitElemental]:
    """Elemental inequalities of a symmetric n-page extension, one per orbit,
    written in orbit coordinates, canonical and de-duplicated."""
    rows: list[OrbitElemental] = []
    Z = lambda k: (0,) * k  # noqa: E731

    def add(kind, name, coeffs):
        if coeffs:
            rows.append(OrbitElemental(kind, name, coeffs))

    def sp(*xs):
        return "".join(x for x in "ab" if x in xs)

    full = OrbitSet("ab", (3,) * n)
    # monotonicity of co-singletons
    add("mono", "mono(a)", _row([(full, 1), (OrbitSet("b", full.traces), -1)]))
    add("mono", "mono(b)", _row([(full, 1), (OrbitSet("a", full.traces), -1)]))
    add("mono", "mono(c_1)", _row([(full, 1), (OrbitSet("ab", (2,) + (3,) * (n - 1)), -1)]))
    add("mono", "mono(d_1)", _row([(full, 1), (OrbitSet("ab", (1,) + (3,) * (n - 1)), -1)]))
    # (a, b | K)
    for pat in _count_patterns(n):
        K = OrbitSet("", pat)
        add("sub", f"(a,b|{_desc(K)})", _sub_row(OrbitSet("a", Z(n)), OrbitSet("b", Z(n)), K))
    # (spine element, page-1 element | K)
    for s, o in (("a", "b"), ("b", "a")):
        for x, y in ((1, 2), (2, 1)):
            for so, t1 in product(("", o), (0, y)):
                for pat in _count_patterns(n - 1):
                    K = OrbitSet(so, (t1,) + pat)
                    add(
                        "sub",
                        f"({s},{'cd'[x - 1]}_1|{_desc(K)})",
                        _sub_row(OrbitSet(s, Z(n)), OrbitSet("", (x,) + Z(n - 1)), K),
                    )
    # (c_1, d_1 | K)
    for spine in SPINE_PARTS:
        for pat in _count_patterns(n - 1):
            K = OrbitSet(spine, (0,) + pat)
            add(
                "sub",
                f"(c_1,d_1|{_desc(K)})",
                _sub_row(OrbitSet("", (1,) + Z(n - 1)), OrbitSet("", (2,) + Z(n - 1)), K),
            )
    # element on page 1, element on page 2
    if n >= 2:
        for x, y in ((1, 1), (1, 2), (2, 2)):
            ox, oy = 3 - x, 3 - y
            for spine in SPINE_PARTS:
                for t1, t2 in product((0, ox), (0, oy)):
                    for pat in _count_patterns(n - 2):
                        K = OrbitSet(spine, (t1, t2) + pat)
                        add(
                            "sub",
                            f"({'cd'[x - 1]}_1,{'cd'[y - 1]}_2|{_desc(K)})",
                            _sub_row(OrbitSet("", (x,) + Z(n - 1)), OrbitSet("", (0, y) + Z(n - 2)), K),
                        )
    return _dedupe(rows)


def _desc(K: OrbitSet) -> str:
    """A concrete representative of K, e.g. ``ac_2d_3``."""
    parts = [K.spine]
    for i, t in enumerate(K.traces, 1):
        if t & 1:
            parts.append(f"c_{i}")
        if t & 2:
            parts.append(f"d_{i}")
    return "".join(parts) or "0"


def _canon_key(coeffs: Mapping[str, Fraction]):
    s = canonical_scale(coeffs.values())
    return tuple(sorted((k, v * s) for k, v in coeffs.items()))


def _dedupe(rows: list[OrbitElemental]) -> list[OrbitElemental]:
    seen = set()
    out = []
    for r in rows:
        k = _canon_key(r.coeffs)
        if k not in seen:
            seen.add(k)
            out.append(r)
    return out


def independence_equalities(n: int) -> list[tuple[str, dict[str, Fraction]]]:
    """``h(P_i S) + h(P_j S) - h(P_i P_j S) - h(S) = 0`` for index-set sizes i, j."""
    out = []
    ab = OrbitCoord("ab", 0, 0, 0).name
    for i in range(1, n):
        for j in range(i, n + 1 - i):
            row: dict[str, Fraction] = {}
            for k, c in (
                (OrbitCoord("ab", 0, 0, i).name, 1),
                (OrbitCoord("ab", 0, 0, j).name, 1),
                (OrbitCoord("ab", 0, 0, i + j).name, -1),
                (ab, -1),
            ):
                row[k] = row.get(k, Fraction(0)) + c
            out.append((f"indep({i},{j})", {k: v for k, v in row.items() if v}))
    return out


@dataclass
class SymmetricCone:
    n: int
    cone: HCone
    base_coords: dict[str, str]  # abcd label -> coordinate name
    row_names: list[str] = field(default_factory=list)

    @property
    def coordinates(self) -> tuple[str, ...]:
        return self.cone.coordinates


@lru_cache(maxsize=None)
def assemble_cone(n: int) -> SymmetricCone:
    """Elemental Shannon rows of a symmetric n-page extension plus the page
    independence equalities, over orbit coordinates.

    Pullback conditions hold automatically: by symmetry every page sees the
    same 15 base coordinates.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    coords = tuple(c.name for c in orbit_coordinates(n))
    cons, names = [], []
    for el in orbit_elementals(n):
        cons.append(LinIneq(dict(el.coeffs), GE))
        names.append(el.name)
    for name, row in independence_equalities(n):
        cons.append(LinIneq(row, EQ))
        names.append(name)
    cone = HCone(coords, tuple(cons), frozenset(coords))
    return SymmetricCone(n, cone, base_coordinates(), names)


# ---------------------------------------------------------------------------
# folding / unfolding
# ---------------------------------------------------------------------------


def _mask_coord_table(n: int) -> list[str | None]:
    """Coordinate name for every mask of the extended ground (index 0 -> None)."""
    names = {}
    table: list[str | None] = [None] * (1 << (2 + 2 * n))
    for mask in range(1, len(table)):
        sp = ("a" if mask & 1 else "") + ("b" if mask & 2 else "")
        rest = mask >> 2
        cnt = [0, 0, 0]
        while rest:
            t = rest & 3
            if t:
                cnt[t - 1] += 1
            rest >>= 2
        key = (sp, cnt[0], cnt[1], cnt[2])
        nm = names.get(key)
        if nm is None:
            nm = names[key] = OrbitCoord(*key).name
        table[mask] = nm
    return table


def unfold(point: Mapping[str, object], n: int) -> Polymatroid:
    """Expand an orbit vector to a symmetric polymatroid on the extended ground."""
    layout = book_layout(n)
    table = _mask_coord_table(n)
    vals = {k: Fraction(v) if not isinstance(v, Fraction) else v for k, v in point.items()}
    rank = [Fraction(0)] + [vals.get(nm, Fraction(0)) for nm in table[1:]]
    return Polymatroid(layout.extended_ground, tuple(rank))


def fold(h: Polymatroid, n: int, check: bool = True) -> dict[str, Fraction]:
    """Orbit vector of a symmetric extension; with ``check`` asymmetry raises."""
    layout = book_layout(n)
    if h.ground != layout.extended_ground:
        raise ValueError("polymatroid is not on the n-page extended ground")
    table = _mask_coord_table(n)
    out: dict[str, Fraction] = {}
    for mask in range(1, len(table)):
        nm = table[mask]
        v = h.rank[mask]
        if nm in out:
            if check and out[nm] != v:
                raise ValueError(f"polymatroid is not symmetric at orbit {nm}")
        else:
            out[nm] = v
    return out


def orbit_expr_to_linexpr(coeffs: Mapping[str, object], n: int) -> LinExpr:
    """Expression on the extended ground placing each orbit coordinate on one
    representative subset (first pages take c-only, then d-only, then both)."""
    layout = book_layout(n)
    E = layout.extended_ground
    out = {}
    for nm, c in coeffs.items():
        oc = OrbitCoord.parse(nm)
        traces = [1] * oc.q + [2] * oc.r + [3] * oc.m
        traces += [0] * (n - len(traces))
        sp = E.mask(list(oc.spine))
        out[layout.join(ABCD.mask(list(oc.spine)), traces) | sp] = c
    return LinExpr(E, out)


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------


@dataclass
class ExtensionResult:
    exists: bool
    point: dict[str, Fraction] | None = None
    certificate: Certificate | None = None
    separating: LinExpr | None = None  # valid on the projection, negative at g

    def __bool__(self):
        return self.exists


def pin_rows(g: Polymatroid, sc: SymmetricCone) -> list[LinIneq]:
    return [LinIneq({sc.base_coords[lab]: 1}, EQ, -g(lab)) for lab in subset_coordinates(ABCD)]


def exists_extension(g: Polymatroid, n: int, rule: str = "bland") -> ExtensionResult:
    """Does ``g`` on abcd have an n-page extension over ab?

    Solved as an exact LP over the symmetric cone with the 15 base
    coordinates pinned to ``g``.  An infeasible answer carries the Farkas
    certificate and the derived inequality on abcd that separates ``g``.
    """
    if g.ground != ABCD:
        raise ValueError("g must live on the ground set abcd")
    rep = validate_polymatroid(g)
    if not rep.ok:
        raise ValueError(f"g is not a polymatroid: {rep.violations[0]}")
    sc = assemble_cone(n)
    pins = pin_rows(g, sc)
    res = lp_feasible(sc.cone, pins, rule=rule)
    if res.feasible:
        return ExtensionResult(True, point=res.point)
    # the pinned-row multipliers give a valid inequality on the base
    labs = subset_coordinates(ABCD)
    sep = {}
    for (kind, i), y in res.certificate.multipliers:
        if kind == "extra":
            sep[labs[i]] = sep.get(labs[i], Fraction(0)) - y
    e = LinExpr(ABCD, {ABCD.mask(k): v for k, v in sep.items()})
    if e(g) >= 0:
        raise RuntimeError("separating inequality does not cut off g")
    return ExtensionResult(False, certificate=res.certificate, separating=e)


def sample_cone_point(n: int, seed: int, vertices: int = 3, rule: str = "bland") -> Polymatroid:
    """Random point of the symmetric cone, unfolded to the extended ground.

    Each vertex is the optimum of a seeded random rational objective over the
    slice ``sum of coordinates = 1``; several vertices are mixed with random
    positive weights.  Seeds give reproducible output.
    """
    rng = random.Random(seed)
    sc = assemble_cone(n)
    total: dict[str, Fraction] = {}
    for _ in range(max(1, vertices)):
        obj = {k: Fraction(rng.randint(-20, 20), rng.randint(1, 5)) for k in sc.coordinates}
        res = lp_min(sc.cone, obj, rule=rule)
        if res.status != "optimal":
            raise RuntimeError(f"sampling LP ended {res.status}")
        w = Fraction(rng.randint(1, 9))
        for k, v in res.point.items():
            if v:
                total[k] = total.get(k, Fraction(0)) + w * v
    return unfold(total, n)


def base_restriction(h: Polymatroid, n: int) -> Polymatroid:
    """Restriction of an extension to ``a, b, c_1, d_1`` relabelled as abcd."""
    layout = book_layout(n)
    E = layout.extended_ground
    to = {"a": "a", "b": "b", "c": "c_1", "d": "d_1"}
    return Polymatroid.from_function(ABCD, lambda m: h.rank[E.mask([to[x] for x in ABCD.elements(m)])])


def project_base(
    n: int,
    budget_seconds: float | None = None,
    budget_rows: int | None = None,
    jobs: int = 1,
    stats: ProjectionStats | None = None,
) -> list[LinExpr]:
    """Canonical facets of the projection of the n-page cone to abcd.

    Raises :class:`BudgetExceeded` (carrying whatever partial cone was
    reached) when the budget runs out.
    """
    sc = assemble_cone(n)
    inv = {v: k for k, v in sc.base_coords.items()}
    keep = [sc.base_coords[lab] for lab in subset_coordinates(ABCD)]
    proj = fm_project(
        sc.cone, keep, budget_seconds=budget_seconds, budget_rows=budget_rows, jobs=jobs, stats=stats
    )
    out = []
    for f in facets_canonical(proj):
        e = LinExpr(ABCD, {ABCD.mask(inv[k]): v for k, v in f.coeffs.items()})
        if f.relation == EQ:
            raise RuntimeError("projection is not full-dimensional")
        out.append(e)
    return out


def orbit_count(n: int) -> int:
    return 4 * comb(n + 3, 3) - 1
