"""Downward-closed lattice sets, their coefficient triples and the book
inequality family on the ground set abcd."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Iterator, Mapping, Sequence

from .core import (
    GroundSet,
    LinExpr,
    Polymatroid,
    canonical_form,
    cond_expr,
    elemental_inequalities,
    evaluate,
    graded_key,
    ingleton_expr,
    to_fraction,
)
from .polyhedra import EQ, GE, HCone, LinIneq, _solve_combination, is_implied

ABCD = GroundSet.of("abcd")

SWAPS = {
    "": {},
    "ab": {"a": "b", "b": "a"},
    "cd": {"c": "d", "d": "c"},
    "ab,cd": {"a": "b", "b": "a", "c": "d", "d": "c"},
}

Point = tuple[int, int]


# ---------------------------------------------------------------------------
# ideals of the triangle t_n
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdealSet:
    """A non-empty downward-closed set of lattice points inside ``t_n``."""

    points: frozenset
    n: int

    def __post_init__(self):
        pts = frozenset((int(k), int(l)) for k, l in self.points)
        object.__setattr__(self, "points", pts)
        if self.n < 2:
            raise ValueError("page count must be at least 2")
        if not pts:
            raise ValueError("an ideal must be non-empty")
        for k, l in pts:
            if k < 0 or l < 0:
                raise ValueError(f"negative lattice point {(k, l)}")
            if k + l > self.n - 2:
                raise ValueError(f"point {(k, l)} outside t_{self.n}")
            if (k > 0 and (k - 1, l) not in pts) or (l > 0 and (k, l - 1) not in pts):
                raise ValueError(f"not downward closed at {(k, l)}")

    @property
    def sorted_points(self) -> list[Point]:
        return sorted(self.points)

    def key(self):
        return (len(self.points), self.sorted_points)

    def spec(self) -> str:
        return ";".join(f"{k},{l}" for k, l in self.sorted_points)

    def with_n(self, n: int) -> "IdealSet":
        return IdealSet(self.points, n)

    def __str__(self):
        return "{" + " ".join(f"<{k},{l}>" for k, l in self.sorted_points) + "}"


def u_set(n: int) -> IdealSet:
    return IdealSet(frozenset((k, 0) for k in range(n - 1)), n)


def v_set(n: int) -> IdealSet:
    return IdealSet(frozenset((0, l) for l in range(n - 1)), n)


def t_set(n: int) -> IdealSet:
    return IdealSet(frozenset((k, l) for k in range(n - 1) for l in range(n - 1 - k)), n)


def parse_ideal(spec: str, n: int) -> IdealSet:
    """``"0,0;1,0;0,1"`` or one of the names ``u``, ``v``, ``t``."""
    spec = spec.strip()
    if spec in ("u", "v", "t"):
        return {"u": u_set, "v": v_set, "t": t_set}[spec](n)
    pts = []
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        k, _, l = part.partition(",")
        pts.append((int(k), int(l)))
    return IdealSet(frozenset(pts), n)


def _staircases(width: int, cap: int) -> Iterator[list[int]]:
    """Non-increasing column heights h_0 >= h_1 >= ... with h_k <= width - k."""

    def rec(k: int, prev: int):
        if k >= width:
            yield []
            return
        for h in range(min(prev, width - k) + 1):
            if h == 0:
                yield []
            else:
                for rest in rec(k + 1, h):
                    yield [h] + rest

    yield from rec(0, cap)


def enumerate_ideals(n: int) -> list[IdealSet]:
    """All non-empty downward-closed subsets of ``t_n``, in graded-lex order."""
    if n < 2:
        raise ValueError("n must be at least 2")
    width = n - 1
    out = []
    for heights in _staircases(width, width):
        if not heights:
            continue
        pts = frozenset((k, l) for k, h in enumerate(heights) for l in range(h))
        out.append(IdealSet(pts, n))
    out.sort(key=IdealSet.key)
    return out


def transpose(s: IdealSet) -> IdealSet:
    return IdealSet(frozenset((l, k) for k, l in s.points), s.n)


def v_point(k: int, l: int) -> tuple[int, int, int]:
    b = comb(k + l, k)
    return (b, b * (k + 1), b * l)


def coeff_vector(s: IdealSet) -> tuple[int, int, int]:
    x = y = z = 0
    for k, l in s.points:
        dx, dy, dz = v_point(k, l)
        x, y, z = x + dx, y + dy, z + dz
    return (x, y, z)


# ---------------------------------------------------------------------------
# the inequalities
# ---------------------------------------------------------------------------


def C_expr(ground=ABCD) -> LinExpr:
    """``(a,c‖b) + (b,c‖a)``"""
    return cond_expr(ground, "a", "c", "b") + cond_expr(ground, "b", "c", "a")


def D_expr(ground=ABCD) -> LinExpr:
    """``(a,d‖b) + (b,d‖a)``"""
    return cond_expr(ground, "a", "d", "b") + cond_expr(ground, "b", "d", "a")


def ineq_from_triple(x, y, z) -> LinExpr:
    return (
        ingleton_expr(ABCD, "a", "b", "c", "d") * x
        + cond_expr(ABCD, "a", "b", "c")
        + C_expr() * y
        + D_expr() * z
    )


def book_ineq_A(s: IdealSet) -> LinExpr:
    return ineq_from_triple(*coeff_vector(s))


def book_ineq_B(l: int, n: int | None = None) -> LinExpr:
    if l < 1 or (n is not None and l > n - 1):
        raise ValueError(f"l = {l} out of range")
    return (
        ingleton_expr(ABCD, "b", "d", "a", "c") * l
        + cond_expr(ABCD, "a", "b", "d")
        + D_expr() * Fraction(l * (l + 1), 2)
    )


@dataclass(frozen=True)
class FamilyMember:
    name: str
    expr: LinExpr  # canonical

    def __str__(self):
        return f"{self.name}: {format_inequality(self.expr)}"


def family_members(n: int, include_swaps: bool = False) -> list[FamilyMember]:
    """Members of B_n with provenance names, canonical and de-duplicated.

    Names look like ``A[0,0;1,0]``, ``B[2]`` and, for swapped versions,
    ``A[0,0]^cd``.  The first occurrence of a canonical form keeps its name.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    base = [(f"A[{s.spec()}]", book_ineq_A(s)) for s in enumerate_ideals(n)]
    base += [(f"B[{l}]", book_ineq_B(l, n)) for l in range(1, n)]
    swaps = list(SWAPS) if include_swaps else [""]
    out: list[FamilyMember] = []
    seen = set()
    for sw in swaps:
        for name, e in base:
            e = canonical_form(e.relabel(SWAPS[sw]) if sw else e)
            if e in seen:
                continue
            seen.add(e)
            out.append(FamilyMember(name + (f"^{sw}" if sw else ""), e))
    return out


def generate_family(n: int, include_swaps: bool = False) -> list[LinExpr]:
    return [m.expr for m in family_members(n, include_swaps)]


@dataclass
class FamilyViolation:
    index: int
    expr: LinExpr
    value: Fraction


def check_against(g: Polymatroid, family: Sequence[LinExpr]) -> list[FamilyViolation]:
    """Members of ``family`` that ``g`` violates, with their (negative) values."""
    if g.ground != ABCD and family and g.ground != family[0].ground:
        raise ValueError("ground set mismatch")
    out = []
    for i, e in enumerate(family):
        v = evaluate(e, g)
        if v < 0:
            out.append(FamilyViolation(i, e, v))
    return out


# ---------------------------------------------------------------------------
# Shannon background and redundancy
# ---------------------------------------------------------------------------


def expr_to_coeffs(e: LinExpr) -> dict[str, Fraction]:
    return {e.ground.label(m): c for m, c in e.coeffs.items()}


def coeffs_to_expr(ground, coeffs: Mapping[str, object]) -> LinExpr:
    ground = GroundSet.of(ground)
    return LinExpr(ground, {ground.mask(k): v for k, v in coeffs.items()})


def subset_coordinates(ground) -> tuple[str, ...]:
    ground = GroundSet.of(ground)
    return tuple(ground.label(m) for m in ground.nonempty_subsets())


def shannon_cone(ground=ABCD) -> HCone:
    """Elemental Shannon inequalities as an H-cone over subset-label coordinates."""
    ground = GroundSet.of(ground)
    coords = subset_coordinates(ground)
    cons = [LinIneq(expr_to_coeffs(el.expr)) for el in elemental_inequalities(ground)]
    return HCone(coords, tuple(cons), frozenset(coords))


def remove_redundant(
    family: Sequence[LinExpr],
    background: HCone | None = None,
    order: Sequence[int] | None = None,
) -> list[LinExpr]:
    """Drop members implied by the background plus the remaining members.

    A member ``e`` is dropped when ``e >= 0`` is a non-negative combination of
    the background rows and the other surviving members (Farkas), which for
    cones inside the orthant is the same as ``min e >= 0`` on the slice
    ``g(N) = 1``.  Members are visited in ``order`` (default: list order);
    the result keeps the original list order.
    """
    if background is None:
        background = shannon_cone(family[0].ground if family else ABCD)
    coords = background.coordinates
    rows = [expr_to_coeffs(e) for e in family]
    alive = [True] * len(family)
    bg = list(background.constraints)
    for i in order if order is not None else range(len(family)):
        others = [LinIneq(rows[j]) for j in range(len(family)) if alive[j] and j != i]
        cone = HCone(coords, tuple(bg + others))
        if is_implied(rows[i], cone):
            alive[i] = False
    return [e for e, a in zip(family, alive) if a]


def combination_certificate(
    target: LinExpr, members: Sequence[LinExpr], background: HCone | None = None
) -> list[tuple[str, Fraction]] | None:
    """Non-negative multipliers writing ``target`` as a combination of ``members``
    and background rows; names are ``member[i]`` / ``shannon[j]``."""
    if background is None:
        background = shannon_cone(target.ground)
    rows = [LinIneq(expr_to_coeffs(e)) for e in members] + list(background.constraints)
    names = [f"member[{i}]" for i in range(len(members))] + [
        f"shannon[{j}]" for j in range(len(background.constraints))
    ]
    sol = _solve_combination(rows, expr_to_coeffs(target), Fraction(0), background.coordinates, with_const=False)
    if sol is None:
        return None
    return [(names[i], y) for i, y in sol]


def _triple_dominated(p, others) -> bool:
    """Is ``p`` >= a convex combination of ``others`` with equal x and (y, z) not smaller?

    Since C and D are Shannon-valid, such a ``p`` gives a redundant inequality.
    """
    from ._simplex import solve

    if not others:
        return False
    rows = [
        ({j: o[0] for j, o in enumerate(others)}, "=", p[0]),
        ({j: o[1] for j, o in enumerate(others)}, "<=", p[1]),
        ({j: o[2] for j, o in enumerate(others)}, "<=", p[2]),
        ({j: 1 for j in range(len(others))}, "=", 1),
    ]
    return solve(len(others), rows).status == "optimal"


def nonredundant_ideals(n: int) -> list[IdealSet]:
    """Ideals of S_n whose first-kind inequality is not implied by Shannon and the
    other first-kind inequalities.

    A cheap geometric test on coefficient triples discards dominated members
    first; the survivors are then settled by exact implication tests.
    """
    ideals = enumerate_ideals(n)
    triples = {}
    for s in ideals:
        triples.setdefault(coeff_vector(s), s)
    keys = sorted(triples)
    survivors = [p for p in keys if not _triple_dominated(p, [q for q in keys if q != p])]
    exprs = [canonical_form(ineq_from_triple(*p)) for p in survivors]
    kept = remove_redundant(exprs)
    keep_set = set(kept)
    return [triples[p] for p, e in zip(survivors, exprs) if e in keep_set]


def plot_data(n: int) -> list[tuple[IdealSet, tuple[int, int, int], Fraction, Fraction]]:
    """``(s, v_s, y_s/x_s, z_s/x_s)`` for the non-redundant first-kind members."""
    out = []
    for s in nonredundant_ideals(n):
        x, y, z = coeff_vector(s)
        out.append((s, (x, y, z), Fraction(y, x), Fraction(z, x)))
    out.sort(key=lambda r: (r[2], r[3]))
    return out


def plot_csv(n: int) -> str:
    lines = ["ideal,x,y,z,y_over_x,z_over_x"]
    for s, (x, y, z), px, pz in plot_data(n):
        lines.append(f'"{s.spec()}",{x},{y},{z},{_q(px)},{_q(pz)}')
    return "\n".join(lines) + "\n"


def _q(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------


def format_inequality(e: LinExpr) -> str:
    """``"1*ab + 1*ac - 1*abc - 1*a >= 0"`` with graded-lex term order."""
    parts = []
    for i, (m, c) in enumerate(e.items()):
        term = f"{_q(abs(c))}*{e.ground.label(m)}"
        if i == 0:
            parts.append(term if c > 0 else "-" + term)
        else:
            parts.append((" + " if c > 0 else " - ") + term)
    return ("".join(parts) or "0") + " >= 0"


_TERM = re.compile(r"([+\-−])?\s*([0-9]+(?:/[0-9]+)?)\s*\*\s*([A-Za-z0-9_]+)")


def parse_inequality(text: str, ground=ABCD) -> LinExpr:
    ground = GroundSet.of(ground)
    text = text.strip()
    for rel in (">= 0", "≥ 0"):
        if text.endswith(rel):
            text = text[: -len(rel)].strip()
            break
    else:
        raise ValueError(f"inequality must end with '>= 0': {text!r}")
    coeffs: dict[int, Fraction] = {}
    pos = 0
    text = text.replace("−", "-")
    if text == "0":
        return LinExpr(ground, {})
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse term at {text[pos:]!r}")
        sign = -1 if m.group(1) == "-" else 1
        mask = ground.parse(m.group(3))
        coeffs[mask] = coeffs.get(mask, Fraction(0)) + sign * Fraction(m.group(2))
        pos = m.end()
        while pos < len(text) and text[pos] == " ":
            pos += 1
    return LinExpr(ground, coeffs)


def export_family(family: Iterable[LinExpr]) -> str:
    return "".join(format_inequality(e) + "\n" for e in family)


def parse_family(text: str, ground=ABCD) -> list[LinExpr]:
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(parse_inequality(line, ground))
    return out
