"""Exact polyhedral cones: LP feasibility and optimisation, implication with
Farkas certificates, Fourier-Motzkin projection and facet extraction.

Coordinates are named by strings.  A cone is an :class:`HCone`: homogeneous
constraints ``a·x >= 0`` and ``a·x = 0``.  ``HCone.nonneg`` lists
coordinates the caller guarantees to be non-negative on the whole cone; the
primal LPs use them as variable bounds, nothing else relies on them.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from gmpy2 import mpq

from . import _hint, _simplex
from .core import to_fraction

log = logging.getLogger(__name__)

GE = ">="
EQ = "="


def _q(v) -> Fraction:
    return to_fraction(v)


@dataclass(frozen=True)
class LinIneq:
    """``sum coeffs[name]*x[name] + const  (>= | =)  0``."""

    coeffs: Mapping[str, Fraction]
    relation: str = GE
    const: Fraction = Fraction(0)

    def __post_init__(self):
        if self.relation not in (GE, EQ):
            raise ValueError(f"relation must be '>=' or '=', got {self.relation!r}")
        clean = {}
        for k, v in self.coeffs.items():
            v = _q(v)
            if v:
                clean[k] = v
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "const", _q(self.const))

    def __hash__(self):
        return hash((frozenset(self.coeffs.items()), self.relation, self.const))

    def __eq__(self, other):
        return (
            isinstance(other, LinIneq)
            and self.coeffs == other.coeffs
            and self.relation == other.relation
            and self.const == other.const
        )

    @property
    def homogeneous(self) -> bool:
        return self.const == 0

    def value(self, point: Mapping[str, object]) -> Fraction:
        return sum((c * _q(point.get(k, 0)) for k, c in self.coeffs.items()), self.const)

    def satisfied(self, point: Mapping[str, object]) -> bool:
        v = self.value(point)
        return v == 0 if self.relation == EQ else v >= 0

    def scaled(self, q) -> "LinIneq":
        q = _q(q)
        if self.relation == GE and q <= 0:
            raise ValueError("inequalities only scale by positive factors")
        return LinIneq({k: q * v for k, v in self.coeffs.items()}, self.relation, q * self.const)

    def negated(self) -> "LinIneq":
        if self.relation == GE:
            raise ValueError("negating an inequality flips its meaning")
        return LinIneq({k: -v for k, v in self.coeffs.items()}, EQ, -self.const)

    def canonical(self) -> "LinIneq":
        """Coprime integer coefficients; equalities also get a positive leading term."""
        vals = list(self.coeffs.values()) + ([self.const] if self.const else [])
        if not vals:
            return self
        den = 1
        for v in vals:
            den = den * v.denominator // math.gcd(den, v.denominator)
        g = 0
        for v in vals:
            g = math.gcd(g, int(v * den))
        s = Fraction(den, g)
        if self.relation == EQ and self.coeffs:
            lead = self.coeffs[min(self.coeffs)]
            if lead < 0:
                s = -s
        return LinIneq({k: s * v for k, v in self.coeffs.items()}, self.relation, s * self.const)

    def key(self):
        c = self.canonical()
        return (c.relation, tuple(sorted(c.coeffs.items())), c.const)

    def to_text(self) -> str:
        terms = " ".join(f"{k}:{_fmt(v)}" for k, v in sorted(self.coeffs.items()))
        if self.const:
            terms += f" const:{_fmt(self.const)}"
        return f"{terms or '0'} {self.relation} 0"

    def __str__(self) -> str:
        return self.to_text()


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def ge(coeffs: Mapping[str, object], const=0) -> LinIneq:
    return LinIneq(dict(coeffs), GE, const)


def eq(coeffs: Mapping[str, object], const=0) -> LinIneq:
    return LinIneq(dict(coeffs), EQ, const)


@dataclass(frozen=True)
class HCone:
    coordinates: tuple[str, ...]
    constraints: tuple[LinIneq, ...]
    nonneg: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "coordinates", tuple(self.coordinates))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "nonneg", frozenset(self.nonneg))
        names = set(self.coordinates)
        if len(names) != len(self.coordinates):
            raise ValueError("duplicate coordinate names")
        for c in self.constraints:
            if not c.homogeneous:
                raise ValueError(f"cone constraints must be homogeneous: {c}")
            bad = set(c.coeffs) - names
            if bad:
                raise ValueError(f"constraint mentions undeclared coordinates {sorted(bad)}")
        if not self.nonneg <= names:
            raise ValueError("nonneg names undeclared coordinates")

    @property
    def inequalities(self) -> list[LinIneq]:
        return [c for c in self.constraints if c.relation == GE]

    @property
    def equalities(self) -> list[LinIneq]:
        return [c for c in self.constraints if c.relation == EQ]

    def contains(self, point: Mapping[str, object]) -> bool:
        return all(c.satisfied(point) for c in self.constraints)

    def to_text(self) -> str:
        lines = ["coordinates " + " ".join(self.coordinates)]
        if self.nonneg:
            lines.append("nonneg " + " ".join(k for k in self.coordinates if k in self.nonneg))
        lines += [c.to_text() for c in self.constraints]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "HCone":
        coords: list[str] | None = None
        nonneg: list[str] = []
        cons = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("coordinates"):
                coords = line.split()[1:]
                continue
            if line.startswith("nonneg"):
                nonneg = line.split()[1:]
                continue
            cons.append(parse_constraint(line))
        if coords is None:
            raise ValueError("missing 'coordinates' line")
        return cls(tuple(coords), tuple(cons), frozenset(nonneg))


def parse_constraint(line: str) -> LinIneq:
    """Parse ``"a:1 ab:-1/2 >= 0"`` style lines."""
    toks = line.split()
    if len(toks) < 3 or toks[-1] != "0" or toks[-2] not in (GE, EQ):
        raise ValueError(f"malformed constraint line {line!r}")
    rel = toks[-2]
    coeffs: dict[str, Fraction] = {}
    const = Fraction(0)
    for t in toks[:-2]:
        if t == "0":
            continue
        name, _, val = t.rpartition(":")
        if not name:
            raise ValueError(f"malformed term {t!r}")
        if name == "const":
            const += Fraction(val)
        else:
            if name in coeffs:
                raise ValueError(f"coordinate {name!r} repeated")
            coeffs[name] = Fraction(val)
    return LinIneq(coeffs, rel, const)


# ---------------------------------------------------------------------------
# LP layer
# ---------------------------------------------------------------------------


class LPError(RuntimeError):
    pass


@dataclass
class Certificate:
    """Multipliers for constraint rows; ``>=`` rows carry non-negative ones.

    Row tags are ``("cone", i)`` or ``("extra", i)``.
    """

    multipliers: list[tuple[tuple[str, int], Fraction]]

    def combine(self, rows: Mapping[tuple[str, int], LinIneq]) -> tuple[dict[str, Fraction], Fraction]:
        coeffs: dict[str, Fraction] = {}
        const = Fraction(0)
        for tag, y in self.multipliers:
            row = rows[tag]
            if row.relation == GE and y < 0:
                raise LPError(f"negative multiplier on inequality {tag}")
            for k, v in row.coeffs.items():
                coeffs[k] = coeffs.get(k, Fraction(0)) + y * v
            const += y * row.const
        return {k: v for k, v in coeffs.items() if v}, const


@dataclass
class Feasibility:
    feasible: bool
    point: dict[str, Fraction] | None = None
    certificate: Certificate | None = None


@dataclass
class MinResult:
    status: str  # "optimal" | "unbounded" | "infeasible"
    value: Fraction | None = None
    point: dict[str, Fraction] | None = None


@dataclass
class Implication:
    implied: bool
    certificate: Certificate | None = None

    def __bool__(self):
        return self.implied


def _rows_of(cone: HCone, extra: Sequence[LinIneq]) -> dict[tuple[str, int], LinIneq]:
    rows = {("cone", i): c for i, c in enumerate(cone.constraints)}
    rows.update({("extra", i): c for i, c in enumerate(extra)})
    return rows


def _columns(coords: Sequence[str], nonneg: frozenset[str]):
    """Column layout: one column per non-negative coordinate, two (x+ - x-) otherwise."""
    cols: dict[str, tuple[int, int | None]] = {}
    n = 0
    for k in coords:
        if k in nonneg:
            cols[k] = (n, None)
            n += 1
        else:
            cols[k] = (n, n + 1)
            n += 2
    return cols, n


def _expand(coeffs: Mapping[str, Fraction], cols) -> dict[int, mpq]:
    out: dict[int, mpq] = {}
    for k, v in coeffs.items():
        p, m = cols[k]
        v = mpq(v.numerator, v.denominator)
        out[p] = v
        if m is not None:
            out[m] = -v
    return out


def _point(x, coords, cols) -> dict[str, Fraction]:
    pt = {}
    for k in coords:
        p, m = cols[k]
        v = x[p] - (x[m] if m is not None else 0)
        pt[k] = Fraction(int(v.numerator), int(v.denominator))
    return pt


def _primal_rows(rows: Iterable[LinIneq], cols):
    out = []
    for r in rows:
        out.append((_expand(r.coeffs, cols), r.relation, -mpq(r.const.numerator, r.const.denominator)))
    return out


# When set, LPs first ask HiGHS for a float optimum and accept it only after
# exact certification (see _hint); otherwise, or on failure, the exact
# simplex decides.
FLOAT_HINTS = True


def _lp(nvars, rows, objective=None, rule="bland"):
    """Exact LP answer; returns ``(result, float_status)``."""
    status = None
    if FLOAT_HINTS:
        status, res = _hint.solve(nvars, rows, objective)
        if res is not None:
            return res, status
    return _simplex.solve(nvars, rows, objective, rule=rule), status


def lp_feasible(cone: HCone, extra: Sequence[LinIneq] = (), rule: str = "bland") -> Feasibility:
    """Decide whether the cone constraints plus ``extra`` rows have a common point.

    ``extra`` rows may carry constants (e.g. a normalisation or pinned
    coordinates).  A feasible answer carries a point verified by
    substitution; an infeasible one carries a Farkas certificate, i.e.
    multipliers whose combination of the rows is ``0·x + c`` with ``c < 0``,
    verified by re-multiplication.
    """
    coords = cone.coordinates
    for r in extra:
        bad = set(r.coeffs) - set(coords)
        if bad:
            raise ValueError(f"extra row mentions unknown coordinates {sorted(bad)}")
    cols, nvars = _columns(coords, cone.nonneg)
    allrows = list(cone.constraints) + list(extra)
    if FLOAT_HINTS:
        status, res = _hint.solve(nvars, _primal_rows(allrows, cols))
        if res is None and status == "infeasible":
            cert = farkas_infeasibility(cone, extra, rule=rule)
            if cert is not None:
                return Feasibility(False, certificate=cert)
    else:
        res = None
    if res is None:
        res = _simplex.solve(nvars, _primal_rows(allrows, cols), rule=rule)
    if res.status == "optimal":
        pt = _point(res.x, coords, cols)
        for r in allrows:
            if not r.satisfied(pt):
                raise LPError(f"witness fails {r}")
        return Feasibility(True, point=pt)
    cert = farkas_infeasibility(cone, extra, rule=rule)
    if cert is None:
        raise LPError("simplex reported infeasible but no Farkas certificate exists")
    return Feasibility(False, certificate=cert)


def farkas_infeasibility(cone: HCone, extra: Sequence[LinIneq] = (), rule: str = "bland") -> Certificate | None:
    """Multipliers ``y`` with ``sum y_i a_i = 0`` and ``sum y_i c_i = -1``, or None."""
    rows = _rows_of(cone, extra)
    tags = list(rows)
    cert = _solve_combination(
        [rows[t] for t in tags],
        target={},
        target_const=Fraction(-1),
        coords=cone.coordinates,
        rule=rule,
    )
    if cert is None:
        return None
    out = Certificate([(tags[i], y) for i, y in cert])
    coeffs, const = out.combine(rows)
    if coeffs or const >= 0:
        raise LPError("Farkas certificate failed re-multiplication")
    return out


def _separated(rows, target, target_const, coords, with_const) -> bool:
    """Exact proof that no combination of ``rows`` gives the target.

    Looks for ``(x, x0)`` with ``a_i·x + c_i·x0 >= 0`` on inequality rows,
    ``= 0`` on equality rows and ``target·x + target_const·x0 = -1``; any
    such point, verified exactly, rules the combination out.
    """
    names = list(coords) + (["__x0"] if with_const else [])
    cols = {k: (2 * t, 2 * t + 1) for t, k in enumerate(names)}
    nvars = 2 * len(names)

    def lift(coeffs, const):
        d = dict(coeffs)
        if with_const and const:
            d["__x0"] = const
        return _expand(d, cols)

    lp_rows = [(lift(r.coeffs, r.const), r.relation, 0) for r in rows]
    lp_rows.append((lift({k: _q(v) for k, v in target.items()}, _q(target_const)), EQ, -1))
    _, res = _hint.solve(nvars, lp_rows)
    if res is None:
        return False
    x = res.x
    pt = {k: x[p] - x[m] for k, (p, m) in cols.items()}
    for r in rows:
        v = sum((mpq(c.numerator, c.denominator) * pt[k] for k, c in r.coeffs.items()), mpq(0))
        if with_const:
            v += mpq(r.const.numerator, r.const.denominator) * pt["__x0"]
        if v < 0 or (r.relation == EQ and v != 0):
            return False
    t = sum((mpq(_q(c).numerator, _q(c).denominator) * pt[k] for k, c in target.items()), mpq(0))
    if with_const:
        t += mpq(_q(target_const).numerator, _q(target_const).denominator) * pt["__x0"]
    return t < 0


def _solve_combination(rows, target, target_const, coords, rule="bland", with_const=True):
    """Find multipliers (>= 0 on inequality rows) combining ``rows`` into the target."""
    cols = []  # per simplex variable: (row index, sign)
    for i, r in enumerate(rows):
        cols.append((i, 1))
        if r.relation == EQ:
            cols.append((i, -1))
    by_coord: dict[str, dict[int, mpq]] = {k: {} for k in coords}
    const_row: dict[int, mpq] = {}
    for j, (i, s) in enumerate(cols):
        r = rows[i]
        for k, v in r.coeffs.items():
            by_coord[k][j] = mpq(v.numerator, v.denominator) * s
        if with_const and r.const:
            const_row[j] = mpq(r.const.numerator, r.const.denominator) * s
    lp_rows = []
    for k in coords:
        t = _q(target.get(k, 0))
        lp_rows.append((by_coord[k], EQ, mpq(t.numerator, t.denominator)))
    if with_const:
        lp_rows.append((const_row, EQ, mpq(target_const.numerator, target_const.denominator)))
    res = None
    if FLOAT_HINTS:
        status, res = _hint.solve(len(cols), lp_rows)
        if res is None and status == "infeasible" and _separated(rows, target, target_const, coords, with_const):
            return None
    if res is None:
        res = _simplex.solve(len(cols), lp_rows, rule=rule)
    if res.status != "optimal":
        return None
    acc: dict[int, Fraction] = {}
    for j, v in enumerate(res.x):
        if v:
            i, s = cols[j]
            acc[i] = acc.get(i, Fraction(0)) + s * Fraction(int(v.numerator), int(v.denominator))
    return sorted((i, y) for i, y in acc.items() if y)


def default_normalization(cone: HCone) -> LinIneq:
    """``sum of all coordinates = 1``; meaningful for cones inside the orthant."""
    return LinIneq({k: 1 for k in cone.coordinates}, EQ, -1)


def lp_min(
    cone: HCone,
    objective: Mapping[str, object],
    normalization: LinIneq | None = None,
    rule: str = "bland",
) -> MinResult:
    """Exact minimum of ``objective`` over the cone cut by the normalisation row."""
    if normalization is None:
        normalization = default_normalization(cone)
    coords = cone.coordinates
    cols, nvars = _columns(coords, cone.nonneg)
    allrows = list(cone.constraints) + [normalization]
    obj = _expand({k: _q(v) for k, v in objective.items()}, cols)
    res, _ = _lp(nvars, _primal_rows(allrows, cols), obj, rule=rule)
    if res.status == "infeasible":
        return MinResult("infeasible")
    if res.status == "unbounded":
        return MinResult("unbounded")
    pt = _point(res.x, coords, cols)
    for r in allrows:
        if not r.satisfied(pt):
            raise LPError(f"optimal point fails {r}")
    value = sum((_q(v) * pt[k] for k, v in objective.items()), Fraction(0))
    if value != Fraction(int(res.value.numerator), int(res.value.denominator)):
        raise LPError("objective value does not match the optimal point")
    return MinResult("optimal", value, pt)


def is_implied(
    expr: Mapping[str, object] | LinIneq,
    cone: HCone,
    rule: str = "bland",
) -> Implication:
    """Is ``expr >= 0`` valid on the cone?

    Decided by Farkas' lemma: the answer is yes exactly when ``expr`` is a
    combination of the cone's rows with non-negative weights on inequality
    rows.  The weights are returned and re-verified.  For cones in the
    non-negative orthant this agrees with ``lp_min(expr) >= 0`` under the
    sum-of-coordinates normalisation.
    """
    if isinstance(expr, LinIneq):
        if not expr.homogeneous:
            raise ValueError("implication is tested for homogeneous rows")
        target = dict(expr.coeffs)
    else:
        target = {k: _q(v) for k, v in expr.items() if v}
    bad = set(target) - set(cone.coordinates)
    if bad:
        raise ValueError(f"expression mentions unknown coordinates {sorted(bad)}")
    sol = _solve_combination(
        list(cone.constraints), target, Fraction(0), cone.coordinates, rule=rule, with_const=False
    )
    if sol is None:
        return Implication(False)
    cert = Certificate([(("cone", i), y) for i, y in sol])
    coeffs, _ = cert.combine(_rows_of(cone, ()))
    if coeffs != {k: v for k, v in target.items() if v}:
        raise LPError("implication certificate failed re-multiplication")
    return Implication(True, cert)


# ---------------------------------------------------------------------------
# Fourier-Motzkin projection
# ---------------------------------------------------------------------------


class BudgetExceeded(RuntimeError):
    """Raised when a projection runs out of its time or row budget."""

    def __init__(self, message: str, partial: HCone | None = None, stats: dict | None = None):
        super().__init__(message)
        self.partial = partial
        self.stats = stats or {}


@dataclass
class _Budget:
    seconds: float | None = None
    rows: int | None = None
    start: float = field(default_factory=time.monotonic)

    def check(self, nrows: int, partial: Callable[[], HCone | None], stats):
        if self.seconds is not None and time.monotonic() - self.start > self.seconds:
            raise BudgetExceeded(f"time budget of {self.seconds}s exceeded", partial(), stats)
        if self.rows is not None and nrows > self.rows:
            raise BudgetExceeded(f"row budget of {self.rows} exceeded ({nrows} rows)", partial(), stats)


def _int_row(coeffs: Mapping[str, Fraction]) -> dict[str, int]:
    den = 1
    for v in coeffs.values():
        den = den * v.denominator // math.gcd(den, v.denominator)
    ints = {k: int(v * den) for k, v in coeffs.items() if v}
    g = 0
    for v in ints.values():
        g = math.gcd(g, v)
    if g > 1:
        ints = {k: v // g for k, v in ints.items()}
    return ints


def _row_key(row: Mapping[str, int]):
    return tuple(sorted(row.items()))


def implicit_equalities(cone: HCone, rule: str = "bland") -> list[int]:
    """Indices of inequality rows that hold with equality on the whole cone.

    One LP: maximise ``sum s_i`` subject to ``a_i·x >= s_i``, ``0 <= s_i <= 1``.
    At the optimum ``s_i = 1`` exactly for rows that are strict somewhere.
    """
    ineq_idx = [i for i, c in enumerate(cone.constraints) if c.relation == GE]
    if not ineq_idx:
        return []
    coords = cone.coordinates
    cols, nvars = _columns(coords, cone.nonneg)
    s_col = {i: nvars + t for t, i in enumerate(ineq_idx)}
    rows = []
    for i, c in enumerate(cone.constraints):
        r = _expand(c.coeffs, cols)
        if c.relation == GE:
            r[s_col[i]] = mpq(-1)
            rows.append((r, GE, 0))
            rows.append(({s_col[i]: mpq(1)}, "<=", 1))
        else:
            rows.append((r, EQ, 0))
    obj = {s_col[i]: mpq(-1) for i in ineq_idx}
    res, _ = _lp(nvars + len(ineq_idx), rows, obj, rule=rule)
    if res.status != "optimal":
        raise LPError(f"implicit-equality LP ended {res.status}")
    return [i for i in ineq_idx if res.x[s_col[i]] != 1]


def _is_implied_rows(target: Mapping[str, int], rows: Sequence[Mapping[str, int]], coords, rule) -> bool:
    lins = [LinIneq({k: Fraction(v) for k, v in r.items()}) for r in rows]
    sol = _solve_combination(
        lins, {k: Fraction(v) for k, v in target.items()}, Fraction(0), coords, rule=rule, with_const=False
    )
    return sol is not None


def prune_redundant(
    rows: list[dict[str, int]],
    coords: Sequence[str],
    candidates: Iterable[int] | None = None,
    rule: str = "bland",
    jobs: int = 1,
) -> list[dict[str, int]]:
    """Drop rows implied by the remaining ones, visiting ``candidates`` in order.

    ``jobs`` is accepted for interface stability; the implication tests here
    depend on each other's outcome and run sequentially.
    """
    alive = [True] * len(rows)
    order = range(len(rows)) if candidates is None else candidates
    for i in order:
        others = [r for j, r in enumerate(rows) if alive[j] and j != i]
        used = sorted({k for r in others for k in r} | set(rows[i]))
        used = [k for k in coords if k in set(used)]
        if _is_implied_rows(rows[i], others, used, rule):
            alive[i] = False
    return [r for j, r in enumerate(rows) if alive[j]]


@dataclass
class ProjectionStats:
    eliminated: list[str] = field(default_factory=list)
    rows_per_step: list[int] = field(default_factory=list)
    candidates_per_step: list[int] = field(default_factory=list)
    implicit_equalities: int = 0
    substituted: int = 0


def fm_project(
    cone: HCone,
    keep: Sequence[str],
    prune: bool = True,
    budget_seconds: float | None = None,
    budget_rows: int | None = None,
    rule: str = "bland",
    jobs: int = 1,
    stats: ProjectionStats | None = None,
    detect_implicit: bool = True,
) -> HCone:
    """Project the cone onto the ``keep`` coordinates.

    Steps: detect implicit equalities (one LP), substitute all equalities by
    Gaussian elimination, then Fourier-Motzkin on the remaining inequalities.
    Each step eliminates the coordinate minimising ``p*n - p - n`` (p, n =
    rows with positive / negative coefficient), discards combined rows whose
    origin set is larger than the number of eliminated coordinates plus one
    (Kohler's criterion), de-duplicates, and removes redundant new rows by
    exact implication tests.
    """
    keep = list(keep)
    unknown = set(keep) - set(cone.coordinates)
    if unknown:
        raise ValueError(f"keep lists unknown coordinates {sorted(unknown)}")
    stats = stats if stats is not None else ProjectionStats()
    budget = _Budget(budget_seconds, budget_rows)
    keep_set = set(keep)
    order = {k: i for i, k in enumerate(cone.coordinates)}

    constraints = list(cone.constraints)
    if detect_implicit:
        imp = set(implicit_equalities(cone, rule=rule))
        stats.implicit_equalities = len(imp)
        constraints = [
            LinIneq(c.coeffs, EQ) if i in imp else c for i, c in enumerate(constraints)
        ]
    eqs = [dict(c.coeffs) for c in constraints if c.relation == EQ]
    ineqs = [dict(c.coeffs) for c in constraints if c.relation == GE]

    # Gaussian elimination: pivot on eliminable coordinates first
    kept_eqs: list[dict[str, Fraction]] = []
    subst_order: list[tuple[str, dict[str, Fraction]]] = []
    pending = [e for e in eqs if e]
    while pending:
        e = pending.pop(0)
        e = {k: v for k, v in e.items() if v}
        if not e:
            continue
        elim = [k for k in e if k not in keep_set]
        if elim:
            var = max(elim, key=lambda k: order[k])
        else:
            var = max(e, key=lambda k: order[k])
            kept_eqs.append(e)
        piv = e[var]
        # var = -(1/piv) * sum_{k != var} e[k] x_k
        expr = {k: -v / piv for k, v in e.items() if k != var}
        subst_order.append((var, expr))
        pending = [_substitute(p, var, expr) for p in pending]
        ineqs = [_substitute(r, var, expr) for r in ineqs]
        stats.substituted += 1

    rows = []
    seen = {}
    for r in ineqs:
        r = {k: v for k, v in r.items() if v}
        if not r:
            continue
        ir = _int_row(r)
        key = _row_key(ir)
        if key not in seen:
            seen[key] = len(rows)
            rows.append(ir)
    substituted = {var for var, _ in subst_order}
    coords_now = [k for k in cone.coordinates if k not in substituted]
    hist = [frozenset([i]) for i in range(len(rows))]

    def partial():
        return _assemble(keep, rows, kept_eqs, cone)

    if prune and rows:
        before = len(rows)
        keep_idx = _prune_indices(rows, coords_now, range(len(rows)), rule, budget=budget, partial=partial, stats=stats)
        rows = [rows[i] for i in keep_idx]
        hist = [hist[i] for i in keep_idx]
        log.info("initial pruning %d -> %d rows", before, len(rows))

    steps = 0
    while True:
        elim_vars = [k for k in coords_now if k not in keep_set]
        if not elim_vars:
            break
        best = None
        for k in elim_vars:
            p = sum(1 for r in rows if r.get(k, 0) > 0)
            n = sum(1 for r in rows if r.get(k, 0) < 0)
            score = (p * n - p - n, order[k])
            if best is None or score < best[0]:
                best = (score, k, p, n)
        _, var, p, n = best
        steps += 1
        pos = [i for i, r in enumerate(rows) if r.get(var, 0) > 0]
        neg = [i for i, r in enumerate(rows) if r.get(var, 0) < 0]
        zero = [i for i, r in enumerate(rows) if r.get(var, 0) == 0]
        new_rows = [rows[i] for i in zero]
        new_hist = [hist[i] for i in zero]
        seen = {_row_key(r): j for j, r in enumerate(new_rows)}
        fresh: list[int] = []
        for i in pos:
            a = rows[i][var]
            for j in neg:
                b = -rows[j][var]
                h = hist[i] | hist[j]
                if len(h) > steps + 1:
                    continue
                comb: dict[str, int] = {}
                for k, v in rows[i].items():
                    comb[k] = comb.get(k, 0) + b * v
                for k, v in rows[j].items():
                    comb[k] = comb.get(k, 0) + a * v
                comb = {k: v for k, v in comb.items() if v}
                comb.pop(var, None)
                if not comb:
                    continue
                g = 0
                for v in comb.values():
                    g = math.gcd(g, v)
                comb = {k: v // g for k, v in comb.items()}
                key = _row_key(comb)
                if key in seen:
                    jj = seen[key]
                    if len(h) < len(new_hist[jj]):
                        new_hist[jj] = h
                    continue
                seen[key] = len(new_rows)
                fresh.append(len(new_rows))
                new_rows.append(comb)
                new_hist.append(h)
        coords_now = [k for k in coords_now if k != var]
        stats.eliminated.append(var)
        stats.candidates_per_step.append(len(fresh))
        rows, hist = new_rows, new_hist
        budget.check(len(rows), partial, stats)
        if prune and fresh:
            keep_idx = _prune_indices(rows, coords_now, fresh, rule, budget=budget, partial=partial, stats=stats)
            rows = [rows[i] for i in keep_idx]
            hist = [hist[i] for i in keep_idx]
        stats.rows_per_step.append(len(rows))
        log.info("eliminated %s: p=%d n=%d candidates=%d rows=%d", var, p, n, len(fresh), len(rows))

    return _assemble(keep, rows, kept_eqs, cone)


def _prune_indices(rows, coords, candidates, rule, budget=None, partial=None, stats=None) -> list[int]:
    alive = [True] * len(rows)
    for i in candidates:
        others = [r for j, r in enumerate(rows) if alive[j] and j != i]
        if _is_implied_rows(rows[i], others, coords, rule):
            alive[i] = False
        if budget is not None:
            budget.check(sum(alive), partial, stats)
    return [j for j in range(len(rows)) if alive[j]]


def _substitute(row: Mapping[str, Fraction], var: str, expr: Mapping[str, Fraction]) -> dict[str, Fraction]:
    c = row.get(var)
    if not c:
        return dict(row)
    out = {k: v for k, v in row.items() if k != var}
    for k, v in expr.items():
        out[k] = out.get(k, Fraction(0)) + c * v
    return {k: v for k, v in out.items() if v}


def _assemble(keep, rows, kept_eqs, cone) -> HCone:
    cons = [LinIneq({k: Fraction(v) for k, v in r.items()}) for r in rows]
    for e in kept_eqs:
        cons.append(LinIneq(e, EQ).canonical())
    # a partial result may still mention coordinates awaiting elimination
    used = set(keep).union(*(c.coeffs for c in cons))
    coords = tuple(k for k in cone.coordinates if k in used)
    nonneg = frozenset(k for k in coords if k in cone.nonneg)
    return HCone(coords, tuple(cons), nonneg)


def facets_canonical(cone: HCone, rule: str = "bland") -> list[LinIneq]:
    """Irredundant, canonical, de-duplicated constraint list of the cone.

    Equalities are kept (canonical, leading coefficient positive) after
    reduction to an independent set; every returned inequality fails to be
    implied by the other returned constraints.
    """
    eqs = []
    for c in cone.equalities:
        if c.coeffs:
            eqs.append(c.canonical())
    # independent equalities only
    basis: list[dict[str, Fraction]] = []
    kept_eqs = []
    for e in sorted(set(eqs), key=lambda c: c.key()):
        r = dict(e.coeffs)
        for piv, b in basis:
            if r.get(piv):
                f = r[piv] / b[piv]
                r = {k: r.get(k, 0) - f * b.get(k, 0) for k in set(r) | set(b)}
                r = {k: v for k, v in r.items() if v}
        if r:
            basis.append((min(r), r))
            kept_eqs.append(e)
    ineqs = []
    seen = set()
    for c in cone.inequalities:
        if not c.coeffs:
            continue
        cc = c.canonical()
        k = cc.key()
        if k not in seen:
            seen.add(k)
            ineqs.append(cc)
    ineqs.sort(key=lambda c: c.key())
    alive = [True] * len(ineqs)
    for i in range(len(ineqs)):
        others = [c for j, c in enumerate(ineqs) if alive[j] and j != i] + kept_eqs
        sub = HCone(cone.coordinates, tuple(others))
        if is_implied(ineqs[i], sub, rule=rule):
            alive[i] = False
    out = [c for j, c in enumerate(ineqs) if alive[j]] + kept_eqs
    return sorted(out, key=lambda c: c.key())
