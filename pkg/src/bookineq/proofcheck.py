"""Machine check of the necessity proof for the book inequalities.

Everything is done in orbit coordinates of the symmetric n-page cone (see
:mod:`bookineq.bookcone`).  Each inequality used by the proof is given an
explicit certificate: integer or rational multipliers on the rows of
``assemble_cone(n)`` (non-negative on inequality rows, free on the page
independence equalities) whose combination reproduces the inequality
coefficient by coefficient.

The certificates are built the way the proof argues: conditional
expressions ``(I,J‖K)`` are split into elemental instances by the chain
rule, vanishing ones ``(I,J‖ab)`` between disjoint groups of pages are
bounded by a page independence equality, and the claims are assembled from
one-page steps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable, Mapping, Sequence

from .bookcone import ABCD, OrbitCoord, assemble_cone, base_coordinates
from .core import GroundSet, LinExpr, canonical_form, canonical_scale, cond_expr, ingleton_expr
from .inequalities import (
    C_expr,
    D_expr,
    IdealSet,
    book_ineq_A,
    book_ineq_B,
    enumerate_ideals,
    family_members,
    format_inequality,
    parse_inequality,
)
from .polyhedra import EQ, HCone, LinIneq, is_implied

# ---------------------------------------------------------------------------
# orbit expressions
# ---------------------------------------------------------------------------


def _num(q):
    """Integral rationals become ints; integer arithmetic is much faster."""
    if isinstance(q, Fraction) and q.denominator == 1:
        return q.numerator
    return q


class OrbitExpr:
    """Sparse rational functional over orbit coordinate names."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: Mapping[str, object] | None = None):
        self.n = n
        out: dict[str, Fraction] = {}
        for k, v in (coeffs or {}).items():
            if v:
                out[k] = out.get(k, 0) + v
        self.coeffs = {k: _num(v) for k, v in out.items() if v}

    def __add__(self, other: "OrbitExpr") -> "OrbitExpr":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return OrbitExpr(self.n, out)

    def __neg__(self):
        return OrbitExpr(self.n, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, q):
        return OrbitExpr(self.n, {k: q * v for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, OrbitExpr) and self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, frozenset(self.coeffs.items())))

    def is_zero(self) -> bool:
        return not self.coeffs

    def value(self, point: Mapping[str, object]) -> Fraction:
        return sum((Fraction(v) * Fraction(point.get(k, 0)) for k, v in self.coeffs.items()), Fraction(0))

    def __repr__(self):
        terms = " ".join(f"{v:+}*{k}" for k, v in sorted(self.coeffs.items()))
        return f"OrbitExpr(n={self.n}: {terms or '0'})"

    @classmethod
    def from_base(cls, e: LinExpr, n: int) -> "OrbitExpr":
        """Place an expression on abcd onto page 1."""
        bc = base_coordinates()
        return cls(n, {bc[e.ground.label(m)]: c for m, c in e.coeffs.items()})


def coord(spine: str, q: int = 0, r: int = 0, m: int = 0) -> str:
    return OrbitCoord(spine, q, r, m).name


# ---------------------------------------------------------------------------
# concrete subsets of the extended ground, as masks
# bit 0 = a, bit 1 = b, page i (1-based): c_i = bit 2i, d_i = bit 2i+1
# ---------------------------------------------------------------------------

A_BIT, B_BIT = 1, 2


def c_(i: int) -> int:
    return 1 << (2 * i)


def d_(i: int) -> int:
    return 1 << (2 * i + 1)


def page(i: int) -> int:
    return c_(i) | d_(i)


def pages(idx: Iterable[int]) -> int:
    m = 0
    for i in idx:
        m |= page(i)
    return m


def block(k: int, l: int, m: int = 0, start: int = 1) -> int:
    """``c^k d^l (cd)^m`` placed on pages ``start, start+1, ...``."""
    out = 0
    p = start
    for _ in range(k):
        out |= c_(p)
        p += 1
    for _ in range(l):
        out |= d_(p)
        p += 1
    for _ in range(m):
        out |= page(p)
        p += 1
    return out


def mask_coord(mask: int) -> str | None:
    if mask == 0:
        return None
    sp = ("a" if mask & 1 else "") + ("b" if mask & 2 else "")
    rest = mask >> 2
    cnt = [0, 0, 0]
    while rest:
        t = rest & 3
        if t:
            cnt[t - 1] += 1
        rest >>= 2
    return coord(sp, *cnt)


def h_(n: int, mask: int) -> OrbitExpr:
    """The rank of one subset, as an orbit expression."""
    k = mask_coord(mask)
    return OrbitExpr(n, {k: 1} if k else {})


def cond_orbit(n: int, I: int, J: int, K: int) -> OrbitExpr:
    """``(I,J‖K)`` on the extended ground, folded."""
    terms: dict[str, int] = {}
    for m, c in ((I | K, 1), (J | K, 1), (I | J | K, -1), ((I & J) | K, -1)):
        k = mask_coord(m)
        if k:
            terms[k] = terms.get(k, 0) + c
    return OrbitExpr(n, terms)


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low)
        mask ^= low
    return out


def mask_label(mask: int) -> str:
    parts = []
    if mask & 1:
        parts.append("a")
    if mask & 2:
        parts.append("b")
    i = 1
    rest = mask >> 2
    while rest:
        if rest & 1:
            parts.append(f"c_{i}")
        if rest & 2:
            parts.append(f"d_{i}")
        rest >>= 2
        i += 1
    return "".join(parts) or "0"


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


def _key(coeffs: Mapping[str, object]):
    s = canonical_scale([Fraction(v) for v in coeffs.values()])
    return tuple(sorted((k, Fraction(v) * s) for k, v in coeffs.items())), s


class RowIndex:
    """Lookup of cone rows by canonical coefficient pattern."""

    def __init__(self, n: int):
        self.n = n
        sc = assemble_cone(n)
        self.cone = sc.cone
        self.names = sc.row_names
        self.rows = [{k: _num(v) for k, v in c.coeffs.items()} for c in sc.cone.constraints]
        self.is_eq = [c.relation == EQ for c in sc.cone.constraints]
        self._by_key: dict[tuple, tuple[int, Fraction]] = {}
        for i, r in enumerate(self.rows):
            key, s = _key(r)
            self._by_key.setdefault(key, (i, s))
            if self.is_eq[i]:
                nkey, ns = _key({k: -v for k, v in r.items()})
                self._by_key.setdefault(nkey, (i, -ns))

    def find(self, coeffs: Mapping[str, object]) -> tuple[int, Fraction]:
        """``(i, f)`` with ``coeffs == f * row_i``; ``f > 0`` unless row i is an equality."""
        key, s = _key(coeffs)
        try:
            i, rs = self._by_key[key]
        except KeyError:
            raise KeyError(f"no cone row matches {dict(coeffs)}") from None
        return i, _num(rs / s)


@lru_cache(maxsize=None)
def row_index(n: int) -> RowIndex:
    return RowIndex(n)


class CertificateError(AssertionError):
    pass


@dataclass
class Cert:
    """Multipliers on cone rows (row index -> rational)."""

    n: int
    mult: dict[int, Fraction] = field(default_factory=dict)

    def add_row(self, i: int, y) -> None:
        v = self.mult.get(i, 0) + y
        if v:
            self.mult[i] = _num(v)
        else:
            self.mult.pop(i, None)

    def add(self, other: "Cert", y=1) -> "Cert":
        for i, v in other.mult.items():
            self.add_row(i, y * v)
        return self

    def scaled(self, y) -> "Cert":
        return Cert(self.n).add(self, y)

    def combine(self) -> OrbitExpr:
        idx = row_index(self.n)
        out: dict[str, Fraction] = {}
        for i, y in self.mult.items():
            for k, v in idx.rows[i].items():
                out[k] = out.get(k, 0) + y * v
        return OrbitExpr(self.n, out)

    def sign_ok(self) -> bool:
        idx = row_index(self.n)
        return all(idx.is_eq[i] or y > 0 for i, y in self.mult.items())

    def verify(self, target: OrbitExpr) -> bool:
        """Exact re-multiplication check."""
        return self.sign_ok() and self.combine() == target

    def mapped(self, perm: Sequence[tuple[int, Fraction]]) -> "Cert":
        """Transport along a coordinate symmetry given as a row permutation."""
        out = Cert(self.n)
        for i, y in self.mult.items():
            j, f = perm[i]
            out.add_row(j, y * f)
        return out

    def to_json(self) -> list:
        idx = row_index(self.n)
        return [[i, idx.names[i], _fmt(y)] for i, y in sorted(self.mult.items())]


def _fmt(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def cert_cond(n: int, I: int, J: int, K: int, y=1) -> Cert:
    """``y*(I,J‖K) >= 0`` via the chain rule into elemental instances (y >= 0)."""
    if y < 0:
        raise ValueError("conditional expressions enter with non-negative weight")
    cert = Cert(n)
    K2 = (I & J) | K
    I2, J2 = I & ~K2, J & ~K2
    idx = row_index(n)
    ib, jb = _bits(I2), _bits(J2)
    for s, i in enumerate(ib):
        pre_i = sum(ib[:s])
        for t, j in enumerate(jb):
            L = K2 | pre_i | sum(jb[:t])
            e = cond_orbit(n, i, j, L)
            if e.is_zero():
                continue
            r, f = idx.find(e.coeffs)
            cert.add_row(r, y * f)
    return cert


def cert_vanishing(n: int, I: int, J: int, A: Sequence[int], B: Sequence[int], y=1) -> Cert:
    """``-y*(I,J‖ab) >= 0`` for ``I`` inside pages ``A`` and ``J`` inside pages ``B``.

    Uses ``(P_A,P_B‖ab) = 0`` and monotonicity of conditional expressions:
    ``(P_A,P_B‖ab) - (I,J‖ab) = (P_A - I, P_B‖I ab) + (I, P_B - J‖J ab)``.
    """
    PA, PB = pages(A), pages(B)
    if I & ~PA or J & ~PB or set(A) & set(B):
        raise ValueError("sets must lie in disjoint page groups")
    ab = A_BIT | B_BIT
    idx = row_index(n)
    cert = Cert(n)
    E = cond_orbit(n, PA, PB, ab)
    r, f = idx.find(E.coeffs)
    if not idx.is_eq[r]:
        raise CertificateError("page independence row not found")
    cert.add_row(r, -y * f)
    cert.add(cert_cond(n, PA & ~I, PB, I | ab), y)
    cert.add(cert_cond(n, I, PB & ~J, J | ab), y)
    return cert


@dataclass
class Fact:
    """A certified relation ``expr >= 0`` (or ``= 0``) with its certificate(s)."""

    name: str
    expr: OrbitExpr
    relation: str  # ">=" or "="
    cert: Cert  # proves expr >= 0
    cert_rev: Cert | None = None  # proves -expr >= 0 for equalities
    justification: str = ""
    instances: list[str] = field(default_factory=list)

    def verify(self) -> bool:
        ok = self.cert.verify(self.expr)
        if self.relation == "=":
            ok = ok and self.cert_rev is not None and self.cert_rev.verify(-self.expr)
        return ok


def _check(fact: Fact) -> Fact:
    if not fact.verify():
        raise CertificateError(f"certificate for {fact.name} fails re-multiplication")
    return fact


def sm_fact(n: int, name: str, I: int, J: int, K: int) -> Fact:
    e = cond_orbit(n, I, J, K)
    inst = f"({mask_label(I)},{mask_label(J)}|{mask_label(K)})"
    return _check(Fact(name, e, ">=", cert_cond(n, I, J, K), justification="SM", instances=[inst]))


# ---------------------------------------------------------------------------
# claims
# ---------------------------------------------------------------------------


def _lin(n, *terms) -> OrbitExpr:
    out = OrbitExpr(n)
    for c, name in terms:
        out = out + OrbitExpr(n, {name: c})
    return out


def claim_ab(n: int, k: int, l: int, with_cd: bool = False) -> Fact:
    """``ab c^k d^l [(cd)] - ab [(cd)] - k(abc-ab) - l(abd-ab) = 0``.

    Proved one page at a time: adding ``c`` (or ``d``) on a fresh page to
    ``ab X`` adds exactly ``abc - ab`` (``abd - ab``) because the fresh page
    is independent of ``X`` over ``ab``.
    """
    need = k + l + (1 if with_cd else 0)
    if k < 0 or l < 0 or need > n:
        raise ValueError("claim parameters out of range")
    ab = A_BIT | B_BIT
    # lay out: (cd) on page 1 if present, then c's, then d's
    first = 2 if with_cd else 1
    base = page(1) if with_cd else 0
    expr = OrbitExpr(n)
    fwd, rev = Cert(n), Cert(n)
    X = base
    used = first - 1
    steps = [("c", c_)] * k + [("d", d_)] * l
    for _, elem in steps:
        p = used + 1
        new = elem(p)
        # abXe - abX - (abe - ab) = -(e, X‖ab)
        step = -cond_orbit(n, new, X, ab)
        expr = expr + step
        if X:
            fwd.add(cert_vanishing(n, new, X, [p], list(range(1, p)), 1))
            rev.add(cert_cond(n, new, X, ab, 1))
        X |= new
        used = p
    target = (
        h_(n, ab | X)
        - h_(n, ab | base)
        - _lin(n, (k, coord("ab", 1)), (-k, coord("ab")), (l, coord("ab", 0, 1)), (-l, coord("ab")))
    )
    if expr != target:
        raise CertificateError("telescoped steps do not add up to the claim")
    tag = "(cd)" if with_cd else ""
    return _check(Fact(f"claim_ab{tag}({k},{l})", target, "=", fwd, rev, "independence + SM"))


def claim_first(n: int, k: int, l: int, spine: str = "a") -> Fact:
    """``k(xc - x) + l(xd - x) + x - x c^k d^l >= 0`` for ``x`` = a or b."""
    if k < 0 or l < 0 or k + l > n:
        raise ValueError("claim parameters out of range")
    xb = A_BIT if spine == "a" else B_BIT
    cert = Cert(n)
    X = 0
    p = 0
    inst = []
    for elem in [c_] * k + [d_] * l:
        p += 1
        new = elem(p)
        # xe - x >= xXe - xX  is  (e, X‖x) >= 0
        cert.add(cert_cond(n, new, X, xb))
        inst.append(f"({mask_label(new)},{mask_label(X)}|{spine})")
        X |= new
    target = (
        _lin(n, (k, coord(spine, 1)), (-k, coord(spine)), (l, coord(spine, 0, 1)), (-l, coord(spine)))
        + OrbitExpr(n, {coord(spine): 1})
        - h_(n, xb | X)
    )
    return _check(Fact(f"claim_first_{spine}({k},{l})", target, ">=", cert, None, "SM chain", inst))


def claim_second(n: int, k: int, l: int, which: str = "x") -> Fact:
    """The three lower bounds:

    * ``x``: ``c^k d^l (cd) - cd - k(abc-ab) - l(abd-ab) >= 0``
    * ``b``: ``b d^l (cd) - bcd - l(abd-ab) >= 0``
    * ``a``: ``a c d^l - ac - l(abd-ab) >= 0``
    """
    ab = A_BIT | B_BIT
    if which == "x":
        if k + l >= n:
            raise ValueError("claim parameters out of range")
        X = block(k, l, 0, start=2)
        # (cd) on page 1; X on pages 2..; SM: (ab, X‖(cd)) then the claim with (cd)
        sm = cert_cond(n, ab, X, page(1))
        lemma = claim_ab(n, k, l, with_cd=True)
        target = (
            h_(n, X | page(1))
            - OrbitExpr(n, {coord("", 0, 0, 1): 1})
            - _lin(n, (k, coord("ab", 1)), (-k, coord("ab")), (l, coord("ab", 0, 1)), (-l, coord("ab")))
        )
        inst = [f"(ab,{mask_label(X)}|{mask_label(page(1))})"]
        name = f"claim_second({k},{l})"
    elif which == "b":
        if l >= n:
            raise ValueError("claim parameters out of range")
        X = block(0, l, 0, start=2)
        sm = cert_cond(n, A_BIT, X, B_BIT | page(1))
        lemma = claim_ab(n, 0, l, with_cd=True)
        target = (
            h_(n, B_BIT | X | page(1))
            - OrbitExpr(n, {coord("b", 0, 0, 1): 1})
            - _lin(n, (l, coord("ab", 0, 1)), (-l, coord("ab")))
        )
        inst = [f"(a,{mask_label(X)}|{mask_label(B_BIT | page(1))})"]
        name = f"claim_second_b({l})"
    elif which == "a":
        if l + 1 > n:
            raise ValueError("claim parameters out of range")
        X = block(0, l, 0, start=2)
        sm = cert_cond(n, B_BIT, X, A_BIT | c_(1))
        lemma = claim_ab(n, 1, l)
        target = (
            h_(n, A_BIT | c_(1) | X)
            - OrbitExpr(n, {coord("a", 1): 1})
            - _lin(n, (l, coord("ab", 0, 1)), (-l, coord("ab")))
        )
        inst = [f"(b,{mask_label(X)}|{mask_label(A_BIT | c_(1))})"]
        name = f"claim_second_a({l})"
    else:
        raise ValueError(which)
    cert = Cert(n).add(sm).add(lemma.cert)
    return _check(Fact(name, target, ">=", cert, None, "SM + claim_ab", inst))


def claim_exprs(k: int, l: int, n: int) -> list[Fact]:
    """All claims that apply at ``(k, l)`` for n pages, each with certificates."""
    out = []
    if k + l <= n:
        out.append(claim_ab(n, k, l))
        out.append(claim_first(n, k, l, "a"))
        out.append(claim_first(n, k, l, "b"))
    if k + l <= n - 1:
        out.append(claim_ab(n, k, l, with_cd=True))
    if k + l < n:
        out.append(claim_second(n, k, l, "x"))
        if k == 0:
            out.append(claim_second(n, 0, l, "b"))
            out.append(claim_second(n, 0, l, "a"))
    if not out:
        raise ValueError("no claim applies to these parameters")
    return out


# ---------------------------------------------------------------------------
# the crucial inequalities and their ledgers
# ---------------------------------------------------------------------------


def ab_cond(n: int, X: int) -> OrbitExpr:
    """``(a,b‖X)``"""
    return cond_orbit(n, A_BIT, B_BIT, X)


def crucial_A(k: int, l: int, n: int) -> OrbitExpr:
    """Left side minus right side of the first crucial inequality."""
    if k < 0 or l < 0 or k + l >= n:
        raise ValueError("need k + l < n")
    return _crucial_A(k, l, n)


@lru_cache(maxsize=None)
def _crucial_A(k: int, l: int, n: int) -> OrbitExpr:
    X = block(k, l)
    lhs = (
        OrbitExpr.from_base(ingleton_expr(ABCD, "a", "b", "c", "d"), n)
        + OrbitExpr.from_base(C_expr(), n) * k
        + OrbitExpr.from_base(D_expr(), n) * l
        + ab_cond(n, X)
    )
    rhs = ab_cond(n, block(k + 1, l)) + ab_cond(n, block(k, l + 1)) + cond_orbit(n, c_(n), d_(n), X)
    return lhs - rhs


def crucial_B(l: int, n: int) -> OrbitExpr:
    """Left side minus right side of the second crucial inequality."""
    if l < 0 or l >= n:
        raise ValueError("need l < n")
    Dl = block(0, l)
    lhs = (
        OrbitExpr.from_base(ingleton_expr(ABCD, "b", "d", "a", "c"), n)
        + OrbitExpr.from_base(D_expr(), n) * l
        + ab_cond(n, Dl)
    )
    rhs = (
        ab_cond(n, block(0, l + 1))
        + cond_orbit(n, A_BIT, c_(n), Dl)
        + cond_orbit(n, B_BIT, d_(n), c_(n) | Dl)
    )
    return lhs - rhs


@dataclass
class LedgerRow:
    expr: OrbitExpr
    relation: str
    fact: Fact
    label: str


@dataclass
class ProofReport:
    name: str
    ok: bool
    rows: list[LedgerRow] = field(default_factory=list)
    message: str = ""
    cert: Cert | None = None
    lp_checked: bool = False

    def __bool__(self):
        return self.ok

    def summary(self) -> str:
        head = f"{self.name}: {'ok' if self.ok else 'FAILED'}"
        if self.message:
            head += f" ({self.message})"
        return head

    def audit(self) -> list[str]:
        out = []
        for r in self.rows:
            inst = "; ".join(r.fact.instances)
            out.append(f"{r.label:<48} {r.relation:>2} 0   [{r.fact.justification}] {inst}")
        return out


def _negated(f: Fact) -> Fact:
    """``-expr = 0`` from ``expr = 0``."""
    return Fact(f.name + "(neg)", -f.expr, "=", f.cert_rev, f.cert, f.justification, f.instances)


def _shift(f: Fact, extra: OrbitExpr, extra_cert: Cert, extra_rev: Cert | None = None) -> Fact:
    return Fact(
        f.name,
        f.expr + extra,
        f.relation,
        Cert(f.n if hasattr(f, "n") else extra_cert.n).add(f.cert).add(extra_cert),
        None if f.cert_rev is None else Cert(extra_cert.n).add(f.cert_rev).add(extra_rev),
        f.justification,
        f.instances,
    )


def ledger_rows_A(k: int, l: int, n: int) -> list[LedgerRow]:
    if k < 0 or l < 0 or k + l >= n:
        raise ValueError("need k + l < n")
    X = block(k, l)
    rows = []
    # 1, 2: submodularity
    f1 = sm_fact(n, "SM1", c_(n), X, A_BIT)
    rows.append(LedgerRow(f1.expr, ">=", f1, "ac - a + ac^kd^l - ac^{k+1}d^l"))
    f2 = sm_fact(n, "SM2", d_(n), X, B_BIT)
    rows.append(LedgerRow(f2.expr, ">=", f2, "bd - b + bc^kd^l - bc^kd^{l+1}"))
    # 3: -abd + ab - abc^kd^l + abc^kd^{l+1} = 0  (difference of two claim_ab instances)
    f3 = _diff_claims(claim_ab(n, k, l + 1), claim_ab(n, k, l), n, "row3")
    rows.append(LedgerRow(f3.expr, "=", f3, "-abd + ab - abc^kd^l + abc^kd^{l+1}"))
    # 4: -abc - k(abc-ab) - l(abd-ab) + abc^{k+1}d^l = 0
    f4 = claim_ab(n, k + 1, l)
    rows.append(LedgerRow(f4.expr, "=", f4, "-abc - k(abc-ab) - l(abd-ab) + abc^{k+1}d^l"))
    # 5, 6: first-case claims
    f5 = claim_first(n, k, l + 1, "a")
    rows.append(LedgerRow(f5.expr, ">=", f5, "ad + k(ac-a) + l(ad-a) - ac^kd^{l+1}"))
    f6 = claim_first(n, k + 1, l, "b")
    rows.append(LedgerRow(f6.expr, ">=", f6, "bc + k(bc-b) + l(bd-b) - bc^{k+1}d^l"))
    # 7: second claim
    f7 = claim_second(n, k, l, "x")
    rows.append(LedgerRow(f7.expr, ">=", f7, "-cd - k(abc-ab) - l(abd-ab) + c^kd^l(cd)"))
    return rows


def _diff_claims(big: Fact, small: Fact, n: int, name: str) -> Fact:
    """``big - small`` for two equality facts."""
    expr = big.expr - small.expr
    fwd = Cert(n).add(big.cert).add(small.cert_rev)
    rev = Cert(n).add(big.cert_rev).add(small.cert)
    return _check(Fact(name, expr, "=", fwd, rev, "claim_ab"))


def ledger_rows_B(l: int, n: int) -> list[LedgerRow]:
    if l < 0 or l >= n:
        raise ValueError("need l < n")
    Dl = block(0, l)
    rows = []
    # 1: cd - d - d^l(cd) + d^{l+1} >= 0 : (c_n, d^l‖d_n)
    f1 = sm_fact(n, "SM1", c_(n), Dl, d_(n))
    rows.append(LedgerRow(f1.expr, ">=", f1, "cd - d - d^l(cd) + d^{l+1}"))
    f2 = sm_fact(n, "SM2", d_(n), Dl, B_BIT)
    rows.append(LedgerRow(f2.expr, ">=", f2, "bd - b + bd^l - bd^{l+1}"))
    f3 = _diff_claims(claim_ab(n, 0, l + 1), claim_ab(n, 0, l), n, "row3")
    rows.append(LedgerRow(f3.expr, "=", f3, "-abd + ab - abd^l + abd^{l+1}"))
    f4 = claim_first(n, 0, l + 1, "a")
    rows.append(LedgerRow(f4.expr, ">=", f4, "ad + l(ad-a) - ad^{l+1}"))
    f5 = claim_first(n, 1, l, "b")
    rows.append(LedgerRow(f5.expr, ">=", f5, "bc + l(bd-b) - bcd^l"))
    f6 = claim_second(n, 0, l, "a")
    rows.append(LedgerRow(f6.expr, ">=", f6, "-ac - l(abd-ab) + acd^l"))
    f7 = claim_second(n, 0, l, "b")
    rows.append(LedgerRow(f7.expr, ">=", f7, "-bcd - l(abd-ab) + bd^l(cd)"))
    return rows


def _ledger_check(name: str, rows: list[LedgerRow], target: OrbitExpr, n: int, lp: bool) -> ProofReport:
    rep = ProofReport(name, True, rows)
    total = OrbitExpr(n)
    cert = Cert(n)
    for r in rows:
        if not r.fact.verify():
            rep.ok = False
            rep.message = f"row '{r.label}' not certified"
            return rep
        total = total + r.expr
        cert.add(r.fact.cert)
    if total != target:
        rep.ok = False
        diff = total - target
        rep.message = f"sum of rows differs from the crucial inequality by {diff.coeffs}"
        return rep
    if not cert.verify(target):
        rep.ok = False
        rep.message = "combined certificate fails"
        return rep
    rep.cert = cert
    if lp:
        cone = assemble_cone(n).cone
        for r in rows:
            if not is_implied(dict(r.expr.coeffs), cone):
                rep.ok = False
                rep.message = f"LP does not confirm row '{r.label}'"
                return rep
            if r.relation == "=" and not is_implied(dict((-r.expr).coeffs), cone):
                rep.ok = False
                rep.message = f"LP does not confirm equality row '{r.label}'"
                return rep
        rep.lp_checked = True
    return rep


def ledger_check_A(k: int, l: int, n: int, lp: bool = False, rows: list[LedgerRow] | None = None) -> ProofReport:
    rows = ledger_rows_A(k, l, n) if rows is None else rows
    return _ledger_check(f"ledger_A({k},{l}) n={n}", rows, crucial_A(k, l, n), n, lp)


def ledger_check_B(l: int, n: int, lp: bool = False, rows: list[LedgerRow] | None = None) -> ProofReport:
    rows = ledger_rows_B(l, n) if rows is None else rows
    return _ledger_check(f"ledger_B({l}) n={n}", rows, crucial_B(l, n), n, lp)


@lru_cache(maxsize=None)
def _crucial_A_cert(k: int, l: int, n: int) -> Cert:
    rep = ledger_check_A(k, l, n)
    if not rep.ok:
        raise CertificateError(rep.summary())
    return rep.cert


@lru_cache(maxsize=None)
def _crucial_B_cert(l: int, n: int) -> Cert:
    rep = ledger_check_B(l, n)
    if not rep.ok:
        raise CertificateError(rep.summary())
    return rep.cert


# ---------------------------------------------------------------------------
# telescoping
# ---------------------------------------------------------------------------


@dataclass
class TelescopeReport:
    name: str
    ok: bool
    leftovers: dict[str, int] = field(default_factory=dict)  # term -> net non-negative count
    cancelled: list[str] = field(default_factory=list)
    message: str = ""
    cert: Cert | None = None
    target: OrbitExpr | None = None

    def __bool__(self):
        return self.ok


def telescope_check(s: IdealSet, n: int | None = None) -> TelescopeReport:
    """``book_ineq_A(s) = sum binom(k+l,k) crucial_A(k+1,l) + leftovers``.

    Leftovers are ``(a,b‖c^K d^L)`` and ``(c_n,d_n‖c^K d^L)`` terms with
    non-negative net counts; cancellation of the others is Pascal's rule.
    """
    n = s.n if n is None else n
    name = f"A[{s.spec()}] n={n}"
    if any(k + l > n - 2 for k, l in s.points):
        return TelescopeReport(name, False, message="ideal not inside t_n")
    # net count of (a,b‖c^K d^L) on the right side minus the left side
    net: dict[tuple[int, int], int] = {}
    cn: dict[tuple[int, int], int] = {}
    for k, l in s.points:
        w = comb(k + l, k)
        K = k + 1
        net[(K, l)] = net.get((K, l), 0) - w
        net[(K + 1, l)] = net.get((K + 1, l), 0) + w
        net[(K, l + 1)] = net.get((K, l + 1), 0) + w
        cn[(K, l)] = cn.get((K, l), 0) + w
    rep = TelescopeReport(name, True)
    for (K, L), v in sorted(net.items()):
        if (K, L) == (1, 0):
            if v != -1:
                rep.ok = False
                rep.message = f"(a,b|c) has net count {v}, expected -1"
                return rep
            continue
        if v < 0:
            rep.ok = False
            rep.message = f"(a,b|c^{K}d^{L}) left with negative count {v}"
            return rep
        if v == 0:
            rep.cancelled.append(f"(a,b|c^{K}d^{L})")
        else:
            rep.leftovers[f"(a,b|c^{K}d^{L})"] = v
    for (K, L), v in sorted(cn.items()):
        rep.leftovers[f"(c_n,d_n|c^{K}d^{L})"] = v
    # exact identity in orbit coordinates and the full certificate
    target = OrbitExpr.from_base(book_ineq_A(s), n)
    total = OrbitExpr(n)
    cert = Cert(n)
    for k, l in s.points:
        w = comb(k + l, k)
        total = total + crucial_A(k + 1, l, n) * w
        cert.add(_crucial_A_cert(k + 1, l, n), w)
    for (K, L), v in net.items():
        if (K, L) == (1, 0) or v == 0:
            continue
        X = block(K, L)
        total = total + ab_cond(n, X) * v
        cert.add(cert_cond(n, A_BIT, B_BIT, X), v)
    for (K, L), v in cn.items():
        X = block(K, L)
        total = total + cond_orbit(n, c_(n), d_(n), X) * v
        cert.add(cert_cond(n, c_(n), d_(n), X), v)
    if total != target:
        rep.ok = False
        rep.message = f"cancellation mismatch: {(total - target).coeffs}"
        return rep
    if not cert.verify(target):
        rep.ok = False
        rep.message = "certificate fails re-multiplication"
        return rep
    rep.cert = cert
    rep.target = target
    return rep


@lru_cache(maxsize=None)
def _telescope_cached(points, n: int) -> TelescopeReport:
    return telescope_check(IdealSet(points, n), n)


def telescope_check_B(l: int, n: int) -> TelescopeReport:
    """``book_ineq_B(l) = sum_{j=1..l} crucial_B(j) + leftovers``."""
    name = f"B[{l}] n={n}"
    if not 1 <= l <= n - 1:
        return TelescopeReport(name, False, message="l out of range")
    target = OrbitExpr.from_base(book_ineq_B(l), n)
    total = OrbitExpr(n)
    cert = Cert(n)
    rep = TelescopeReport(name, True)
    for j in range(1, l + 1):
        total = total + crucial_B(j, n)
        cert.add(_crucial_B_cert(j, n))
        Dj = block(0, j)
        for term, (I, J, K) in (
            (f"(a,c|d^{j})", (A_BIT, c_(n), Dj)),
            (f"(b,d_n|c_nd^{j})", (B_BIT, d_(n), c_(n) | Dj)),
        ):
            total = total + cond_orbit(n, I, J, K)
            cert.add(cert_cond(n, I, J, K))
            rep.leftovers[term] = 1
    X = block(0, l + 1)
    total = total + ab_cond(n, X)
    cert.add(cert_cond(n, A_BIT, B_BIT, X))
    rep.leftovers[f"(a,b|d^{l + 1})"] = 1
    if total != target:
        rep.ok = False
        rep.message = f"cancellation mismatch: {(total - target).coeffs}"
        return rep
    if not cert.verify(target):
        rep.ok = False
        rep.message = "certificate fails re-multiplication"
        return rep
    rep.cert = cert
    rep.target = target
    return rep


# ---------------------------------------------------------------------------
# whole family
# ---------------------------------------------------------------------------

_SWAP_MAPS = {
    "ab": lambda oc: OrbitCoord({"a": "b", "b": "a"}.get(oc.spine, oc.spine), oc.q, oc.r, oc.m),
    "cd": lambda oc: OrbitCoord(oc.spine, oc.r, oc.q, oc.m),
    "ab,cd": lambda oc: OrbitCoord({"a": "b", "b": "a"}.get(oc.spine, oc.spine), oc.r, oc.q, oc.m),
}


@lru_cache(maxsize=None)
def row_permutation(n: int, swap: str) -> tuple[tuple[int, Fraction], ...]:
    """Image of every cone row under a coordinate symmetry, as ``(row, factor)``."""
    idx = row_index(n)
    fn = _SWAP_MAPS[swap]
    out = []
    for r in idx.rows:
        img = {fn(OrbitCoord.parse(k)).name: v for k, v in r.items()}
        out.append(idx.find(img))
    return tuple(out)


@dataclass
class MemberCertificate:
    name: str
    expr: LinExpr  # canonical inequality on abcd
    cert: Cert

    def verify(self) -> bool:
        return self.cert.verify(OrbitExpr.from_base(self.expr, self.cert.n))


def certify_member(name: str, expr: LinExpr, n: int) -> MemberCertificate:
    """Certificate for a (possibly swapped) family member given its name."""
    base, _, swap = name.partition("^")
    kind, spec = base[0], base[2:-1]
    if kind == "A":
        from .inequalities import parse_ideal

        s = parse_ideal(spec, n)
        rep = _telescope_cached(s.points, n)
        raw = book_ineq_A(s)
    else:
        l = int(spec)
        rep = telescope_check_B(l, n)
        raw = book_ineq_B(l)
    if not rep.ok:
        raise CertificateError(f"{name}: {rep.message}")
    cert = rep.cert
    if swap:
        cert = cert.mapped(row_permutation(n, swap))
        from .inequalities import SWAPS

        raw = raw.relabel(SWAPS[swap])
    # expr is a positive multiple of raw
    factor = None
    for m, c in expr.coeffs.items():
        factor = c / raw[m]
        break
    if factor is None or factor <= 0 or raw * factor != expr:
        raise CertificateError(f"{name}: canonical form is not a positive multiple of the raw inequality")
    cert = cert.scaled(factor)
    mc = MemberCertificate(name, expr, cert)
    if not mc.verify():
        raise CertificateError(f"{name}: certificate fails re-multiplication")
    return mc


def certify_family(n: int, include_swaps: bool = True) -> list[MemberCertificate]:
    return [certify_member(m.name, m.expr, n) for m in family_members(n, include_swaps)]


@dataclass
class ProofRun:
    n: int
    ledgers_A: list[ProofReport]
    ledgers_B: list[ProofReport]
    telescopes: list[TelescopeReport]
    members: list[MemberCertificate]

    @property
    def ok(self) -> bool:
        return (
            all(r.ok for r in self.ledgers_A)
            and all(r.ok for r in self.ledgers_B)
            and all(t.ok for t in self.telescopes)
            and all(m.verify() for m in self.members)
        )


def verify_proof(n: int, ideal: IdealSet | None = None, include_swaps: bool = True, lp: bool = False) -> ProofRun:
    """Run ledgers for every admissible (k, l), telescoping for every ideal
    (or just ``ideal``), and build and verify a certificate for every
    family member."""
    la = [ledger_check_A(k, l, n, lp=lp) for k in range(n) for l in range(n - k)]
    lb = [ledger_check_B(l, n, lp=lp) for l in range(n)]
    if ideal is not None:
        tel = [telescope_check(ideal, n)]
        members = []
        for m in family_members(n, include_swaps):
            if m.name.partition("^")[0] == f"A[{ideal.spec()}]":
                members.append(certify_member(m.name, m.expr, n))
    else:
        tel = [_telescope_cached(s.points, n) for s in enumerate_ideals(n)]
        tel += [telescope_check_B(l, n) for l in range(1, n)]
        members = certify_family(n, include_swaps)
    return ProofRun(n, la, lb, tel, members)


# ---------------------------------------------------------------------------
# certificate file format
# ---------------------------------------------------------------------------


def certificates_to_json(n: int, members: Sequence[MemberCertificate]) -> str:
    doc = {
        "pages": n,
        "cone": f"symmetric {n}-page cone over ab, rows as listed by assemble_cone",
        "certificates": [
            {"name": m.name, "inequality": format_inequality(m.expr), "multipliers": m.cert.to_json()}
            for m in members
        ],
    }
    return json.dumps(doc, indent=1)


@dataclass
class VerifyResult:
    name: str
    ok: bool
    message: str = ""


def verify_certificate_file(text: str) -> list[VerifyResult]:
    """Independently re-multiply every certificate in a file."""
    doc = json.loads(text)
    n = int(doc["pages"])
    cone = assemble_cone(n).cone
    names = assemble_cone(n).row_names
    bc = base_coordinates()
    out = []
    for entry in doc["certificates"]:
        name = entry.get("name", "?")
        e = parse_inequality(entry["inequality"], ABCD)
        target = {bc[ABCD.label(m)]: c for m, c in e.coeffs.items()}
        acc: dict[str, Fraction] = {}
        bad = ""
        for i, rname, y in entry["multipliers"]:
            i = int(i)
            y = Fraction(y)
            if not 0 <= i < len(cone.constraints):
                bad = f"row {i} out of range"
                break
            if names[i] != rname:
                bad = f"row {i} is {names[i]!r}, file says {rname!r}"
                break
            row = cone.constraints[i]
            if row.relation != EQ and y < 0:
                bad = f"negative multiplier on inequality row {i}"
                break
            for k, v in row.coeffs.items():
                acc[k] = acc.get(k, 0) + y * v
        if not bad:
            acc = {k: v for k, v in acc.items() if v}
            if acc != target:
                bad = "combination differs from the inequality"
        out.append(VerifyResult(name, not bad, bad))
    return out
