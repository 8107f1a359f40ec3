"""Ground sets, subset masks, exact rank functions and linear information expressions.

Subsets of a ground set are plain ``int`` bitmasks; bit ``i`` stands for the
``i``-th label.  Rank values and coefficients are :class:`fractions.Fraction`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

MAX_GROUND = 20

SubsetLike = Union[int, str, Iterable[str]]


def to_fraction(value) -> Fraction:
    """Parse ``int``, ``Fraction`` or a ``"p/q"`` string into a Fraction.

    Floats are refused: every number in this package is exact.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rank values")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        raise TypeError(f"floating point value {value!r} refused; use 'p/q' strings")
    # gmpy2.mpq and friends
    try:
        return Fraction(int(value.numerator), int(value.denominator))
    except AttributeError:
        raise TypeError(f"cannot interpret {value!r} as a rational") from None


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def graded_key(mask: int) -> tuple[int, int]:
    """Sort key of the graded-lexicographic subset order (cardinality, mask)."""
    return (popcount(mask), mask)


def submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask``, including 0 and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


class GroundSet:
    """An ordered tuple of distinct labels; the order fixes the bit encoding."""

    __slots__ = ("labels", "_index")

    def __init__(self, labels: Iterable[str]):
        labels = tuple(labels)
        if not labels:
            raise ValueError("ground set must be non-empty")
        if len(labels) > MAX_GROUND:
            raise ValueError(f"ground set larger than {MAX_GROUND} elements")
        for lab in labels:
            if not isinstance(lab, str) or not lab:
                raise ValueError(f"labels must be non-empty strings, got {lab!r}")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in {labels}")
        self.labels = labels
        self._index = {lab: i for i, lab in enumerate(labels)}

    @classmethod
    def of(cls, spec: Union["GroundSet", str, Iterable[str]]) -> "GroundSet":
        """``GroundSet.of("abcd")`` splits a string into one-letter labels."""
        if isinstance(spec, GroundSet):
            return spec
        if isinstance(spec, str):
            return cls(list(spec))
        return cls(spec)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label) -> bool:
        return label in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, GroundSet) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    def __repr__(self) -> str:
        return f"GroundSet({list(self.labels)!r})"

    @property
    def full(self) -> int:
        return (1 << len(self.labels)) - 1

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown label {label!r} (ground {self.labels})") from None

    def bit(self, label: str) -> int:
        return 1 << self.index(label)

    def mask(self, subset: SubsetLike) -> int:
        """Bitmask of a subset given as a mask, a label string, or an iterable of labels."""
        if isinstance(subset, bool):
            raise TypeError("booleans are not subsets")
        if isinstance(subset, int):
            if subset < 0 or subset > self.full:
                raise ValueError(f"mask {subset} out of range for {self}")
            return subset
        if isinstance(subset, str):
            return self.parse(subset)
        m = 0
        for lab in subset:
            m |= self.bit(lab)
        return m

    def parse(self, text: str) -> int:
        """Parse a concatenated label string such as ``"abd"`` or ``"ac_1d_1"``.

        Tokenisation tries longer labels first and backtracks, so labels that
        are prefixes of other labels (``c_1`` / ``c_10``) are handled.
        """
        text = text.strip()
        if text in ("", "{}", "0", "∅"):
            return 0
        by_len = sorted(self.labels, key=len, reverse=True)
        memo: dict[int, int | None] = {}

        def walk(pos: int):
            if pos == len(text):
                return 0
            if pos in memo:
                return memo[pos]
            found = None
            for lab in by_len:
                if text.startswith(lab, pos):
                    rest = walk(pos + len(lab))
                    if rest is not None:
                        bit = self.bit(lab)
                        if rest & bit:
                            raise ValueError(f"label {lab!r} repeated in {text!r}")
                        found = rest | bit
                        break
            memo[pos] = found
            return found

        result = walk(0)
        if result is None:
            raise ValueError(f"cannot parse subset {text!r} over labels {self.labels}")
        return result

    def label(self, mask: int) -> str:
        """Concatenated labels in ground order; the empty set prints as ``""``."""
        return "".join(self.labels[i] for i in range(len(self.labels)) if mask >> i & 1)

    def elements(self, mask: int) -> tuple[str, ...]:
        return tuple(self.labels[i] for i in range(len(self.labels)) if mask >> i & 1)

    def nonempty_subsets(self) -> list[int]:
        """All non-empty masks in graded-lex order."""
        return sorted(range(1, self.full + 1), key=graded_key)


def _ground(ground) -> GroundSet:
    return GroundSet.of(ground)


# ---------------------------------------------------------------------------
# Polymatroids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Polymatroid:
    """Set function on a ground set, stored densely by mask with ``rank[0] == 0``.

    Construction does not check the polymatroid axioms; use
    :func:`validate_polymatroid` for that.
    """

    ground: GroundSet
    rank: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.rank) != 1 << len(self.ground):
            raise ValueError(
                f"rank vector has length {len(self.rank)}, expected {1 << len(self.ground)}"
            )
        if self.rank[0] != 0:
            raise ValueError("rank of the empty set must be 0")

    @classmethod
    def from_function(cls, ground, fn: Callable[[int], object]) -> "Polymatroid":
        ground = _ground(ground)
        rank = [Fraction(0)] + [to_fraction(fn(m)) for m in range(1, ground.full + 1)]
        return cls(ground, tuple(rank))

    @classmethod
    def from_dict(cls, ground, values: Mapping[SubsetLike, object]) -> "Polymatroid":
        """Build from a subset→rank map; every non-empty subset must be present."""
        ground = _ground(ground)
        rank: list[Fraction | None] = [None] * (ground.full + 1)
        rank[0] = Fraction(0)
        for key, val in values.items():
            m = ground.mask(key)
            if m == 0:
                if to_fraction(val) != 0:
                    raise ValueError("rank of the empty set must be 0")
                continue
            if rank[m] is not None:
                raise ValueError(f"duplicate entry for subset {ground.label(m)!r}")
            rank[m] = to_fraction(val)
        missing = [ground.label(m) for m in range(1, ground.full + 1) if rank[m] is None]
        if missing:
            raise ValueError(f"rank vector incomplete, missing {missing[:5]}")
        return cls(ground, tuple(rank))  # type: ignore[arg-type]

    @classmethod
    def zero(cls, ground) -> "Polymatroid":
        ground = _ground(ground)
        return cls(ground, (Fraction(0),) * (ground.full + 1))

    @classmethod
    def free(cls, ground) -> "Polymatroid":
        """Free matroid: rank equals cardinality."""
        return cls.from_function(ground, popcount)

    @classmethod
    def uniform(cls, ground, r: int) -> "Polymatroid":
        return cls.from_function(ground, lambda m: min(popcount(m), r))

    def __call__(self, subset: SubsetLike) -> Fraction:
        return self.rank[self.ground.mask(subset)]

    def __getitem__(self, subset: SubsetLike) -> Fraction:
        return self(subset)

    def __add__(self, other: "Polymatroid") -> "Polymatroid":
        if other.ground != self.ground:
            raise ValueError("ground set mismatch")
        return Polymatroid(self.ground, tuple(x + y for x, y in zip(self.rank, other.rank)))

    def scale(self, q) -> "Polymatroid":
        q = to_fraction(q)
        return Polymatroid(self.ground, tuple(q * x for x in self.rank))

    def to_dict(self) -> dict[str, Fraction]:
        return {self.ground.label(m): self.rank[m] for m in self.ground.nonempty_subsets()}

    def __repr__(self) -> str:
        body = ", ".join(f"{k}={v}" for k, v in list(self.to_dict().items())[:8])
        more = ", ..." if self.ground.full > 8 else ""
        return f"Polymatroid({list(self.ground.labels)}, {body}{more})"


def _fmt_q(q: Fraction) -> object:
    return q.numerator if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def polymatroid_to_json(g: Polymatroid, indent: int | None = 2) -> str:
    data = {
        "ground": list(g.ground.labels),
        "rank": {k: _fmt_q(v) for k, v in g.to_dict().items()},
    }
    return json.dumps(data, indent=indent)


def _reject_duplicates(pairs):
    seen = {}
    for k, v in pairs:
        if k in seen:
            raise ValueError(f"duplicate JSON key {k!r}")
        seen[k] = v
    return seen


def polymatroid_from_json(text: str) -> Polymatroid:
    """Parse the JSON exchange format; unknown labels and duplicate keys are errors."""
    data = json.loads(text, object_pairs_hook=_reject_duplicates)
    if not isinstance(data, dict) or "ground" not in data or "rank" not in data:
        raise ValueError('polymatroid JSON needs "ground" and "rank"')
    ground = GroundSet(data["ground"])
    ranks = data["rank"]
    if not isinstance(ranks, dict):
        raise ValueError('"rank" must be an object')
    for key, val in ranks.items():
        if isinstance(val, float):
            raise ValueError(f"rank of {key!r} is a float; give it as 'p/q'")
    return Polymatroid.from_dict(ground, ranks)


# ---------------------------------------------------------------------------
# Linear expressions
# ---------------------------------------------------------------------------


class LinExpr:
    """Sparse rational functional on the non-empty subsets of a ground set.

    Instances are immutable; arithmetic returns new objects.  Zero
    coefficients are never stored.
    """

    __slots__ = ("ground", "_coeffs", "_hash")

    def __init__(self, ground, coeffs: Mapping[int, object] | None = None):
        self.ground = _ground(ground)
        clean: dict[int, Fraction] = {}
        for m, c in (coeffs or {}).items():
            m = self.ground.mask(m)
            if m == 0:
                continue  # the empty set has rank 0 in every polymatroid
            c = to_fraction(c)
            if c:
                clean[m] = clean.get(m, Fraction(0)) + c
                if not clean[m]:
                    del clean[m]
        self._coeffs = clean
        self._hash = None

    @classmethod
    def _raw(cls, ground: GroundSet, coeffs: dict[int, Fraction]) -> "LinExpr":
        obj = cls.__new__(cls)
        obj.ground = ground
        obj._coeffs = coeffs
        obj._hash = None
        return obj

    @classmethod
    def delta(cls, ground, subset: SubsetLike, coef=1) -> "LinExpr":
        ground = _ground(ground)
        return cls(ground, {ground.mask(subset): coef})

    @property
    def coeffs(self) -> Mapping[int, Fraction]:
        return dict(self._coeffs)

    def items(self) -> list[tuple[int, Fraction]]:
        """Terms in graded-lex subset order."""
        return sorted(self._coeffs.items(), key=lambda kv: graded_key(kv[0]))

    def __getitem__(self, subset: SubsetLike) -> Fraction:
        return self._coeffs.get(self.ground.mask(subset), Fraction(0))

    def __len__(self) -> int:
        return len(self._coeffs)

    def is_zero(self) -> bool:
        return not self._coeffs

    def _check(self, other: "LinExpr"):
        if other.ground != self.ground:
            raise ValueError(f"ground set mismatch: {self.ground} vs {other.ground}")

    def __add__(self, other: "LinExpr") -> "LinExpr":
        if isinstance(other, int) and other == 0:
            return self
        self._check(other)
        out = dict(self._coeffs)
        for m, c in other._coeffs.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return LinExpr._raw(self.ground, out)

    __radd__ = __add__

    def __neg__(self) -> "LinExpr":
        return LinExpr._raw(self.ground, {m: -c for m, c in self._coeffs.items()})

    def __sub__(self, other: "LinExpr") -> "LinExpr":
        return self + (-other)

    def __mul__(self, q) -> "LinExpr":
        q = to_fraction(q)
        if not q:
            return LinExpr._raw(self.ground, {})
        return LinExpr._raw(self.ground, {m: q * c for m, c in self._coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LinExpr)
            and self.ground == other.ground
            and self._coeffs == other._coeffs
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ground, frozenset(self._coeffs.items())))
        return self._hash

    def __call__(self, g: Polymatroid) -> Fraction:
        return evaluate(self, g)

    def relabel(self, mapping: Mapping[str, str]) -> "LinExpr":
        """Apply a permutation of labels (labels missing from ``mapping`` stay put)."""
        perm = [self.ground.index(mapping.get(lab, lab)) for lab in self.ground.labels]
        if sorted(perm) != list(range(len(perm))):
            raise ValueError("relabeling must be a permutation of the ground set")
        out = {}
        for m, c in self._coeffs.items():
            t = 0
            for i in range(len(perm)):
                if m >> i & 1:
                    t |= 1 << perm[i]
            out[t] = c
        return LinExpr._raw(self.ground, out)

    def to_str(self, ascii: bool = True) -> str:
        if not self._coeffs:
            return "0"
        parts = []
        for i, (m, c) in enumerate(self.items()):
            sign = "-" if c < 0 else "+"
            c = abs(c)
            body = f"{_fmt_q(c)}*{self.ground.label(m)}"
            if i == 0:
                parts.append(("-" if sign == "-" else "") + body)
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)

    def __repr__(self) -> str:
        return f"LinExpr({self.to_str()})"


def evaluate(e: LinExpr, g: Polymatroid) -> Fraction:
    """Scalar product of the coefficient vector with the rank vector."""
    if e.ground != g.ground:
        raise ValueError(f"ground set mismatch: {e.ground} vs {g.ground}")
    return sum((c * g.rank[m] for m, c in e._coeffs.items()), Fraction(0))


def canonical_form(e: LinExpr) -> LinExpr:
    """Positive rescaling of ``e`` to coprime integer coefficients.

    Only positive factors are used, so ``e >= 0`` and ``-e >= 0`` stay
    distinct.  Idempotent and invariant under positive scaling.
    """
    if e.is_zero():
        raise ValueError("the zero expression has no canonical form")
    return e * canonical_scale(e._coeffs.values())


def canonical_scale(values: Iterable[Fraction]) -> Fraction:
    """Positive factor turning the given rationals into coprime integers."""
    values = list(values)
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)
    g = 0
    for v in values:
        g = math.gcd(g, int(v * den))
    return Fraction(den, g)


def pair_expr(ground, I: SubsetLike, J: SubsetLike) -> LinExpr:
    """``(I,J) = δ_I + δ_J - δ_{I∪J} - δ_{I∩J}``."""
    ground = _ground(ground)
    i, j = ground.mask(I), ground.mask(J)
    return _delta_sum(ground, [(i, 1), (j, 1), (i | j, -1), (i & j, -1)])


def cond_expr(ground, I: SubsetLike, J: SubsetLike, K: SubsetLike) -> LinExpr:
    """``(I,J‖K) = δ_{IK} + δ_{JK} - δ_{IJK} - δ_{(I∩J)K}``; K need not be disjoint."""
    ground = _ground(ground)
    i, j, k = ground.mask(I), ground.mask(J), ground.mask(K)
    return _delta_sum(ground, [(i | k, 1), (j | k, 1), (i | j | k, -1), ((i & j) | k, -1)])


def ingleton_expr(ground, I, J, K, L) -> LinExpr:
    """``[I,J,K,L] = -(I,J) + (I,J‖K) + (I,J‖L) + (K,L)``."""
    return (
        -pair_expr(ground, I, J)
        + cond_expr(ground, I, J, K)
        + cond_expr(ground, I, J, L)
        + pair_expr(ground, K, L)
    )


def zhang_yeung_expr(ground, a: str, b: str, c: str, d: str) -> LinExpr:
    """``[abcd] + (a,b‖c) + (a,c‖b) + (b,c‖a)`` for four distinct elements."""
    if len({a, b, c, d}) != 4:
        raise ValueError("Zhang-Yeung expression needs four distinct elements")
    return (
        ingleton_expr(ground, a, b, c, d)
        + cond_expr(ground, a, b, c)
        + cond_expr(ground, a, c, b)
        + cond_expr(ground, b, c, a)
    )


def _delta_sum(ground: GroundSet, terms) -> LinExpr:
    out: dict[int, Fraction] = {}
    for m, c in terms:
        if m == 0:
            continue
        v = out.get(m, 0) + c
        if v:
            out[m] = Fraction(v)
        else:
            out.pop(m, None)
    return LinExpr._raw(ground, out)


# ---------------------------------------------------------------------------
# Axioms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Elemental:
    """One elemental Shannon inequality ``expr >= 0``.

    ``kind`` is ``"mono"`` (``g(N) - g(N-i)``) or ``"sub"`` (``(i,j‖K)``).
    """

    kind: str
    i: str
    j: str | None
    K: int
    expr: LinExpr

    @property
    def name(self) -> str:
        g = self.expr.ground
        if self.kind == "mono":
            return f"mono({self.i})"
        return f"({self.i},{self.j}|{g.label(self.K)})"


def elemental_inequalities(ground) -> list[Elemental]:
    """Monotonicity of co-singletons plus ``(i,j‖K) >= 0`` for i<j, K ⊆ N-ij."""
    ground = _ground(ground)
    n = len(ground)
    full = ground.full
    out = []
    for i in range(n):
        e = _delta_sum(ground, [(full, 1), (full & ~(1 << i), -1)])
        out.append(Elemental("mono", ground.labels[i], None, full & ~(1 << i), e))
    for i, j in combinations(range(n), 2):
        rest = full & ~(1 << i) & ~(1 << j)
        for K in sorted(submasks(rest), key=graded_key):
            e = _delta_sum(
                ground, [(K | 1 << i, 1), (K | 1 << j, 1), (K | 1 << i | 1 << j, -1), (K, -1)]
            )
            out.append(Elemental("sub", ground.labels[i], ground.labels[j], K, e))
    return out


@dataclass
class Violation:
    name: str
    value: Fraction

    def __str__(self) -> str:
        return f"{self.name} = {self.value}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_polymatroid(g: Polymatroid) -> ValidationReport:
    """Check the polymatroid axioms through the elemental inequalities.

    Non-negativity and monotonicity of all subsets follow from co-singleton
    monotonicity plus elemental submodularity together with ``g(∅)=0``.
    """
    if len(g.rank) != 1 << len(g.ground):
        raise ValueError("malformed rank vector")
    report = ValidationReport()
    for el in elemental_inequalities(g.ground):
        v = evaluate(el.expr, g)
        if v < 0:
            report.violations.append(Violation(el.name, v))
    return report


def validate_polymatroid_full(g: Polymatroid) -> ValidationReport:
    """Definition-level check over all pairs of subsets; exponential, for cross-checks."""
    report = ValidationReport()
    r = g.rank
    lab = g.ground.label
    for I in range(g.ground.full + 1):
        if r[I] < 0:
            report.violations.append(Violation(f"nonneg({lab(I)})", r[I]))
        for J in range(g.ground.full + 1):
            if I & J == I and r[J] < r[I]:
                report.violations.append(Violation(f"mono({lab(I)}<={lab(J)})", r[J] - r[I]))
            if I < J:
                v = r[I] + r[J] - r[I | J] - r[I & J]
                if v < 0:
                    report.violations.append(Violation(f"({lab(I)},{lab(J)})", v))
    return report


def is_polymatroid(g: Polymatroid) -> bool:
    return validate_polymatroid(g).ok


def subsets_of_size(ground: GroundSet, k: int) -> list[int]:
    return [sum(1 << i for i in c) for c in combinations(range(len(ground)), k)]


def linexpr_from_terms(ground, terms: Sequence[tuple[SubsetLike, object]]) -> LinExpr:
    ground = _ground(ground)
    out: dict[int, Fraction] = {}
    for s, c in terms:
        m = ground.mask(s)
        out[m] = out.get(m, Fraction(0)) + to_fraction(c)
    return LinExpr(ground, out)
