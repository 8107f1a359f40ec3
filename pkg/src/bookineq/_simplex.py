"""Two-phase primal simplex over exact rationals (gmpy2.mpq).

The tableau is kept in dictionary (Tucker) form: one row per basic variable,
one column per non-basic variable,

    x_basic[i] = rhs[i] - sum_j T[i][j] * x_nonbasic[j],

with every variable constrained to be non-negative.  Pivoting follows
Bland's smallest-index rule, which cannot cycle.  ``rule="dantzig"`` uses the
largest reduced cost instead and falls back to Bland for good after a run of
degenerate pivots, so it still terminates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from gmpy2 import mpq

ZERO = mpq(0)
ONE = mpq(1)

# consecutive degenerate pivots tolerated before "dantzig" switches to Bland
DEGENERATE_PATIENCE = 50


class SimplexError(RuntimeError):
    pass


@dataclass
class SimplexResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list | None = None
    value: object = None
    pivots: int = 0


Row = tuple[Mapping[int, object], str, object]


class _Dictionary:
    def __init__(self, nvars: int, rows: Sequence[Row]):
        self.nvars = nvars
        ncols = nvars
        surplus_rows = []
        basis = []
        tab = []
        rhs = []
        prepared = []
        for coeffs, sense, b in rows:
            b = mpq(b)
            a = {j: mpq(v) for j, v in coeffs.items() if v}
            if b < 0:
                b = -b
                a = {j: -v for j, v in a.items()}
                sense = {"<=": ">=", ">=": "<=", "=": "="}[sense]
            prepared.append((a, sense, b))
            if sense == ">=" and b > 0:
                surplus_rows.append(len(prepared) - 1)
        # variable numbering: structural, surplus, slack, artificial
        surplus_var = {}
        for r in surplus_rows:
            surplus_var[r] = ncols
            ncols += 1
        nonbasic = list(range(nvars)) + [surplus_var[r] for r in surplus_rows]
        col_of = {v: c for c, v in enumerate(nonbasic)}
        next_var = ncols
        slack_rows = [i for i, (a, s, b) in enumerate(prepared) if s == "<=" or (s == ">=" and b == 0)]
        slack_var = {}
        for i in slack_rows:
            slack_var[i] = next_var
            next_var += 1
        first_art = next_var
        for i, (a, sense, b) in enumerate(prepared):
            row = [ZERO] * len(nonbasic)
            if sense == "<=":
                for j, v in a.items():
                    row[col_of[j]] = v
                basis.append(slack_var[i])
            elif sense == ">=" and b == 0:
                for j, v in a.items():
                    row[col_of[j]] = -v
                basis.append(slack_var[i])
            else:
                for j, v in a.items():
                    row[col_of[j]] = v
                if sense == ">=":
                    row[col_of[surplus_var[i]]] = -ONE
                basis.append(next_var)
                next_var += 1
            tab.append(row)
            rhs.append(b)
        self.T = tab
        self.rhs = rhs
        self.basis = basis
        self.nonbasic = nonbasic
        self.first_art = first_art
        self.pivots = 0

    def is_art(self, var: int) -> bool:
        return var >= self.first_art

    def pivot(self, r: int, c: int, objs: list[list]):
        T = self.T
        prow = T[r]
        p = prow[c]
        inv = ONE / p
        for j, v in enumerate(prow):
            if v:
                prow[j] = v * inv
        prow[c] = inv
        self.rhs[r] = self.rhs[r] * inv
        pr = self.rhs[r]
        nz = [(j, v) for j, v in enumerate(prow) if v and j != c]
        for i, row in enumerate(T):
            if i == r:
                continue
            f = row[c]
            if f:
                for j, v in nz:
                    row[j] -= f * v
                row[c] = -f * inv
                if pr:
                    self.rhs[i] -= f * pr
        for obj in objs:
            # obj = [row_list, rhs_holder]
            orow = obj[0]
            f = orow[c]
            if f:
                for j, v in nz:
                    orow[j] -= f * v
                orow[c] = -f * inv
                obj[1] -= f * pr
        self.basis[r], self.nonbasic[c] = self.nonbasic[c], self.basis[r]
        self.pivots += 1

    def drop_column(self, c: int, objs: list[list]):
        for row in self.T:
            del row[c]
        for obj in objs:
            del obj[0][c]
        del self.nonbasic[c]

    def drop_row(self, r: int):
        del self.T[r]
        del self.rhs[r]
        del self.basis[r]

    def run(self, obj: list, others: list[list], rule: str, blocked=lambda v: False) -> str:
        """Minimise the objective row ``obj`` (``z = obj[1] - sum obj[0][j] x_j``)."""
        bland = rule == "bland"
        degenerate = 0
        while True:
            orow = obj[0]
            c = -1
            if bland:
                best_var = None
                for j, v in enumerate(orow):
                    if v > 0:
                        var = self.nonbasic[j]
                        if not blocked(var) and (best_var is None or var < best_var):
                            best_var, c = var, j
            else:
                best = ZERO
                for j, v in enumerate(orow):
                    if v > best and not blocked(self.nonbasic[j]):
                        best, c = v, j
            if c < 0:
                return "optimal"
            r = -1
            best_ratio = None
            best_var = None
            for i, row in enumerate(self.T):
                a = row[c]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[i] < best_var)
                    ):
                        best_ratio, best_var, r = ratio, self.basis[i], i
            if r < 0:
                return "unbounded"
            if not bland:
                degenerate = degenerate + 1 if best_ratio == 0 else 0
                if degenerate > DEGENERATE_PATIENCE:
                    bland = True
            self.pivot(r, c, [obj] + others)


def solve(
    nvars: int,
    rows: Sequence[Row],
    objective: Mapping[int, object] | None = None,
    rule: str = "bland",
) -> SimplexResult:
    """Minimise ``objective·x`` subject to ``rows`` and ``x >= 0``.

    Each row is ``(coeffs, sense, rhs)`` with ``sense`` one of ``"<="``,
    ``">="``, ``"="``.  Without an objective only feasibility is decided.
    """
    if rule not in ("bland", "dantzig"):
        raise ValueError(f"unknown pivot rule {rule!r}")
    d = _Dictionary(nvars, rows)
    ncols = len(d.nonbasic)
    art_rows = [i for i, v in enumerate(d.basis) if d.is_art(v)]

    if art_rows:
        wrow = [ZERO] * ncols
        wrhs = ZERO
        for i in art_rows:
            row = d.T[i]
            for j, v in enumerate(row):
                if v:
                    wrow[j] += v
            wrhs += d.rhs[i]
        w = [wrow, wrhs]
        status = d.run(w, [], rule, blocked=d.is_art)
        if status != "optimal":
            raise SimplexError("phase one cannot be unbounded")
        if w[1] > 0:
            return SimplexResult("infeasible", pivots=d.pivots)
        # drive zero-level artificials out of the basis
        i = 0
        while i < len(d.basis):
            if d.is_art(d.basis[i]):
                row = d.T[i]
                c = next((j for j, v in enumerate(row) if v and not d.is_art(d.nonbasic[j])), -1)
                if c < 0:
                    d.drop_row(i)
                    continue
                d.pivot(i, c, [w])
            i += 1
        for c in reversed(range(len(d.nonbasic))):
            if d.is_art(d.nonbasic[c]):
                d.drop_column(c, [w])

    value = ZERO
    if objective:
        cost = {j: mpq(v) for j, v in objective.items() if v}
        zrow = [-cost.get(v, ZERO) for v in d.nonbasic]
        zrhs = ZERO
        for i, bv in enumerate(d.basis):
            cb = cost.get(bv)
            if cb:
                row = d.T[i]
                for j, v in enumerate(row):
                    if v:
                        zrow[j] += cb * v
                zrhs += cb * d.rhs[i]
        z = [zrow, zrhs]
        status = d.run(z, [], rule)
        if status == "unbounded":
            return SimplexResult("unbounded", pivots=d.pivots)
        value = z[1]

    x = [ZERO] * nvars
    for i, bv in enumerate(d.basis):
        if bv < nvars:
            x[bv] = d.rhs[i]
    return SimplexResult("optimal", x=x, value=value, pivots=d.pivots)
