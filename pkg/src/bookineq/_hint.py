"""Floating-point hints for the exact LP layer.

HiGHS (through scipy) solves the LP in doubles.  Its answer is never trusted
as such: the rows that are tight at the float optimum are solved again in
exact rationals, and the result is accepted only if

* the exact point satisfies every row (primal feasibility), and
* when there is an objective, exact dual multipliers rebuilt from the float
  dual have the right signs, non-negative reduced costs and the same
  objective value (dual feasibility plus weak duality),

which together prove optimality.  Anything else returns ``None`` and the
caller falls back to the exact simplex.
"""

from __future__ import annotations

import logging
import warnings
from typing import Mapping, Sequence

import numpy as np
from gmpy2 import mpq
from scipy.optimize import linprog
from scipy.sparse import csr_matrix

from ._simplex import SimplexResult

log = logging.getLogger(__name__)

ZERO = mpq(0)
TOL = 1e-7

Row = tuple[Mapping[int, object], str, object]


def _matrix(nvars: int, rows: Sequence[Row], which, signed: bool = True):
    """Sparse float matrix of the chosen rows; ``>=`` rows are negated into
    ``<=`` form when ``signed``."""
    which = list(which)
    data, ri, ci, rhs = [], [], [], []
    for k, i in enumerate(which):
        coeffs, sense, b = rows[i]
        s = -1.0 if signed and sense == ">=" else 1.0
        for j, v in coeffs.items():
            if v:
                data.append(s * float(v))
                ri.append(k)
                ci.append(j)
        rhs.append(s * float(b))
    if not which:
        return None, None
    return csr_matrix((data, (ri, ci)), shape=(len(which), nvars)), np.array(rhs)


def float_solve(nvars: int, rows: Sequence[Row], objective: Mapping[int, object] | None = None):
    """Solve in doubles.  Returns ``(status, x, duals)``; ``duals[i]`` is the
    multiplier of row ``i`` in the convention ``c = A^T y + reduced costs``,
    so it is >= 0 on ``>=`` rows and <= 0 on ``<=`` rows."""
    ub = [i for i, r in enumerate(rows) if r[1] != "="]
    eq = [i for i, r in enumerate(rows) if r[1] == "="]
    A_ub, b_ub = _matrix(nvars, rows, ub)
    A_eq, b_eq = _matrix(nvars, rows, eq)
    c = np.zeros(nvars)
    for j, v in (objective or {}).items():
        c[j] = float(v)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs-ds")
    status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(res.status, "unknown")
    if status != "optimal":
        return status, None, None
    duals = [0.0] * len(rows)
    if ub and res.ineqlin is not None:
        for k, i in enumerate(ub):
            m = float(res.ineqlin.marginals[k])
            duals[i] = -m if rows[i][1] == ">=" else m
    if eq and res.eqlin is not None:
        for k, i in enumerate(eq):
            duals[i] = float(res.eqlin.marginals[k])
    return status, res.x, duals


class _Echelon:
    """Incremental Gauss-Jordan elimination over mpq on sparse rows."""

    def __init__(self):
        self.rows: dict[int, tuple[dict[int, mpq], mpq]] = {}  # pivot column -> (row, rhs)
        self.order: list[int] = []  # tags of accepted rows

    def add(self, row: dict[int, mpq], rhs: mpq, tag) -> bool:
        row = dict(row)
        for p in [p for p in row if p in self.rows]:
            f = row.get(p)
            if not f:
                continue
            prow, prhs = self.rows[p]
            for j, v in prow.items():
                w = row.get(j, ZERO) - f * v
                if w:
                    row[j] = w
                else:
                    row.pop(j, None)
            rhs -= f * prhs
        if not row:
            return False
        p = min(row)
        inv = 1 / row[p]
        row = {j: v * inv for j, v in row.items()}
        rhs *= inv
        for q, (qrow, qrhs) in self.rows.items():
            f = qrow.get(p)
            if f:
                for j, v in row.items():
                    w = qrow.get(j, ZERO) - f * v
                    if w:
                        qrow[j] = w
                    else:
                        qrow.pop(j, None)
                self.rows[q] = (qrow, qrhs - f * rhs)
        self.rows[p] = (row, rhs)
        self.order.append(tag)
        return True

    def solution(self, unknowns) -> dict[int, mpq] | None:
        out = {}
        for u in unknowns:
            if u not in self.rows:
                return None
            row, rhs = self.rows[u]
            if len(row) != 1:
                return None
            out[u] = rhs
        return out


def _satisfied(coeffs, sense, b, x) -> bool:
    s = sum((mpq(v) * x[j] for j, v in coeffs.items() if x[j]), ZERO)
    b = mpq(b)
    if sense == "=":
        return s == b
    if sense == ">=":
        return s >= b
    return s <= b


def exact_vertex(nvars, rows, objective, xf, duals) -> SimplexResult | None:
    """Rebuild the float optimum exactly and certify it; None on failure."""
    support = [j for j in range(nvars) if xf[j] > TOL]
    sset = set(support)
    A, b = _matrix(nvars, rows, range(len(rows)), signed=False)
    x_clean = np.where(xf > TOL, xf, 0.0)
    slack = np.abs(A @ x_clean - b)
    scale = 1.0 + np.abs(b) + np.asarray(abs(A).sum(axis=1)).ravel()
    tight = slack <= TOL * scale
    active = [i for i, r in enumerate(rows) if r[1] == "=" or tight[i]]
    # rows with a nonzero float multiplier first, then equalities, then the rest
    active.sort(key=lambda i: (-(abs(duals[i]) > TOL), rows[i][1] != "=", i))
    ech = _Echelon()
    for i in active:
        coeffs, sense, b = rows[i]
        r = {j: mpq(v) for j, v in coeffs.items() if v and j in sset}
        bq = mpq(b)
        if not r:
            if bq != 0 and sense == "=":
                return None
            continue
        ech.add(r, bq, i)
        if len(ech.order) == len(support):
            break
    sol = ech.solution(support)
    if sol is None:
        log.debug("tight rows do not determine a vertex")
        return None
    x = [ZERO] * nvars
    for j, v in sol.items():
        x[j] = v
    for coeffs, sense, b in rows:
        if not _satisfied(coeffs, sense, b, x):
            log.debug("rebuilt point violates a row")
            return None
    value = ZERO
    if objective:
        cost = {j: mpq(v) for j, v in objective.items() if v}
        value = sum((cost.get(j, ZERO) * x[j] for j in support), ZERO)
        y = _exact_dual(nvars, rows, cost, duals)
        if y is None:
            return None
        dual_value = sum((y[i] * mpq(rows[i][2]) for i in y), ZERO)
        if dual_value != value:
            log.debug("primal and dual values differ")
            return None
    return SimplexResult("optimal", x=x, value=value, pivots=0)


def _exact_dual(nvars, rows, cost, duals) -> dict[int, mpq] | None:
    """Exact multipliers on the rows the float dual uses, or None.

    They solve ``(A^T y)_j = c_j`` on the columns whose float reduced cost
    vanishes, and are returned only if they have the right signs and leave
    every reduced cost non-negative."""
    D = [i for i, d in enumerate(duals) if abs(d) > TOL]
    colrows: dict[int, dict[int, mpq]] = {}
    for k, i in enumerate(D):
        for j, v in rows[i][0].items():
            if v:
                colrows.setdefault(j, {})[k] = mpq(v)
    ech = _Echelon()
    A, _ = _matrix(nvars, rows, D, signed=False)
    c = np.zeros(nvars)
    for j, v in cost.items():
        c[j] = float(v)
    if A is None:
        rc, scale = c, 1.0 + np.abs(c)
    else:
        yD = np.array([duals[i] for i in D])
        rc = c - A.T @ yD
        scale = 1.0 + np.abs(c) + np.asarray(abs(A).sum(axis=0)).ravel()
    order = [j for j in range(nvars) if abs(rc[j]) <= TOL * scale[j]]
    for j in order:
        if col := colrows.get(j):
            ech.add(col, cost.get(j, ZERO), j)
        if len(ech.order) == len(D):
            break
    yk = ech.solution(range(len(D)))
    if yk is None:
        log.debug("float dual support does not determine a dual")
        return None
    y = {D[k]: v for k, v in yk.items()}
    for i, v in y.items():
        sense = rows[i][1]
        if (sense == ">=" and v < 0) or (sense == "<=" and v > 0):
            log.debug("dual multiplier of the wrong sign")
            return None
    for j in range(nvars):
        red = cost.get(j, ZERO) - sum((v * y[D[k]] for k, v in colrows.get(j, {}).items()), ZERO)
        if red < 0:
            log.debug("negative reduced cost")
            return None
    return y


def solve(nvars: int, rows: Sequence[Row], objective: Mapping[int, object] | None = None):
    """Returns ``(float_status, result)``; ``result`` is an exactly certified
    optimum or None."""
    try:
        status, xf, duals = float_solve(nvars, rows, objective)
    except (ValueError, MemoryError) as e:  # pragma: no cover - scipy edge cases
        log.debug("float LP failed: %s", e)
        return "unknown", None
    if status != "optimal":
        return status, None
    res = exact_vertex(nvars, rows, objective, xf, duals)
    if res is None:
        log.debug("float optimum could not be certified exactly; using exact simplex")
    return status, res
