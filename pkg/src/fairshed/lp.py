"""Small dense two-phase simplex over exact rationals.

Every variable is non-negative. Problems here are tiny (tens of rows, at most a
few thousand columns), so a plain tableau with ``Fraction`` entries is fast
enough and returns exact vertices, e.g. ``r = 2/3`` rather than ``0.6666667``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ._rational import as_fraction

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_ZERO = Fraction(0)


@dataclass
class LPResult:
    status: str
    x: list[Fraction] | None = None
    value: Fraction | None = None

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    def __init__(self, rows, rhs, basis):
        self.rows = rows  # list of lists, each of length ncols
        self.rhs = rhs
        self.basis = basis
        self.ncols = len(rows[0]) if rows else 0

    def pivot(self, r: int, c: int):
        prow = self.rows[r]
        piv = prow[c]
        if piv != 1:
            inv = 1 / piv
            for j in range(self.ncols):
                if prow[j]:
                    prow[j] *= inv
            self.rhs[r] *= inv
        nz = [j for j in range(self.ncols) if prow[j]]
        prhs = self.rhs[r]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[c]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
                self.rhs[i] -= f * prhs
        self.basis[r] = c

    def reduced_costs(self, cost: Sequence[Fraction]) -> list[Fraction]:
        d = list(cost)
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.rows[i]
                for j in range(self.ncols):
                    if row[j]:
                        d[j] -= cb * row[j]
        return d

    def optimize(self, cost: Sequence[Fraction], allowed: Sequence[bool]) -> str:
        """Maximise ``cost . x`` over the current basis; columns with ``allowed`` False never enter."""
        d = self.reduced_costs(cost)
        degenerate_run = 0
        while True:
            if degenerate_run > 50:
                # Bland: smallest improving index, guaranteed to terminate
                enter = next((j for j in range(self.ncols) if allowed[j] and d[j] > 0), None)
            else:
                enter, best = None, _ZERO
                for j in range(self.ncols):
                    if allowed[j] and d[j] > best:
                        enter, best = j, d[j]
            if enter is None:
                return OPTIMAL
            leave, ratio = None, None
            for i, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    t = self.rhs[i] / a
                    if (
                        ratio is None
                        or t < ratio
                        or (t == ratio and self.basis[i] < self.basis[leave])
                    ):
                        leave, ratio = i, t
            if leave is None:
                return UNBOUNDED
            degenerate_run = degenerate_run + 1 if ratio == 0 else 0
            self.pivot(leave, enter)
            # update reduced costs from the new pivot row
            f = d[enter]
            prow = self.rows[leave]
            for j in range(self.ncols):
                if prow[j]:
                    d[j] -= f * prow[j]

    def solution(self, nvars: int) -> list[Fraction]:
        x = [_ZERO] * nvars
        for i, b in enumerate(self.basis):
            if b < nvars:
                x[b] = self.rhs[i]
        return x


def solve_lp(
    c: Sequence,
    A_ub: Sequence[Sequence] | None = None,
    b_ub: Sequence | None = None,
    A_eq: Sequence[Sequence] | None = None,
    b_eq: Sequence | None = None,
    maximize: bool = True,
) -> LPResult:
    """Optimise ``c . x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``x >= 0``."""
    nvars = len(c)
    cost = [as_fraction(v) for v in c]
    if not maximize:
        cost = [-v for v in cost]
    A_ub = [[as_fraction(v) for v in row] for row in (A_ub or [])]
    A_eq = [[as_fraction(v) for v in row] for row in (A_eq or [])]
    b_ub = [as_fraction(v) for v in (b_ub or [])]
    b_eq = [as_fraction(v) for v in (b_eq or [])]
    for row in A_ub + A_eq:
        if len(row) != nvars:
            raise ValueError("constraint row length does not match the cost vector")
    if len(A_ub) != len(b_ub) or len(A_eq) != len(b_eq):
        raise ValueError("constraint matrix and right-hand side disagree in length")

    m_ub, m_eq = len(A_ub), len(A_eq)
    m = m_ub + m_eq
    if m == 0:
        if any(v > 0 for v in cost):
            return LPResult(UNBOUNDED)
        x = [_ZERO] * nvars
        return LPResult(OPTIMAL, x, _ZERO)

    # columns: structural | slacks (one per ub row) | artificials (as needed)
    n_slack = m_ub
    rows, rhs, needs_art = [], [], []
    for k, (row, b) in enumerate(zip(A_ub, b_ub)):
        full = row + [_ZERO] * n_slack
        full[nvars + k] = Fraction(1)
        if b < 0:
            full = [-v for v in full]
            b = -b
            needs_art.append(True)
        else:
            needs_art.append(False)
        rows.append(full)
        rhs.append(b)
    for row, b in zip(A_eq, b_eq):
        full = row + [_ZERO] * n_slack
        if b < 0:
            full = [-v for v in full]
            b = -b
        rows.append(full)
        rhs.append(b)
        needs_art.append(True)

    n_art = sum(needs_art)
    base_cols = nvars + n_slack
    ncols = base_cols + n_art
    basis = []
    a = 0
    for i in range(m):
        rows[i].extend([_ZERO] * n_art)
        if needs_art[i]:
            rows[i][base_cols + a] = Fraction(1)
            basis.append(base_cols + a)
            a += 1
        else:
            basis.append(nvars + i)
    tab = _Tableau(rows, rhs, basis)

    if n_art:
        phase1 = [_ZERO] * base_cols + [Fraction(-1)] * n_art
        tab.optimize(phase1, [True] * ncols)
        infeas = sum((tab.rhs[i] for i, b in enumerate(tab.basis) if b >= base_cols), _ZERO)
        if infeas > 0:
            return LPResult(INFEASIBLE)
        # drive remaining (zero-level) artificials out of the basis
        drop_rows = []
        for i, b in enumerate(tab.basis):
            if b >= base_cols:
                col = next((j for j in range(base_cols) if tab.rows[i][j] != 0), None)
                if col is None:
                    drop_rows.append(i)  # redundant equality
                else:
                    tab.pivot(i, col)
        for i in reversed(drop_rows):
            del tab.rows[i]
            del tab.rhs[i]
            del tab.basis[i]
        for row in tab.rows:
            del row[base_cols:]
        tab.ncols = base_cols

    full_cost = cost + [_ZERO] * n_slack
    status = tab.optimize(full_cost, [True] * tab.ncols)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    x = tab.solution(nvars)
    value = sum((ci * xi for ci, xi in zip(c, x)), _ZERO)
    return LPResult(OPTIMAL, x, as_fraction(value))


def is_feasible(A_ub=None, b_ub=None, A_eq=None, b_eq=None, nvars: int | None = None) -> LPResult:
    """Phase-one only: any point satisfying the constraints (objective zero)."""
    if nvars is None:
        rows = (A_ub or []) or (A_eq or [])
        nvars = len(rows[0])
    return solve_lp([0] * nvars, A_ub, b_ub, A_eq, b_eq)
