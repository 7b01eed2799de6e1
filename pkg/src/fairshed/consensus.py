"""Consensus k-division for piecewise-constant valuations and its link to egalitarian division.

A k-consensus division labels every point of ``[0, T]`` with one of ``k``
pieces so that every agent values every piece at ``1/k`` of its total.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ._rational import as_fraction
from .lp import solve_lp
from .model import (
    Agent,
    Allocation,
    Instance,
    PiecewiseConstantUtility,
    common_breakpoints,
    utility_of,
)

MAX_CUTS = 8


class ConsensusNotFoundError(RuntimeError):
    """The bounded search ended without a division within tolerance."""

    def __init__(self, best_residual, cuts_searched: int):
        self.best_residual = best_residual
        self.cuts_searched = cuts_searched
        res = "n/a" if best_residual is None else f"{float(best_residual):.3g}"
        super().__init__(
            f"no consensus division found with up to {cuts_searched} cuts (best residual {res})"
        )


class StructureError(ValueError):
    """An allocation of a reduced instance connects something other than its two maximal sets."""


@dataclass(frozen=True)
class ConsensusDivision:
    """``intervals`` are ``(start, end, label)`` rows in time order covering ``[0, T]``."""

    k: int
    intervals: tuple[tuple[Fraction, Fraction, int], ...]
    deviation: Fraction | None = None

    def __post_init__(self):
        rows = []
        for a, b, lab in self.intervals:
            a, b = as_fraction(a), as_fraction(b)
            if b <= a:
                continue
            if not 0 <= lab < self.k:
                raise ValueError(f"label {lab} outside 0..{self.k - 1}")
            if rows and rows[-1][2] == lab and rows[-1][1] == a:
                rows[-1] = (rows[-1][0], b, lab)
            else:
                rows.append((a, b, lab))
        for (_, b1, _), (a2, _, _) in zip(rows, rows[1:]):
            if b1 != a2:
                raise ValueError("intervals must tile the horizon without gaps")
        object.__setattr__(self, "intervals", tuple(rows))

    @property
    def cut_count(self) -> int:
        return len(self.intervals) - 1

    @property
    def cuts(self) -> list[Fraction]:
        return [b for _, b, _ in self.intervals[:-1]]

    def piece(self, j: int) -> list[tuple[Fraction, Fraction]]:
        return [(a, b) for a, b, lab in self.intervals if lab == j]

    def values(self, valuations: Sequence[PiecewiseConstantUtility]) -> list[list[Fraction]]:
        """``values[i][j]``: agent ``i``'s share of piece ``j`` (relative to its own total)."""
        return [
            [utility_of(v, self.piece(j)) / v.total() for j in range(self.k)] for v in valuations
        ]

    def max_deviation(self, valuations: Sequence[PiecewiseConstantUtility]) -> Fraction:
        target = Fraction(1, self.k)
        return max(abs(x - target) for row in self.values(valuations) for x in row)


def consensus_division_lp(valuations: Sequence[PiecewiseConstantUtility], k: int) -> ConsensusDivision:
    """Exact but cut-heavy: split every segment of the common refinement into ``k`` equal parts."""
    if k < 1:
        raise ValueError("k must be positive")
    bps = common_breakpoints(valuations)
    rows = []
    for a, b in zip(bps, bps[1:]):
        w = (b - a) / k
        rows.extend((a + j * w, a + (j + 1) * w, j) for j in range(k))
    div = ConsensusDivision(k, tuple(rows))
    return ConsensusDivision(k, div.intervals, div.max_deviation(valuations))


def _label_patterns(c: int, k: int):
    """Label sequences of length ``c + 1``: neighbours differ, labels first appear in order, all used."""

    def rec(seq, top):
        if len(seq) == c + 1:
            if top == k - 1:
                yield tuple(seq)
            return
        # enough room left to still introduce the missing labels
        if (k - 1 - top) > (c + 1 - len(seq)):
            return
        for lab in range(min(top + 2, k)):
            if lab != seq[-1]:
                yield from rec(seq + [lab], max(top, lab))

    if c == 0:
        if k == 1:
            yield (0,)
        return
    yield from rec([0], 0)


def _fit_cuts(vals, bps, pattern, seg_choice, k):
    """Minimise the worst deviation from ``1/k`` with cut ``i`` confined to segment ``seg_choice[i]``.

    Inside a fixed segment every cumulative value is linear in the cut
    position, so this is an exact LP.  Returns ``(cuts, residual)``.
    """
    c = len(seg_choice)
    T = bps[-1]
    target = Fraction(1, k)
    nv = c + 1  # offsets y_i, then the residual bound z
    A_ub, b_ub = [], []
    for i, s in enumerate(seg_choice):
        row = [0] * nv
        row[i] = 1
        A_ub.append(row)
        b_ub.append(bps[s + 1] - bps[s])
        if i + 1 < c and seg_choice[i + 1] == s:
            row = [0] * nv
            row[i], row[i + 1] = 1, -1
            A_ub.append(row)
            b_ub.append(0)
    for v in vals:
        # cumulative value at cut i: const_i + slope_i * y_i
        const = [v.cumulative(bps[s]) for s in seg_choice]
        slope = [v.densities_at_segment[s] for s in seg_choice]
        for lab in range(k):
            coef = [Fraction(0)] * nv
            rhs_const = Fraction(0)
            for p, plab in enumerate(pattern):
                if plab != lab:
                    continue
                # piece p runs from cut p-1 (or 0) to cut p (or T)
                if p < c:
                    coef[p] += slope[p]
                    rhs_const += const[p]
                else:
                    rhs_const += v.cumulative(T)
                if p > 0:
                    coef[p - 1] -= slope[p - 1]
                    rhs_const -= const[p - 1]
            # |coef.y + rhs_const - target| <= z
            up = list(coef)
            up[c] = -1
            A_ub.append(up)
            b_ub.append(target - rhs_const)
            down = [-x for x in coef]
            down[c] = -1
            A_ub.append(down)
            b_ub.append(rhs_const - target)
    cost = [0] * c + [1]
    res = solve_lp(cost, A_ub, b_ub, maximize=False)
    if not res.ok:
        return None, None
    cuts = [bps[s] + res.x[i] for i, s in enumerate(seg_choice)]
    return cuts, res.x[c]


class _Normalized:
    """Normalised valuation on the common grid with per-segment densities."""

    def __init__(self, v: PiecewiseConstantUtility, bps):
        self.u = v.normalized().refined(bps)
        self.densities_at_segment = self.u.densities

    def cumulative(self, t):
        return self.u.cumulative(t)


def consensus_division_min_cuts(
    valuations: Sequence[PiecewiseConstantUtility],
    k: int,
    epsilon=1e-6,
    max_cuts: int | None = None,
    time_budget: float | None = 10.0,
) -> ConsensusDivision:
    """Search for a consensus division with as few cuts as possible, up to ``n(k-1)``.

    For ``c = 0, 1, ...`` cuts, every label pattern and every placement of the
    cuts into segments of the common refinement is tried; each placement is an
    exact LP minimising the worst deviation.  The first division whose
    independently re-integrated deviation is at most ``epsilon`` wins.
    """
    n = len(valuations)
    if n < 1:
        raise ValueError("need at least one valuation")
    if n > 5 or k not in (2, 3):
        raise ValueError("minimal-cut search is limited to n <= 5 agents and k in {2, 3}")
    eps = as_fraction(epsilon)
    bound = n * (k - 1)
    limit = min(bound, MAX_CUTS if max_cuts is None else max_cuts)
    bps = list(common_breakpoints(valuations))
    vals = [_Normalized(v, bps) for v in valuations]
    nseg = len(bps) - 1
    T = bps[-1]
    deadline = None if time_budget is None else time.monotonic() + time_budget
    best = None
    for c in range(1, limit + 1):
        for pattern in _label_patterns(c, k):
            for seg_choice in itertools.combinations_with_replacement(range(nseg), c):
                if deadline is not None and time.monotonic() > deadline:
                    raise ConsensusNotFoundError(best, c)
                cuts, resid = _fit_cuts(vals, bps, pattern, seg_choice, k)
                if cuts is None:
                    continue
                if best is None or resid < best:
                    best = resid
                if resid > eps:
                    continue
                edges = [Fraction(0)] + cuts + [T]
                div = ConsensusDivision(
                    k, tuple((edges[p], edges[p + 1], lab) for p, lab in enumerate(pattern))
                )
                dev = div.max_deviation(valuations)
                if dev <= eps:
                    return ConsensusDivision(k, div.intervals, dev)
    raise ConsensusNotFoundError(best, limit)


def reduce_consensus_to_electricity(valuations: Sequence[PiecewiseConstantUtility]) -> Instance:
    """Electricity instance whose egalitarian optimum encodes a 2-consensus division.

    Supply ``m`` (the number of valuations); agents ``0..m-1`` have demand 1 and
    the given valuations; agent ``m`` has demand ``m`` and the average valuation.
    The only maximal feasible sets are ``{0..m-1}`` and ``{m}``.
    """
    m = len(valuations)
    if m < 1:
        raise ValueError("need at least one valuation")
    bps = common_breakpoints(valuations)
    refined = [v.refined(bps) for v in valuations]
    mean = PiecewiseConstantUtility(
        bps,
        tuple(sum((u.densities[s] for u in refined), Fraction(0)) / m for s in range(len(bps) - 1)),
    )
    agents = [Agent(1, v, i) for i, v in enumerate(valuations)]
    agents.append(Agent(m, mean, m))
    return Instance(m, bps[-1], tuple(agents))


def extract_consensus_from_egalitarian(inst: Instance, A: Allocation) -> ConsensusDivision:
    """Read a 2-consensus division off an allocation of a reduced instance.

    Piece 0 is the time the demand-1 agents are connected together, piece 1
    the time the big agent is connected.  The returned ``deviation`` is the
    re-integrated worst ``|v_i(piece) - 1/2|`` over the original valuations.
    """
    m = inst.n - 1
    small = frozenset(range(m))
    big = frozenset({m})
    rows = []
    for a, b, members in A.timeline(inst.horizon):
        if members == small:
            rows.append((a, b, 0))
        elif members == big:
            rows.append((a, b, 1))
        else:
            raise StructureError(
                f"set {sorted(members)} connected on [{a}, {b}); only {sorted(small)} and {sorted(big)} are allowed"
            )
    div = ConsensusDivision(2, tuple(rows))
    originals = [ag.utility for ag in inst.agents[:m]]
    return ConsensusDivision(2, div.intervals, div.max_deviation(originals))
