"""Time shares over maximal feasible sets.

Uniform utilities: the agents only care how long they are connected, so a
solution is a distribution over maximal feasible sets (fractional approval
voting with the sets as candidates).  Additive utilities: the same program is
solved per utility segment, then the sub-intervals are ordered to avoid
needless switching.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from ._rational import TOL
from .lp import solve_lp
from .model import Allocation, Instance, Interval, normalize_utilities
from .packing import DEFAULT_AGENT_CAP, FeasibleSet, TooManyAgentsError, enumerate_maximal_feasible_sets


class GFSInfeasibleError(RuntimeError):
    def __init__(self, groups):
        self.groups = groups
        super().__init__(f"group fair share constraints are infeasible; groups involved: {groups}")


@dataclass(frozen=True)
class SetDistribution:
    """Fraction of the timeline each set is connected; shares sum to one."""

    sets: tuple[FeasibleSet, ...]
    shares: tuple[Fraction, ...]
    tight_groups: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if len(self.sets) != len(self.shares):
            raise ValueError("one share per set is required")
        if any(s < 0 for s in self.shares):
            raise ValueError("shares must be non-negative")
        if abs(sum(self.shares) - 1) > TOL:
            raise ValueError(f"shares sum to {sum(self.shares)}, not 1")

    def agent_fraction(self, i: int) -> Fraction:
        return sum((x for S, x in zip(self.sets, self.shares) if i in S), Fraction(0))

    def fractions(self, n: int) -> list[Fraction]:
        return [self.agent_fraction(i) for i in range(n)]

    def share_of(self, members) -> Fraction:
        members = tuple(sorted(members))
        return sum((x for S, x in zip(self.sets, self.shares) if S.members == members), Fraction(0))

    @property
    def support(self) -> list[tuple[FeasibleSet, Fraction]]:
        return [(S, x) for S, x in zip(self.sets, self.shares) if x > 0]

    def to_allocation(self, n: int, horizon) -> Allocation:
        """Lay the supported sets out one after another over ``[0, horizon)``."""
        t = Fraction(0)
        cells = []
        for S, x in self.support:
            cells.append((t, t + x * horizon, S.members))
            t += x * horizon
        return Allocation.from_timeline(n, cells)


# ---------------------------------------------------------------------------
# shared LP machinery


def _sparsest(A_ge, b_ge, A_eq, b_eq, x):
    """Greedy support reduction: zero out columns one at a time while staying feasible."""
    nv = len(x)
    removed: set[int] = set()
    tried: set[int] = set()
    while True:
        cands = sorted((j for j in range(nv) if x[j] > 0 and j not in tried), key=lambda j: (x[j], j))
        if not cands:
            return x
        j = cands[0]
        tried.add(j)
        keep = [c for c in range(nv) if c not in removed and c != j]
        res = solve_lp(
            [0] * len(keep),
            [[-row[c] for c in keep] for row in A_ge],
            [-b for b in b_ge],
            [[row[c] for c in keep] for row in A_eq],
            b_eq,
        )
        if res.ok and sum(1 for v in res.x if v > 0) < sum(1 for v in x if v > 0):
            removed.add(j)
            x = [Fraction(0)] * nv
            for c, v in zip(keep, res.x):
                x[c] = v


def _solve_maximin(A_cov, A_eq, b_eq, extra_ge=(), min_support=True):
    """Maximise ``r`` s.t. ``A_cov[i] . x >= r`` for every row, ``A_eq x = b_eq``, ``x >= 0``.

    ``extra_ge`` holds ``(row, bound)`` pairs meaning ``row . x >= bound``.
    """
    nv = len(A_cov[0])
    c = [0] * nv + [1]
    A_ub = [[-v for v in row] + [1] for row in A_cov]
    b_ub = [0] * len(A_cov)
    for row, bound in extra_ge:
        A_ub.append([-v for v in row] + [0])
        b_ub.append(-bound)
    A_eq_full = [list(row) + [0] for row in A_eq]
    res = solve_lp(c, A_ub, b_ub, A_eq_full, b_eq)
    if not res.ok:
        return None, None
    r = res.value
    x = res.x[:nv]
    if min_support:
        A_ge = [list(row) for row in A_cov] + [list(row) for row, _ in extra_ge]
        b_ge = [r] * len(A_cov) + [b for _, b in extra_ge]
        x = _sparsest(A_ge, b_ge, [list(row) for row in A_eq], b_eq, x)
    return x, r


def _coverage(sets: Sequence[FeasibleSet], n: int) -> list[list[int]]:
    return [[1 if i in S else 0 for S in sets] for i in range(n)]


# ---------------------------------------------------------------------------
# uniform utilities


def egalitarian_uniform(
    inst: Instance, cap: int = DEFAULT_AGENT_CAP, min_support: bool = True
) -> tuple[SetDistribution, Fraction]:
    """Largest ``r`` such that every agent can be connected at least ``r`` of the time.

    Among optimal distributions, one with few supported sets is preferred.
    """
    sets = enumerate_maximal_feasible_sets(inst, cap)
    m = len(sets)
    x, r = _solve_maximin(_coverage(sets, inst.n), [[1] * m], [1], min_support=min_support)
    if x is None:  # pragma: no cover - every agent fits alone, so the program is feasible
        raise RuntimeError("egalitarian program infeasible")
    return SetDistribution(tuple(sets), tuple(x)), r


def ifs_check(dist: SetDistribution, n: int) -> bool:
    """Individual fair share: every agent connected at least ``1/n`` of the time."""
    return all(f >= Fraction(1, n) - TOL for f in dist.fractions(n))


def _group_slack(dist: SetDistribution, n: int):
    """For every group mask G: (share of sets meeting G) - |G|/n, scaled to integers.

    Returns ``(slack, scale)`` where ``slack`` is an array over masks ``0..2^n-1``
    and ``slack[G] / scale`` is the exact slack.
    """
    shares = [Fraction(x) for x in dist.shares]
    scale = math.lcm(n, *(x.denominator for x in shares))
    size = 1 << n
    use_obj = scale * n >= 2**62
    zeta = np.zeros(size, dtype=object if use_obj else np.int64)
    for S, x in zip(dist.sets, shares):
        if x:
            mask = 0
            for i in S.members:
                mask |= 1 << i
            zeta[mask] += x.numerator * (scale // x.denominator)
    # subset-sum transform: zeta[M] = sum of shares of sets contained in M
    for bit in range(n):
        view = zeta.reshape(-1, 2, 1 << bit)
        view[:, 1, :] += view[:, 0, :]
    full = size - 1
    masks = np.arange(size, dtype=np.int64)
    meets = scale - zeta[full ^ masks]
    sizes = np.bitwise_count(masks.astype(np.uint64)).astype(np.int64)
    slack = meets - sizes * (scale // n)
    return slack, scale


def gfs_check(dist: SetDistribution, n: int) -> bool:
    """Group fair share: each group G gets at least ``|G|/n`` from the sets that meet it."""
    if n > DEFAULT_AGENT_CAP:
        raise TooManyAgentsError(f"group fair share check enumerates 2^n groups; n={n} is over the cap")
    slack, scale = _group_slack(dist, n)
    return bool(min(slack[1:]) >= -TOL * scale)


def _mask_members(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def gfs_allocation(inst: Instance, cap: int = DEFAULT_AGENT_CAP, max_tight: int = 64) -> SetDistribution:
    """A distribution meeting every group fair share constraint, maximising ``r`` secondarily.

    Group constraints are added lazily: solve with the ones collected so far,
    enumerate all ``2^n`` groups against the solution, add the most violated,
    repeat.  The returned ``tight_groups`` are groups whose constraint binds.
    """
    n = inst.n
    if n > cap:
        raise TooManyAgentsError(f"group fair share needs n <= {cap}, got {n}")
    sets = enumerate_maximal_feasible_sets(inst, cap)
    m = len(sets)
    cov = _coverage(sets, n)
    groups: dict[int, tuple[list[int], Fraction]] = {}
    full = (1 << n) - 1
    while True:
        x, r = _solve_maximin(cov, [[1] * m], [1], list(groups.values()), min_support=False)
        if x is None:
            raise GFSInfeasibleError([_mask_members(g) for g in groups])
        dist = SetDistribution(tuple(sets), tuple(x))
        slack, _ = _group_slack(dist, n)
        slack[0] = 0
        worst = np.argsort(slack, kind="stable")[:8]
        new = [int(g) for g in worst if slack[g] < 0 and int(g) not in groups]
        if not new:
            break
        for g in new:
            row = [1 if any(g >> i & 1 for i in S.members) else 0 for S in sets]
            groups[g] = (row, Fraction(bin(g).count("1"), n))
    tight = [int(g) for g in np.flatnonzero(slack == 0) if g != 0 and g != full]
    tight.sort(key=lambda g: (bin(g).count("1"), _mask_members(g)))
    return SetDistribution(
        tuple(sets), tuple(x), tuple(_mask_members(g) for g in tight[:max_tight])
    )


@dataclass(frozen=True)
class FairnessReport:
    fractions: tuple[Fraction, ...]
    ifs: bool
    gfs: bool
    egalitarian_optimum: Fraction
    worst_fraction: Fraction
    below_optimum: tuple[int, ...]

    @property
    def contentious(self) -> bool:
        """Group fairness holds, yet some agent sits below what the egalitarian optimum guarantees."""
        return self.gfs and bool(self.below_optimum)


def fairness_report(inst: Instance, dist: SetDistribution) -> FairnessReport:
    n = inst.n
    _, r = egalitarian_uniform(inst, min_support=False)
    fr = tuple(dist.fractions(n))
    return FairnessReport(
        fractions=fr,
        ifs=ifs_check(dist, n),
        gfs=gfs_check(dist, n),
        egalitarian_optimum=r,
        worst_fraction=min(fr),
        below_optimum=tuple(i for i, f in enumerate(fr) if f < r - TOL),
    )


# ---------------------------------------------------------------------------
# additive utilities


@dataclass(frozen=True)
class SegmentAssignment:
    """Per utility segment, the sets connected in it and the fraction of the segment each gets.

    ``parts[s]`` is listed in layout order; members are agent index tuples.
    """

    segments: tuple[Interval, ...]
    parts: tuple[tuple[tuple[tuple[int, ...], Fraction], ...], ...]
    n: int = field(default=0)

    def __post_init__(self):
        if len(self.segments) != len(self.parts):
            raise ValueError("one part list per segment is required")
        for s, parts in enumerate(self.parts):
            if abs(sum((x for _, x in parts), Fraction(0)) - 1) > TOL:
                raise ValueError(f"segment {s}: shares do not sum to 1")

    @property
    def horizon(self) -> Fraction:
        return self.segments[-1][1]

    def to_allocation(self) -> Allocation:
        cells = []
        for (a, b), parts in zip(self.segments, self.parts):
            t = a
            for members, x in parts:
                if x <= 0:
                    continue
                end = t + x * (b - a)
                cells.append((t, end, members))
                t = end
        return Allocation.from_timeline(self.n, cells)

    def switch_count(self) -> int:
        return self.to_allocation().switch_count(self.horizon)

    @classmethod
    def from_allocation(cls, A: Allocation, breakpoints: Sequence[Fraction]) -> "SegmentAssignment":
        """Group an allocation's cells by the segment they fall in (first-appearance order)."""
        bps = sorted(set(breakpoints))
        cells = A.timeline(bps[-1], extra_points=bps, merge=False)
        segs = list(zip(bps, bps[1:]))
        parts = []
        k = 0
        for a, b in segs:
            acc: dict[tuple[int, ...], Fraction] = {}
            while k < len(cells) and cells[k][1] <= b:
                ca, cb, members = cells[k]
                key = tuple(sorted(members))
                acc[key] = acc.get(key, Fraction(0)) + (cb - ca)
                k += 1
            parts.append(tuple((mem, length / (b - a)) for mem, length in acc.items()))
        return cls(tuple(segs), tuple(parts), A.n)


def _chain(parts_per_segment):
    """Choose each segment's first and last set to minimise boundary switches (exact DP).

    Internal switches are fixed at ``len(parts) - 1`` per segment, so only the
    boundary pairs matter.  Returns the reordered part lists.
    """
    merged = []
    for parts in parts_per_segment:
        # a set listed twice in one segment becomes one sub-interval
        share: dict = {}
        for mem, x in parts:
            if x > 0:
                share[mem] = share.get(mem, Fraction(0)) + x
        merged.append(share)
    keys = [list(share) for share in merged]
    INF = math.inf
    # dp[s][last] = (cost, first, prev_last)
    dp: list[dict] = []
    for s, ks in enumerate(keys):
        layer: dict = {}
        for first in ks:
            if s == 0:
                base, prev = 0, None
            else:
                base, prev = INF, None
                for pl, (cost, _, _) in dp[-1].items():
                    c = cost + (pl != first)
                    if c < base:
                        base, prev = c, pl
            lasts = [first] if len(ks) == 1 else [k for k in ks if k != first]
            for last in lasts:
                if last not in layer or base < layer[last][0]:
                    layer[last] = (base, first, prev)
        dp.append(layer)
    # backtrack
    last = min(dp[-1], key=lambda k: (dp[-1][k][0], keys[-1].index(k)))
    choice = [None] * len(keys)
    for s in range(len(keys) - 1, -1, -1):
        _, first, prev = dp[s][last]
        choice[s] = (first, last)
        last = prev
    out = []
    for share, (first, last) in zip(merged, choice):
        middle = [mem for mem in share if mem not in (first, last)]
        order = [first] + middle + ([last] if last != first else [])
        out.append(tuple((mem, share[mem]) for mem in order))
    return out


def minimize_switches(obj, inst: Instance | None = None) -> Allocation:
    """Reorder sub-intervals inside each utility segment so the connected set changes less often.

    Densities are constant on a segment, so any reordering keeps every
    agent's utility.  Accepts a :class:`SegmentAssignment`, or an
    :class:`Allocation` together with the instance whose breakpoints define
    the segments.  The input is returned unchanged unless switches drop.
    """
    if isinstance(obj, SegmentAssignment):
        assignment = obj
        original = obj.to_allocation()
    else:
        if inst is None:
            raise ValueError("an Allocation needs its instance to know the utility segments")
        original = obj
        assignment = SegmentAssignment.from_allocation(obj, inst.breakpoints())
    horizon = assignment.horizon
    chained = SegmentAssignment(assignment.segments, tuple(_chain(assignment.parts)), assignment.n)
    candidate = chained.to_allocation()
    if candidate.switch_count(horizon) < original.switch_count(horizon):
        return candidate
    return original


def _block_schedule_milp(norm: Instance, sets, r, cuts: int, time_limit: float):
    """Float MILP: ``cuts + 1`` consecutive blocks, neighbours connecting different sets.

    Feasibility only: every agent must keep at least ``r``.  Returns
    ``(block_sets, cut_segments)`` or ``None``.  Only these combinatorial
    choices are used; cut positions are recomputed exactly afterwards.
    """
    bps = norm.breakpoints()
    nseg = len(bps) - 1
    m, n, B, c = len(sets), norm.n, cuts + 1, cuts
    lens = [float(b - a) for a, b in zip(bps, bps[1:])]
    cum = [[float(u.cumulative(bp)) for bp in bps[:-1]] for u in norm.utilities]
    dens = [[float(u.density_at(bp)) for bp in bps[:-1]] for u in norm.utilities]
    # variable layout: block sets, cut segments | cut offsets, agent block values
    w0 = 0
    z0 = w0 + B * m
    y0 = z0 + c * nseg
    u0 = y0 + c * nseg
    nv = u0 + B * n
    W = lambda b, j: w0 + b * m + j
    Z = lambda j, s: z0 + j * nseg + s
    Y = lambda j, s: y0 + j * nseg + s
    U = lambda b, i: u0 + b * n + i
    rows, lo, hi = [], [], []

    def add(coefs, lb, ub):
        row = np.zeros(nv)
        for idx, v in coefs:
            row[idx] += v
        rows.append(row)
        lo.append(lb)
        hi.append(ub)

    for b in range(B):
        add([(W(b, j), 1) for j in range(m)], 1, 1)
        if b + 1 < B:
            for j in range(m):
                add([(W(b, j), 1), (W(b + 1, j), 1)], -np.inf, 1)
    for j in range(c):
        add([(Z(j, s), 1) for s in range(nseg)], 1, 1)
        for s in range(nseg):
            add([(Y(j, s), 1), (Z(j, s), -lens[s])], -np.inf, 0)
        if j + 1 < c:
            coefs = [(Z(j, s), float(bps[s])) for s in range(nseg)] + [(Y(j, s), 1) for s in range(nseg)]
            coefs += [(Z(j + 1, s), -float(bps[s])) for s in range(nseg)] + [(Y(j + 1, s), -1) for s in range(nseg)]
            add(coefs, -np.inf, 0)

    def value_at(i, j, sign):
        # sign * F_i(t_j); j == -1 is time 0, j == c is the horizon
        if j < 0:
            return [], 0.0
        if j >= c:
            return [], sign * 1.0
        coefs = [(Z(j, s), sign * cum[i][s]) for s in range(nseg)]
        coefs += [(Y(j, s), sign * dens[i][s]) for s in range(nseg)]
        return coefs, 0.0

    for i in range(n):
        for b in range(B):
            # u_bi <= F_i(t_b) - F_i(t_{b-1}) and u_bi <= [i in block b's set]
            c1, k1 = value_at(i, b, -1.0)
            c2, k2 = value_at(i, b - 1, 1.0)
            add([(U(b, i), 1)] + c1 + c2, -np.inf, -(k1 + k2))
            add([(U(b, i), 1)] + [(W(b, j), -1) for j, S in enumerate(sets) if i in S], -np.inf, 0)
        add([(U(b, i), 1) for b in range(B)], float(r) - 1e-9, np.inf)
    integrality = np.zeros(nv)
    integrality[w0:y0] = 1
    ub = np.ones(nv)
    for j in range(c):
        for s in range(nseg):
            ub[Y(j, s)] = lens[s]
    res = milp(
        np.zeros(nv),
        constraints=LinearConstraint(np.array(rows), lo, hi),
        integrality=integrality,
        bounds=Bounds(np.zeros(nv), ub),
        options={"time_limit": max(time_limit, 0.01)},
    )
    if res.x is None or res.status != 0:
        return None
    x = res.x
    block_sets = [int(np.argmax([x[W(b, j)] for j in range(m)])) for b in range(B)]
    cut_segs = [int(np.argmax([x[Z(j, s)] for s in range(nseg)])) for j in range(c)]
    return block_sets, cut_segs


def _exact_block_schedule(norm: Instance, sets, r, block_sets, cut_segs):
    """Exact cut positions for a fixed block pattern; ``None`` if ``r`` is not reachable."""
    bps = norm.breakpoints()
    c = len(cut_segs)
    A_ub, b_ub = [], []
    for j, s in enumerate(cut_segs):
        row = [0] * c
        row[j] = 1
        A_ub.append(row)
        b_ub.append(bps[s + 1] - bps[s])
        if j + 1 < c:
            row = [0] * c
            row[j], row[j + 1] = 1, -1
            A_ub.append(row)
            b_ub.append(bps[cut_segs[j + 1]] - bps[s])
    for i, u in enumerate(norm.utilities):
        coef = [Fraction(0)] * c
        const = Fraction(0)
        for b, j in enumerate(block_sets):
            if i not in sets[j]:
                continue
            if b < c:
                s = cut_segs[b]
                coef[b] += u.density_at(bps[s])
                const += u.cumulative(bps[s])
            else:
                const += 1
            if b > 0:
                s = cut_segs[b - 1]
                coef[b - 1] -= u.density_at(bps[s])
                const -= u.cumulative(bps[s])
        # coef . y + const >= r
        A_ub.append([-v for v in coef])
        b_ub.append(const - r)
    res = solve_lp([0] * c, A_ub, b_ub) if c else None
    if c == 0:
        # a single block: feasible iff the one set contains everyone
        if all(i in sets[block_sets[0]] for i in range(norm.n)):
            edges = [Fraction(0), norm.horizon]
        else:
            return None
    elif not res.ok:
        return None
    else:
        edges = [Fraction(0)] + [bps[s] + y for s, y in zip(cut_segs, res.x)] + [norm.horizon]
    cells = [(edges[b], edges[b + 1], sets[j].members) for b, j in enumerate(block_sets)]
    return Allocation.from_timeline(norm.n, cells)


def reduce_cuts(
    norm: Instance, sets, r, current: Allocation, time_budget: float | None = 5.0
) -> Allocation:
    """Look for a schedule of single-set blocks with fewer switches than ``current``.

    For a cut count ``c`` a float MILP proposes which set each block connects
    and which segment each cut lands in; an exact LP then places the cuts so
    every agent keeps ``>= r``.  The first ``c`` tried is
    ``min(current - 1, n - 1)``; from a success the search steps down, from a
    failure it steps up.  Returns ``current`` if nothing better turns up.
    """
    best_A = current
    best = current.switch_count(norm.horizon)
    deadline = None if time_budget is None else time.monotonic() + time_budget

    def attempt(c):
        left = 60.0 if deadline is None else deadline - time.monotonic()
        if left <= 0:
            return None
        pattern = _block_schedule_milp(norm, sets, r, c, left)
        return None if pattern is None else _exact_block_schedule(norm, sets, r, *pattern)

    start = min(best - 1, norm.n - 1)
    if start < 0:
        return current
    A = attempt(start)
    if A is not None:
        best_A, best = A, A.switch_count(norm.horizon)
        c = best - 1
        while c >= 0:
            A = attempt(c)
            if A is None:
                break
            best_A, best = A, A.switch_count(norm.horizon)
            c = best - 1
    else:
        for c in range(start + 1, best):
            A = attempt(c)
            if A is not None:
                best_A = A
                break
            if deadline is not None and time.monotonic() > deadline:
                break
    return best_A


def egalitarian_additive(
    inst: Instance,
    cap: int = DEFAULT_AGENT_CAP,
    min_support: bool = True,
    cut_budget: float | None = 5.0,
) -> tuple[SegmentAssignment, Allocation, Fraction]:
    """Maximin over per-segment set shares with normalised additive utilities.

    On each segment of the common breakpoint refinement the sets share the
    segment's length; agent ``i`` values its part of segment ``s`` at
    ``density_i(s) * length(s) * (sum of shares of sets containing i)``.
    The per-segment layout is reordered by :func:`minimize_switches`; with a
    positive ``cut_budget`` :func:`reduce_cuts` then searches for a schedule
    with fewer switches that still gives everyone ``r*``.
    Returns the segment assignment, the allocation and ``r*``.
    """
    norm = normalize_utilities(inst)
    sets = enumerate_maximal_feasible_sets(norm, cap)
    m = len(sets)
    bps = norm.breakpoints()
    segs = list(zip(bps, bps[1:]))
    nseg = len(segs)
    weights = [
        [u.density_at(a) * (b - a) for a, b in segs] for u in norm.utilities
    ]
    A_cov = []
    for i in range(norm.n):
        row = []
        for s in range(nseg):
            w = weights[i][s]
            row.extend(w if i in S else 0 for S in sets)
        A_cov.append(row)
    A_eq = []
    for s in range(nseg):
        row = [0] * (nseg * m)
        row[s * m:(s + 1) * m] = [1] * m
        A_eq.append(row)
    x, r = _solve_maximin(A_cov, A_eq, [1] * nseg, min_support=min_support)
    if x is None:  # pragma: no cover
        raise RuntimeError("egalitarian program infeasible")
    parts = tuple(
        tuple((sets[j].members, x[s * m + j]) for j in range(m) if x[s * m + j] > 0)
        for s in range(nseg)
    )
    assignment = SegmentAssignment(tuple(segs), parts, norm.n)
    A = minimize_switches(assignment)
    if cut_budget is None or cut_budget > 0:
        better = reduce_cuts(norm, sets, r, A, cut_budget)
        if better is not A:
            A = better
            assignment = SegmentAssignment.from_allocation(A, bps)
    return assignment, A, r
