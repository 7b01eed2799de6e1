"""Independent reference computations used to check the solvers.

Nothing here calls into the code paths under test beyond reading instance data.
"""

from __future__ import annotations

import functools
from fractions import Fraction

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp


def sample_density(u, ts):
    """Density at each time via a direct scan of the breakpoints (no prefix sums)."""
    bps = [float(b) for b in u.breakpoints]
    out = np.empty(len(ts))
    for k, t in enumerate(ts):
        j = 0
        while j + 1 < len(bps) - 1 and t >= bps[j + 1]:
            j += 1
        out[k] = float(u.densities[j])
    return out


def midpoint_integral(u, intervals, per_unit=4000):
    """Midpoint-rule integral of ``u`` over a list of intervals."""
    total = 0.0
    for a, b in intervals:
        a, b = float(a), float(b)
        if b <= a:
            continue
        k = max(16, int((b - a) * per_unit))
        ts = a + (np.arange(k) + 0.5) * (b - a) / k
        total += sample_density(u, ts).sum() * (b - a) / k
    return total


def sampled_overload(inst, A, points=10_000):
    """Time points (uniform grid of cell midpoints) where connected demand exceeds supply."""
    T = float(inst.horizon)
    ts = (np.arange(points) + 0.5) * T / points
    load = np.zeros(points)
    for i, piece in enumerate(A.pieces):
        d = float(inst.agents[i].demand)
        for a, b in piece:
            load[(ts >= float(a)) & (ts < float(b))] += d
    return ts[load > float(inst.supply) + 1e-9]


def brute_maximal_sets(demands, supply):
    n = len(demands)
    feas = []
    for mask in range(1 << n):
        members = [i for i in range(n) if mask >> i & 1]
        if sum(demands[i] for i in members) <= supply:
            feas.append(frozenset(members))
    maximal = [s for s in feas if not any(s < t for t in feas)]
    return sorted(tuple(sorted(s)) for s in maximal)


def brute_bin_pack(demands, supply):
    """Minimum bins by enumerating set partitions (restricted growth strings)."""
    n = len(demands)
    best = n

    def rec(i, loads):
        nonlocal best
        if len(loads) >= best:
            return
        if i == n:
            best = len(loads)
            return
        for b in range(len(loads)):
            if loads[b] + demands[i] <= supply:
                loads[b] += demands[i]
                rec(i + 1, loads)
                loads[b] -= demands[i]
        loads.append(demands[i])
        rec(i + 1, loads)
        loads.pop()

    rec(0, [])
    return best if n else 0


def milp_q_pack_exists(demands, supply, q, k):
    """Does a q-times packing into k bins exist? Assignment ILP solved by HiGHS."""
    n = len(demands)
    if k < q:
        return False
    nv = n * k  # x[i, b] at i * k + b
    rows, lo, hi = [], [], []
    for i in range(n):
        r = np.zeros(nv)
        r[i * k:(i + 1) * k] = 1
        rows.append(r), lo.append(q), hi.append(q)
    for b in range(k):
        r = np.zeros(nv)
        r[[i * k + b for i in range(n)]] = [float(d) for d in demands]
        rows.append(r), lo.append(-np.inf), hi.append(float(supply) + 1e-9)
    res = milp(
        np.zeros(nv),
        constraints=LinearConstraint(np.array(rows), lo, hi),
        integrality=np.ones(nv),
        bounds=Bounds(0, 1),
    )
    return res.status == 0


@functools.lru_cache(maxsize=None)
def compositions(total: int, parts: int) -> np.ndarray:
    """All non-negative integer vectors of length ``parts`` summing to ``total``."""
    if parts == 1:
        return np.array([[total]], dtype=np.int16)
    blocks = []
    for first in range(total + 1):
        rest = compositions(total - first, parts - 1)
        blocks.append(np.hstack([np.full((len(rest), 1), first, dtype=np.int16), rest]))
    return np.vstack(blocks)


def grid_maximin(sets, n, steps=60):
    """max over shares on the 1/steps simplex grid of min_i (time agent i is connected)."""
    cov = np.array([[1 if i in S else 0 for i in range(n)] for S in sets], dtype=np.int32)
    comps = compositions(steps, len(sets))
    best = 0
    for lo in range(0, len(comps), 500_000):
        vals = comps[lo:lo + 500_000].astype(np.int32) @ cov
        best = max(best, int(vals.min(axis=1).max()))
    return Fraction(best, steps)


def linprog_maximin(sets, n):
    """Float LP via scipy/HiGHS for the same maximin program."""
    m = len(sets)
    c = np.zeros(m + 1)
    c[-1] = -1
    A_ub = np.zeros((n, m + 1))
    for i in range(n):
        for j, S in enumerate(sets):
            if i in S:
                A_ub[i, j] = -1
        A_ub[i, -1] = 1
    A_eq = np.zeros((1, m + 1))
    A_eq[0, :m] = 1
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n), A_eq=A_eq, b_eq=[1], bounds=[(0, None)] * (m + 1))
    return -res.fun


def best_single_cut(u1, u2, grid=10_000):
    """Two agents, two pieces [0,t) / [t,T): best egalitarian value over a grid of cut points."""
    T = float(u1.horizon)
    best = 0.0
    for t in np.linspace(0, T, grid + 1):
        for first, second in ((u1, u2), (u2, u1)):
            v = min(
                midpoint_integral(first, [(0, t)], 200) / float(first.total()),
                midpoint_integral(second, [(t, T)], 200) / float(second.total()),
            )
            best = max(best, v)
    return best


def cellwise_integral(u, intervals):
    """Integral split at the utility's breakpoints, density read at each cell midpoint.

    Exact for piecewise-constant densities up to float rounding.
    """
    bps = [float(b) for b in u.breakpoints]
    total = 0.0
    for a, b in intervals:
        a, b = float(a), float(b)
        pts = sorted({a, b, *(x for x in bps if a < x < b)})
        for lo, hi in zip(pts, pts[1:]):
            total += (hi - lo) * sample_density(u, [(lo + hi) / 2])[0]
    return total
