"""Maximal feasible sets, bin packing and q-times bin packing for unequal demands."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

from ._rational import as_fraction
from .model import Allocation, Instance

DEFAULT_AGENT_CAP = 20
DEFAULT_TIME_BUDGET = 10.0


class TooManyAgentsError(ValueError):
    """Exhaustive enumeration was asked for more agents than the configured cap."""


class PackingNotFoundError(RuntimeError):
    """No q-times packing exists with at most ``k_cap`` bins."""

    def __init__(self, q: int, k_cap: int):
        self.q, self.k_cap = q, k_cap
        super().__init__(f"no {q}-times packing with at most {k_cap} bins (infeasible up to cap)")


@dataclass(frozen=True, order=True)
class FeasibleSet:
    members: tuple[int, ...]
    total_demand: Fraction

    def __contains__(self, i) -> bool:
        return i in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __str__(self) -> str:
        return "{" + ",".join(str(i) for i in self.members) + "}"


def _demands_supply(demands, supply):
    ds = [as_fraction(d) for d in demands]
    S = as_fraction(supply)
    for i, d in enumerate(ds):
        if d <= 0:
            raise ValueError(f"item {i}: demand must be positive")
        if d > S:
            raise ValueError(f"item {i}: demand {d} exceeds supply {S}")
    return ds, S


def maximal_feasible_sets(demands, supply, cap: int = DEFAULT_AGENT_CAP) -> list[FeasibleSet]:
    ds, S = _demands_supply(demands, supply)
    n = len(ds)
    if n > cap:
        raise TooManyAgentsError(
            f"{n} agents exceed the enumeration cap of {cap}; "
            "the number of maximal sets can be exponential, use a heuristic (e.g. packing) instead"
        )
    suffix = [Fraction(0)] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + ds[i]
    out: list[FeasibleSet] = []

    def rec(i, chosen, total, excluded):
        # an excluded agent that fits even after everything else is added can never be blocked
        ceiling = min(S, total + suffix[i])
        for j in excluded:
            if ds[j] <= S - ceiling:
                return
        if i == n:
            if all(ds[j] > S - total for j in excluded):
                out.append(FeasibleSet(tuple(chosen), total))
            return
        if total + ds[i] <= S:
            chosen.append(i)
            rec(i + 1, chosen, total + ds[i], excluded)
            chosen.pop()
        excluded.append(i)
        rec(i + 1, chosen, total, excluded)
        excluded.pop()

    rec(0, [], Fraction(0), [])
    out.sort(key=lambda s: s.members)
    return out


def enumerate_maximal_feasible_sets(inst: Instance, cap: int = DEFAULT_AGENT_CAP) -> list[FeasibleSet]:
    """All inclusion-maximal agent sets whose demands fit under the supply, sorted by members."""
    return maximal_feasible_sets(inst.demands, inst.supply, cap)


# ---------------------------------------------------------------------------
# plain bin packing


def _first_fit_decreasing(ds, S) -> list[list[int]]:
    order = sorted(range(len(ds)), key=lambda i: (-ds[i], i))
    bins: list[list[int]] = []
    loads: list[Fraction] = []
    for i in order:
        for b, load in enumerate(loads):
            if load + ds[i] <= S:
                bins[b].append(i)
                loads[b] += ds[i]
                break
        else:
            bins.append([i])
            loads.append(ds[i])
    return [sorted(b) for b in bins]


def _exact_bin_pack(ds, S, cap, deadline) -> tuple[list[list[int]], bool]:
    n = len(ds)
    if n > cap:
        raise TooManyAgentsError(f"exact bin packing is capped at {cap} items, got {n}")
    best = _first_fit_decreasing(ds, S)
    lower = max(1, math.ceil(sum(ds) / S)) if n else 0
    if len(best) <= lower:
        return best, True
    order = sorted(range(n), key=lambda i: (-ds[i], i))
    best_k = [len(best)]
    bins: list[list[int]] = []
    loads: list[Fraction] = []
    timed_out = [False]

    def rec(pos):
        if timed_out[0]:
            return
        if deadline is not None and time.monotonic() > deadline:
            timed_out[0] = True
            return
        if pos == n:
            if len(bins) < best_k[0]:
                best_k[0] = len(bins)
                best[:] = [sorted(b) for b in bins]
            return
        i = order[pos]
        seen = set()
        for b in range(len(bins)):
            if loads[b] + ds[i] <= S and loads[b] not in seen:
                seen.add(loads[b])
                bins[b].append(i)
                loads[b] += ds[i]
                rec(pos + 1)
                loads[b] -= ds[i]
                bins[b].pop()
                if best_k[0] <= lower:
                    return
        if len(bins) + 1 < best_k[0]:
            bins.append([i])
            loads.append(ds[i])
            rec(pos + 1)
            bins.pop()
            loads.pop()

    rec(0)
    return best, not timed_out[0]


def bin_pack(
    demands,
    supply,
    mode: str = "exact",
    cap: int = DEFAULT_AGENT_CAP,
    time_budget: float | None = DEFAULT_TIME_BUDGET,
) -> tuple[list[list[int]], int]:
    """Pack items into as few capacity-``supply`` bins as possible.

    ``mode="ffd"`` is first-fit-decreasing; ``mode="exact"`` is branch and
    bound seeded with the FFD solution (bins with equal load are treated as
    interchangeable).  Returns ``(bins, k)`` with bins as sorted item lists.
    """
    ds, S = _demands_supply(demands, supply)
    if mode == "ffd":
        bins = _first_fit_decreasing(ds, S)
    elif mode == "exact":
        deadline = None if time_budget is None else time.monotonic() + time_budget
        bins, _ = _exact_bin_pack(ds, S, cap, deadline)
    else:
        raise ValueError(f"unknown bin packing mode {mode!r}")
    bins.sort()
    return bins, len(bins)


# ---------------------------------------------------------------------------
# q-times bin packing


@dataclass(frozen=True)
class QPacking:
    """``bins`` are indexed, so two bins may hold the same members and still be different bins."""

    q: int
    bins: tuple[FeasibleSet, ...]
    optimal: bool = True

    @property
    def k(self) -> int:
        return len(self.bins)

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.q, self.k)

    def multiplicity(self, i: int) -> int:
        return sum(1 for b in self.bins if i in b)

    def to_allocation(self, n: int, horizon) -> Allocation:
        """Connect bin ``j`` during the ``j``-th ``1/k`` of the horizon."""
        T = as_fraction(horizon)
        width = T / self.k
        cells = [(width * j, width * (j + 1), b.members) for j, b in enumerate(self.bins)]
        return Allocation.from_timeline(n, cells)


def _to_sets(bins, ds) -> tuple[FeasibleSet, ...]:
    sets = [FeasibleSet(tuple(sorted(b)), sum((ds[i] for i in b), Fraction(0))) for b in bins]
    sets.sort(key=lambda s: s.members)
    return tuple(sets)


def _q_pack_with_k(ds, S, q, k, deadline):
    """Backtracking: give each item ``q`` distinct bins. Returns bins, None (no packing) or 'timeout'."""
    n = len(ds)
    order = sorted(range(n), key=lambda i: (-ds[i], i))
    loads = [Fraction(0)] * k
    contents: list[list[int]] = [[] for _ in range(k)]
    remaining = [Fraction(0)] * (n + 1)
    for pos in range(n - 1, -1, -1):
        remaining[pos] = remaining[pos + 1] + q * ds[order[pos]]
    capacity = k * S
    state = {"used": Fraction(0), "timeout": False}

    def rec(pos):
        if deadline is not None and time.monotonic() > deadline:
            state["timeout"] = True
            return False
        if pos == n:
            state["result"] = [list(c) for c in contents]
            return True
        if state["used"] + remaining[pos] > capacity:
            return False
        i = order[pos]
        d = ds[i]
        # bins with equal load are interchangeable for the items still to come
        classes: dict[Fraction, list[int]] = {}
        for b in range(k):
            if loads[b] + d <= S:
                classes.setdefault(loads[b], []).append(b)
        keys = sorted(classes, reverse=True)  # fill fuller bins first
        if sum(len(v) for v in classes.values()) < q:
            return False

        def choose(ci, need, picked):
            if need == 0:
                for b in picked:
                    loads[b] += d
                    contents[b].append(i)
                state["used"] += q * d
                ok = rec(pos + 1)
                state["used"] -= q * d
                for b in picked:
                    loads[b] -= d
                    contents[b].pop()
                return ok
            if ci == len(keys):
                return False
            avail = sum(len(classes[kk]) for kk in keys[ci:])
            if avail < need:
                return False
            group = classes[keys[ci]]
            for take in range(min(need, len(group)), -1, -1):
                if choose(ci + 1, need - take, picked + group[:take]):
                    return True
                if state["timeout"]:
                    return False
            return False

        return choose(0, q, [])

    if rec(0):
        return state["result"]
    return "timeout" if state["timeout"] else None


def q_times_bin_pack(
    demands,
    supply,
    q: int,
    k_cap: int | None = None,
    cap: int = DEFAULT_AGENT_CAP,
    time_budget: float | None = DEFAULT_TIME_BUDGET,
) -> QPacking:
    """Fewest capacity-``supply`` bins such that every item sits in ``q`` different bins.

    Tries ``k`` upward from ``max(q, ceil(q * sum / supply))``; ``q`` copies of an
    optimal plain packing bound the search from above.  On timeout the best
    packing found so far is returned with ``optimal=False``.
    """
    if q < 1:
        raise ValueError("q must be at least 1")
    ds, S = _demands_supply(demands, supply)
    n = len(ds)
    if n > cap:
        raise TooManyAgentsError(f"q-times packing is capped at {cap} items, got {n}")
    deadline = None if time_budget is None else time.monotonic() + time_budget
    base, base_exact = _exact_bin_pack(ds, S, cap, deadline)
    fallback = [list(b) for b in base] * q
    lower = max(q, math.ceil(q * sum(ds) / S))
    if k_cap is None:
        k_cap = q * n
    top = min(len(fallback), k_cap + 1)
    for k in range(lower, top):
        res = _q_pack_with_k(ds, S, q, k, deadline)
        if res == "timeout":
            break
        if res is not None:
            return QPacking(q, _to_sets(res, ds), optimal=base_exact)
    else:
        if len(fallback) > k_cap:
            raise PackingNotFoundError(q, k_cap)
        return QPacking(q, _to_sets(fallback, ds), optimal=base_exact)
    if len(fallback) > k_cap:
        raise PackingNotFoundError(q, k_cap)
    return QPacking(q, _to_sets(fallback, ds), optimal=False)


@dataclass(frozen=True)
class PackingRatio:
    q: int
    k: int
    ratio: Fraction
    packing: QPacking
    q_max: int

    @property
    def optimal(self) -> bool:
        return self.packing.optimal


def best_packing_ratio(
    demands,
    supply,
    q_max: int = 6,
    time_budget: float | None = DEFAULT_TIME_BUDGET,
) -> PackingRatio:
    """Best guarantee ``q/k`` over ``q = 1..q_max``; ties keep the smaller ``q``."""
    if q_max < 1:
        raise ValueError("q_max must be at least 1")
    best = None
    for q in range(1, q_max + 1):
        p = q_times_bin_pack(demands, supply, q, time_budget=time_budget)
        if best is None or p.ratio > best.ratio:
            best = p
    return PackingRatio(best.q, best.k, best.ratio, best, q_max)
