"""Identical-demand regimes: round-robin for uniform utilities, Even-Paz on a copied cake otherwise."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ._rational import as_fraction
from .model import (
    Allocation,
    Instance,
    InstanceError,
    Interval,
    PiecewiseConstantUtility,
    merge_intervals,
)


def connection_quota(supply, demand) -> int:
    """How many agents of equal ``demand`` fit under ``supply`` at once (exact floor)."""
    supply, demand = as_fraction(supply), as_fraction(demand)
    if demand <= 0:
        raise ValueError("demand must be positive")
    if demand > supply:
        raise ValueError(f"demand {demand} exceeds supply {supply}")
    return math.floor(supply / demand)


def _common_demand(inst: Instance) -> Fraction:
    demands = set(inst.demands)
    if len(demands) != 1:
        raise InstanceError(
            "agents have different demands; use the packing/egalitarian solvers instead"
        )
    return demands.pop()


def allocate_uniform_identical(inst: Instance) -> Allocation:
    """Rotate ``q`` connected agents through ``n`` equal slots.

    In slot ``j`` agents ``j, j+1, ..., j+q-1`` (mod n) are connected, so every
    agent is on for ``q/n`` of the horizon and exactly ``q`` agents are on at
    any moment.
    """
    d = _common_demand(inst)
    n, T = inst.n, inst.horizon
    q = connection_quota(inst.supply, d)
    if q >= n:
        return Allocation(tuple(((Fraction(0), T),) for _ in range(n)))
    width = T / n
    pieces: list[list[Interval]] = [[] for _ in range(n)]
    for j in range(n):
        slot = (width * j, width * (j + 1))
        for off in range(q):
            pieces[(j + off) % n].append(slot)
    return Allocation(tuple(tuple(p) for p in pieces))


@dataclass(frozen=True)
class CopiedCake:
    """``copies`` back-to-back repetitions of ``[0, base_horizon]``."""

    copies: int
    base_horizon: Fraction
    utilities: tuple[PiecewiseConstantUtility, ...]

    @classmethod
    def build(cls, utilities: Sequence[PiecewiseConstantUtility], copies: int) -> "CopiedCake":
        if copies < 1:
            raise ValueError("need at least one copy")
        T = utilities[0].horizon
        ext = []
        for u in utilities:
            bps = [Fraction(0)]
            dens = []
            for c in range(copies):
                bps.extend(b + c * T for b in u.breakpoints[1:])
                dens.extend(u.densities)
            ext.append(PiecewiseConstantUtility(tuple(bps), tuple(dens)))
        return cls(copies, T, tuple(ext))

    @property
    def horizon(self) -> Fraction:
        return self.copies * self.base_horizon

    def fold(self, interval: Interval) -> tuple[Interval, ...]:
        """Map a piece of the copied cake back onto ``[0, T]`` (t -> t mod T)."""
        a, b = interval
        T = self.base_horizon
        out = []
        c = math.floor(a / T)
        while a < b:
            end = min(b, (c + 1) * T)
            out.append((a - c * T, end - c * T))
            a = end
            c += 1
        return merge_intervals(out)


def _mark_order(marks, agents):
    # ties go to the lower agent index
    return sorted(agents, key=lambda i: (marks[i], i))


def even_paz(utilities: Sequence[PiecewiseConstantUtility], interval=None) -> list[Interval]:
    """Proportional division of ``interval`` into one contiguous piece per agent.

    Recursive halving: with ``n`` agents, each marks where its value of the
    current interval splits ``floor(n/2) : ceil(n/2)``; the interval is cut at
    the ``floor(n/2)``-th smallest mark and the two halves are divided
    recursively among the agents whose marks fell left and right.
    """
    n = len(utilities)
    if n == 0:
        return []
    if interval is None:
        interval = (Fraction(0), utilities[0].horizon)
    a, b = as_fraction(interval[0]), as_fraction(interval[1])
    for i, u in enumerate(utilities):
        if u.value(a, b) <= 0:
            raise ValueError(f"agent {i} has zero value for [{a}, {b}]; mark undefined")
    pieces: list[Interval | None] = [None] * n
    _even_paz(utilities, list(range(n)), a, b, pieces)
    return pieces  # type: ignore[return-value]


def _even_paz(utilities, agents, a, b, pieces):
    n = len(agents)
    if n == 1:
        pieces[agents[0]] = (a, b)
        return
    left = n // 2
    marks = {}
    for i in agents:
        u = utilities[i]
        marks[i] = u.point_at_value(a, u.value(a, b) * Fraction(left, n))
    order = _mark_order(marks, agents)
    cut = marks[order[left - 1]]
    _even_paz(utilities, order[:left], a, cut, pieces)
    _even_paz(utilities, order[left:], cut, b, pieces)


def allocate_identical_additive(inst: Instance) -> Allocation:
    """Even-Paz on ``q`` copies of the horizon, folded back onto ``[0, T]``.

    Each base time has ``q`` preimages and each preimage belongs to one agent,
    so at most ``q`` agents are ever connected together; every agent gets at
    least ``q/n`` of its own total utility.
    """
    d = _common_demand(inst)
    n, T = inst.n, inst.horizon
    q = connection_quota(inst.supply, d)
    if q >= n:
        return Allocation(tuple(((Fraction(0), T),) for _ in range(n)))
    cake = CopiedCake.build(inst.utilities, q)
    pieces = even_paz(cake.utilities, (Fraction(0), cake.horizon))
    return Allocation(tuple(cake.fold(p) for p in pieces))
