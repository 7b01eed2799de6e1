"""Problem data, utility evaluation, feasibility and welfare metrics.

Time is the interval ``[0, T]``. Every stored interval is half-open ``[a, b)``
with ``a < b``; all numbers are kept as :class:`fractions.Fraction` so that the
small worked examples come out exactly (2/3 is 2/3, not 0.6666...).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import accumulate
from typing import Iterable, Sequence

from ._rational import TOL, as_fraction

Interval = tuple[Fraction, Fraction]


class InstanceError(ValueError):
    """An instance (or a file describing one) is malformed."""


class DomainError(ValueError):
    """A time interval reaches outside ``[0, T]``."""


class InfeasibleAllocationError(ValueError):
    """An allocation overloads the supply somewhere on the timeline."""

    def __init__(self, report: "FeasibilityReport"):
        self.report = report
        spans = ", ".join(
            f"[{float(v.start):g},{float(v.end):g}) load {float(v.load):g}"
            for v in report.violations[:5]
        )
        super().__init__(f"allocation exceeds supply on {len(report.violations)} cell(s): {spans}")


# ---------------------------------------------------------------------------
# intervals


def merge_intervals(intervals: Iterable[Sequence]) -> tuple[Interval, ...]:
    """Sort, drop empty intervals and merge overlapping or touching ones."""
    items = sorted(
        (as_fraction(a), as_fraction(b)) for a, b in intervals if as_fraction(b) > as_fraction(a)
    )
    out: list[list[Fraction]] = []
    for a, b in items:
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1][1] = b
        else:
            out.append([a, b])
    return tuple((a, b) for a, b in out)


def total_length(intervals: Iterable[Interval]) -> Fraction:
    return sum((b - a for a, b in intervals), Fraction(0))


def _as_interval_list(Z) -> list[Interval]:
    if len(Z) == 2 and not isinstance(Z[0], (tuple, list)):
        return [(as_fraction(Z[0]), as_fraction(Z[1]))]
    return [(as_fraction(a), as_fraction(b)) for a, b in Z]


# ---------------------------------------------------------------------------
# utilities


@dataclass(frozen=True)
class PiecewiseConstantUtility:
    """Utility density over ``[0, T]``: ``densities[j]`` holds on ``[b_j, b_{j+1})``."""

    breakpoints: tuple[Fraction, ...]
    densities: tuple[Fraction, ...]
    _prefix: tuple[Fraction, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        bps = tuple(as_fraction(b) for b in self.breakpoints)
        dens = tuple(as_fraction(d) for d in self.densities)
        if len(bps) < 2:
            raise InstanceError("a utility needs at least two breakpoints")
        if bps[0] != 0:
            raise InstanceError("breakpoints must start at 0")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise InstanceError("breakpoints must be strictly increasing")
        if len(dens) != len(bps) - 1:
            raise InstanceError(
                f"{len(dens)} densities given for {len(bps) - 1} segments"
            )
        if any(d < 0 for d in dens):
            raise InstanceError("densities must be non-negative")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "densities", dens)
        seg_values = [d * (b2 - b1) for d, b1, b2 in zip(dens, bps, bps[1:])]
        object.__setattr__(self, "_prefix", (Fraction(0),) + tuple(accumulate(seg_values)))

    @classmethod
    def uniform(cls, horizon, total=1) -> "PiecewiseConstantUtility":
        horizon = as_fraction(horizon)
        return cls((Fraction(0), horizon), (as_fraction(total) / horizon,))

    @classmethod
    def from_segment_values(cls, values, horizon=None) -> "PiecewiseConstantUtility":
        """Unit-length segments (or equal segments spanning ``horizon``) with the given values."""
        m = len(values)
        horizon = as_fraction(m if horizon is None else horizon)
        width = horizon / m
        bps = tuple(width * j for j in range(m + 1))
        return cls(bps, tuple(as_fraction(v) / width for v in values))

    @property
    def horizon(self) -> Fraction:
        return self.breakpoints[-1]

    @property
    def segments(self) -> list[Interval]:
        return list(zip(self.breakpoints, self.breakpoints[1:]))

    def total(self) -> Fraction:
        return self._prefix[-1]

    def density_at(self, t) -> Fraction:
        t = as_fraction(t)
        if t < 0 or t > self.horizon:
            raise DomainError(f"time {t} outside [0, {self.horizon}]")
        j = min(bisect.bisect_right(self.breakpoints, t) - 1, len(self.densities) - 1)
        return self.densities[j]

    def cumulative(self, t) -> Fraction:
        """Value of ``[0, t]``."""
        t = as_fraction(t)
        if t < 0 or t > self.horizon:
            raise DomainError(f"time {t} outside [0, {self.horizon}]")
        j = bisect.bisect_right(self.breakpoints, t) - 1
        if j >= len(self.densities):
            return self._prefix[-1]
        return self._prefix[j] + self.densities[j] * (t - self.breakpoints[j])

    def value(self, a, b) -> Fraction:
        a, b = as_fraction(a), as_fraction(b)
        if b <= a:
            if a < 0 or a > self.horizon:
                raise DomainError(f"time {a} outside [0, {self.horizon}]")
            return Fraction(0)
        return self.cumulative(b) - self.cumulative(a)

    def point_at_value(self, start, target) -> Fraction:
        """Leftmost ``x >= start`` with ``value(start, x) == target``.

        Closed form: walk the segments accumulating value and invert linearly in
        the segment where the target is crossed.
        """
        start, target = as_fraction(start), as_fraction(target)
        if target <= 0:
            return start
        goal = self.cumulative(start) + target
        if goal > self._prefix[-1]:
            raise ValueError("target exceeds the value remaining after start")
        # first prefix index whose value reaches goal
        j = bisect.bisect_left(self._prefix, goal)
        # crossing happens inside segment j-1
        seg = j - 1
        d = self.densities[seg]
        x = self.breakpoints[seg] + (goal - self._prefix[seg]) / d
        return max(x, start)

    def scaled(self, factor) -> "PiecewiseConstantUtility":
        f = as_fraction(factor)
        return PiecewiseConstantUtility(self.breakpoints, tuple(d * f for d in self.densities))

    def normalized(self) -> "PiecewiseConstantUtility":
        tot = self.total()
        if tot <= 0:
            raise InstanceError("cannot normalise a utility with zero total value")
        return self.scaled(1 / tot)

    def refined(self, points: Iterable) -> "PiecewiseConstantUtility":
        """Same function on a finer breakpoint grid (``points`` inside ``[0, T]``)."""
        bps = sorted(set(self.breakpoints) | {as_fraction(p) for p in points})
        if bps[0] < 0 or bps[-1] > self.horizon:
            raise DomainError("refinement points outside the horizon")
        return PiecewiseConstantUtility(
            tuple(bps), tuple(self.density_at(a) for a in bps[:-1])
        )


def utility_of(u: PiecewiseConstantUtility, Z) -> Fraction:
    """Value of an interval ``(a, b)`` or of a collection of disjoint intervals."""
    intervals = _as_interval_list(Z)
    for a, b in intervals:
        if a < 0 or b > u.horizon or b < a:
            raise DomainError(f"interval [{a}, {b}] not inside [0, {u.horizon}]")
    ordered = sorted(intervals)
    for (a1, b1), (a2, b2) in zip(ordered, ordered[1:]):
        if a2 < b1 and b2 > a2 and b1 > a1:
            raise ValueError("intervals overlap")
    return sum((u.value(a, b) for a, b in intervals), Fraction(0))


def common_breakpoints(utilities: Iterable[PiecewiseConstantUtility]) -> tuple[Fraction, ...]:
    pts: set[Fraction] = set()
    for u in utilities:
        pts.update(u.breakpoints)
    return tuple(sorted(pts))


# ---------------------------------------------------------------------------
# instance


@dataclass(frozen=True)
class Agent:
    demand: Fraction
    utility: PiecewiseConstantUtility
    id: object = None

    def __post_init__(self):
        object.__setattr__(self, "demand", as_fraction(self.demand))


@dataclass(frozen=True)
class Instance:
    supply: Fraction
    horizon: Fraction
    agents: tuple[Agent, ...]

    def __post_init__(self):
        object.__setattr__(self, "supply", as_fraction(self.supply))
        object.__setattr__(self, "horizon", as_fraction(self.horizon))
        object.__setattr__(self, "agents", tuple(self.agents))
        if self.supply <= 0:
            raise InstanceError("supply must be positive")
        if self.horizon <= 0:
            raise InstanceError("horizon must be positive")
        if not self.agents:
            raise InstanceError("an instance needs at least one agent")
        for i, ag in enumerate(self.agents):
            name = ag.id if ag.id is not None else i
            if ag.demand <= 0:
                raise InstanceError(f"agent {name}: demand must be positive")
            if ag.demand > self.supply:
                raise InstanceError(
                    f"agent {name}: demand {ag.demand} exceeds supply {self.supply}; "
                    "it could never be connected"
                )
            if ag.utility.horizon != self.horizon:
                raise InstanceError(
                    f"agent {name}: utility ends at {ag.utility.horizon}, horizon is {self.horizon}"
                )

    @classmethod
    def build(cls, supply, demands, utilities=None, horizon=None) -> "Instance":
        """Convenience constructor; missing utilities default to uniform with total 1."""
        if utilities is None:
            horizon = as_fraction(1 if horizon is None else horizon)
            utilities = [PiecewiseConstantUtility.uniform(horizon)] * len(demands)
        else:
            utilities = [
                u if isinstance(u, PiecewiseConstantUtility)
                else PiecewiseConstantUtility.from_segment_values(u, horizon)
                for u in utilities
            ]
            if horizon is None:
                horizon = utilities[0].horizon
        agents = tuple(Agent(d, u, i) for i, (d, u) in enumerate(zip(demands, utilities)))
        return cls(supply, horizon, agents)

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def demands(self) -> tuple[Fraction, ...]:
        return tuple(a.demand for a in self.agents)

    @property
    def utilities(self) -> tuple[PiecewiseConstantUtility, ...]:
        return tuple(a.utility for a in self.agents)

    def breakpoints(self) -> tuple[Fraction, ...]:
        return common_breakpoints(self.utilities)

    def with_utilities(self, utilities) -> "Instance":
        agents = tuple(Agent(a.demand, u, a.id) for a, u in zip(self.agents, utilities))
        return Instance(self.supply, self.horizon, agents)


def normalize_utilities(inst: Instance) -> Instance:
    """Scale every agent's density so its value of the whole horizon is 1."""
    out = []
    for i, ag in enumerate(inst.agents):
        if ag.utility.total() <= 0:
            name = ag.id if ag.id is not None else i
            raise InstanceError(f"agent {name} has zero total utility")
        out.append(ag.utility.normalized())
    return inst.with_utilities(out)


# ---------------------------------------------------------------------------
# allocations


@dataclass(frozen=True)
class Allocation:
    """Per-agent connection times; ``pieces[i]`` is a sorted tuple of ``[a, b)``."""

    pieces: tuple[tuple[Interval, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(merge_intervals(p) for p in self.pieces))

    @classmethod
    def empty(cls, n: int) -> "Allocation":
        return cls(tuple(() for _ in range(n)))

    @classmethod
    def from_timeline(cls, n: int, cells: Iterable[tuple]) -> "Allocation":
        """Build from ``(start, end, members)`` rows; members are agent indices."""
        acc: list[list[Interval]] = [[] for _ in range(n)]
        for a, b, members in cells:
            for i in members:
                acc[i].append((a, b))
        return cls(tuple(tuple(p) for p in acc))

    @property
    def n(self) -> int:
        return len(self.pieces)

    def measure(self, i: int) -> Fraction:
        return total_length(self.pieces[i])

    def piece_count(self, i: int) -> int:
        return len(self.pieces[i])

    def endpoints(self) -> set[Fraction]:
        pts: set[Fraction] = set()
        for p in self.pieces:
            for a, b in p:
                pts.add(a)
                pts.add(b)
        return pts

    def timeline(self, horizon, extra_points=(), merge: bool = True) -> list[tuple]:
        """Elementary cells ``(a, b, frozenset(members))`` covering ``[0, horizon]``.

        With ``merge`` consecutive cells carrying the same member set are fused,
        so the number of returned cells minus one is the switch count.
        """
        horizon = as_fraction(horizon)
        pts = {Fraction(0), horizon} | self.endpoints() | {as_fraction(p) for p in extra_points}
        grid = sorted(p for p in pts if 0 <= p <= horizon)
        starts: dict[Fraction, list[int]] = {}
        ends: dict[Fraction, list[int]] = {}
        for i, p in enumerate(self.pieces):
            for a, b in p:
                starts.setdefault(a, []).append(i)
                ends.setdefault(b, []).append(i)
        active: set[int] = set()
        cells: list[tuple] = []
        for a, b in zip(grid, grid[1:]):
            active.difference_update(ends.get(a, ()))
            active.update(starts.get(a, ()))
            members = frozenset(active)
            if merge and cells and cells[-1][2] == members:
                cells[-1] = (cells[-1][0], b, members)
            else:
                cells.append((a, b, members))
        return cells

    def switch_count(self, horizon) -> int:
        return len(self.timeline(horizon)) - 1

    def rows(self) -> list[tuple[int, Fraction, Fraction]]:
        return [(i, a, b) for i, p in enumerate(self.pieces) for a, b in p]


@dataclass(frozen=True)
class Violation:
    start: Fraction
    end: Fraction
    load: Fraction
    members: frozenset


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _check_shape(inst: Instance, A: Allocation):
    if A.n != inst.n:
        raise ValueError(f"allocation has {A.n} agents, instance has {inst.n}")
    for i, p in enumerate(A.pieces):
        for a, b in p:
            if a < 0 or b > inst.horizon:
                raise DomainError(f"agent {i}: piece [{a}, {b}) outside [0, {inst.horizon}]")


def check_feasible(inst: Instance, A: Allocation) -> FeasibilityReport:
    """Sweep the elementary cells of the allocation and report every overloaded one."""
    _check_shape(inst, A)
    demands = inst.demands
    bad = []
    for a, b, members in A.timeline(inst.horizon, merge=False):
        load = sum((demands[i] for i in members), Fraction(0))
        if load > inst.supply + TOL:
            bad.append(Violation(a, b, load, members))
    return FeasibilityReport(tuple(bad))


@dataclass(frozen=True)
class Metrics:
    egalitarian: Fraction
    utilitarian: Fraction
    max_difference: Fraction
    switch_count: int
    per_agent_utility: tuple[Fraction, ...]
    piece_counts: tuple[int, ...] = ()

    def as_dict(self) -> dict:
        return {
            "eg": self.egalitarian,
            "ut": self.utilitarian,
            "ef": self.max_difference,
            "switch_count": self.switch_count,
            "per_agent_utility": list(self.per_agent_utility),
            "piece_counts": list(self.piece_counts),
        }


def compute_metrics(inst: Instance, A: Allocation) -> Metrics:
    report = check_feasible(inst, A)
    if not report.ok:
        raise InfeasibleAllocationError(report)
    utils = tuple(utility_of(ag.utility, A.pieces[i]) for i, ag in enumerate(inst.agents))
    return Metrics(
        egalitarian=min(utils),
        utilitarian=sum(utils, Fraction(0)),
        max_difference=max(utils) - min(utils),
        switch_count=A.switch_count(inst.horizon),
        per_agent_utility=utils,
        piece_counts=tuple(A.piece_count(i) for i in range(A.n)),
    )
