from fractions import Fraction as F

import numpy as np
import pytest

from fairshed import (
    Instance,
    InstanceError,
    PiecewiseConstantUtility,
    allocate_identical_additive,
    allocate_uniform_identical,
    check_feasible,
    compute_metrics,
    connection_quota,
    even_paz,
    utility_of,
)
from fairshed.proportional import CopiedCake

from conftest import TABLE, random_utility


class TestQuota:
    @pytest.mark.parametrize("S,d,q", [(4, 2, 2), (7, 7, 1), (30, 10, 3), (F(5, 2), F(1, 2), 5), (10, 3, 3)])
    def test_values(self, S, d, q):
        assert connection_quota(S, d) == q

    def test_demand_too_large(self):
        with pytest.raises(ValueError):
            connection_quota(1, 2)


class TestRoundRobin:
    def test_four_agents_half_time(self):
        inst = Instance.build(4, [2] * 4, horizon=2)
        A = allocate_uniform_identical(inst)
        assert check_feasible(inst, A).ok
        assert [A.measure(i) for i in range(4)] == [1] * 4

    def test_single_agent(self):
        inst = Instance.build(3, [1], horizon=5)
        A = allocate_uniform_identical(inst)
        assert A.pieces[0] == ((0, 5),)

    def test_three_slots_pairs(self):
        inst = Instance.build(2, [1, 1, 1], horizon=3)
        A = allocate_uniform_identical(inst)
        cells = [(a, b, S) for a, b, S in A.timeline(3)]
        assert cells == [(0, 1, frozenset({0, 1})), (1, 2, frozenset({1, 2})), (2, 3, frozenset({0, 2}))]
        assert all(A.measure(i) == 2 for i in range(3))

    def test_quota_covers_everyone(self):
        inst = Instance.build(10, [2] * 3)
        A = allocate_uniform_identical(inst)
        assert all(p == ((0, 1),) for p in A.pieces)

    def test_mixed_demands_rejected(self):
        with pytest.raises(InstanceError):
            allocate_uniform_identical(Instance.build(4, [1, 2]))


class TestEvenPaz:
    def test_single_agent(self):
        u = PiecewiseConstantUtility.uniform(3)
        assert even_paz([u]) == [(0, 3)]

    def test_two_uniform(self):
        u = PiecewiseConstantUtility.uniform(1)
        assert even_paz([u, u]) == [(0, F(1, 2)), (F(1, 2), 1)]

    def test_copied_table_first_split(self):
        cake = CopiedCake.build([PiecewiseConstantUtility.from_segment_values(r) for r in TABLE], 2)
        pieces = even_paz(cake.utilities)
        # every half-value mark lands on the copy boundary
        lefts = {p for p in pieces if p[1] <= 2}
        assert len(lefts) == 2
        for u, (a, b) in zip(cake.utilities, pieces):
            assert u.value(a, b) >= F(1, 2)

    def test_subinterval(self):
        u = PiecewiseConstantUtility.from_segment_values([1, 3, 1, 3])
        pieces = even_paz([u, u, u], (1, 3))
        assert pieces[0][0] == 1 and max(b for _, b in pieces) == 3
        for a, b in pieces:
            assert u.value(a, b) >= F(4, 3)

    def test_agent_without_value_rejected(self):
        u = PiecewiseConstantUtility.from_segment_values([1, 0])
        with pytest.raises(ValueError):
            even_paz([u, u], (1, 2))

    @pytest.mark.parametrize("seed", range(30))
    def test_proportional_and_disjoint(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 9))
        us = [random_utility(rng) for _ in range(n)]
        pieces = even_paz(us)
        ordered = sorted(pieces)
        assert ordered[0][0] == 0 and ordered[-1][1] == 1
        assert all(p[1] == q[0] for p, q in zip(ordered, ordered[1:]))
        for u, (a, b) in zip(us, pieces):
            assert u.value(a, b) * n >= u.total()


class TestCopiedCake:
    def test_fold(self):
        cake = CopiedCake.build([PiecewiseConstantUtility.uniform(2)], 3)
        assert cake.horizon == 6
        assert cake.fold((F(1, 2), F(7, 4))) == ((F(1, 2), F(7, 4)),)
        assert cake.fold((F(3, 2), F(5, 2))) == ((0, F(1, 2)), (F(3, 2), 2))
        assert cake.fold((F(3, 2), F(9, 2))) == ((0, 2),)


class TestIdenticalAdditive:
    def test_table_instance(self, table_instance):
        A = allocate_identical_additive(table_instance)
        assert check_feasible(table_instance, A).ok
        for i, u in enumerate(table_instance.utilities):
            assert utility_of(u, list(A.pieces[i])) >= F(1, 2)

    def test_quota_equals_n(self):
        inst = Instance.build(2, [1, 1], [(1, 0), (0, 1)], horizon=2)
        A = allocate_identical_additive(inst)
        m = compute_metrics(inst, A)
        assert m.per_agent_utility == (1, 1)

    def test_uniform_exact_half(self):
        inst = Instance.build(4, [2] * 4, horizon=2)
        A = allocate_identical_additive(inst)
        assert compute_metrics(inst, A).per_agent_utility == (F(1, 2),) * 4

    @pytest.mark.parametrize("seed", range(20))
    def test_quota_over_n_guarantee(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        d = int(rng.integers(1, 4))
        S = d * int(rng.integers(1, n + 1))
        inst = Instance.build(S, [d] * n, [random_utility(rng) for _ in range(n)])
        A = allocate_identical_additive(inst)
        assert check_feasible(inst, A).ok
        q = min(n, S // d)
        for i, u in enumerate(inst.utilities):
            assert utility_of(u, list(A.pieces[i])) * n >= q * u.total()
