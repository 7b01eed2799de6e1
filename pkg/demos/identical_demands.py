"""
Identical demands: rotation and halving
=======================================

Four households each draw 2 units from a 4-unit supply over two hours.
Only two of them can be connected at any moment.
"""

from fractions import Fraction as F

from fairshed import (
    Instance,
    allocate_identical_additive,
    allocate_uniform_identical,
    compute_metrics,
    connection_quota,
)

# hourly value of being connected, one row per household
table = [(F(8, 10), F(2, 10)), (F(2, 10), F(8, 10)), (F(7, 10), F(3, 10)), (F(3, 10), F(7, 10))]
inst = Instance.build(4, [2, 2, 2, 2], table, horizon=2)

q = connection_quota(inst.supply, 2)
print("households connected at once:", q)

# Round robin ignores preferences: everyone gets half the time.
A = allocate_uniform_identical(inst)
for a, b, S in A.timeline(inst.horizon):
    print(f"  [{a}, {b})  ->  {sorted(S)}")
m = compute_metrics(inst, A)
print("round robin utilities:", [str(u) for u in m.per_agent_utility])

# Halving on q copies of the day respects preferences and still guarantees q/n.
B = allocate_identical_additive(inst)
for i, piece in enumerate(B.pieces):
    print(f"  household {i}: {[(str(a), str(b)) for a, b in piece]}")
m = compute_metrics(inst, B)
print("halving utilities:", [str(u) for u in m.per_agent_utility])
print("egalitarian value:", m.egalitarian, " switches:", m.switch_count)
