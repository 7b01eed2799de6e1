"""
Unequal demands: packing, egalitarian and group fair shares
===========================================================

Three consumers with demands 10, 20 and 30 share a 30-unit supply.  The
connectable groups are {10, 20} and {30}; how long should each get?
"""

from fairshed import (
    Instance,
    best_packing_ratio,
    egalitarian_uniform,
    enumerate_maximal_feasible_sets,
    fairness_report,
    gfs_allocation,
)

inst = Instance.build(30, [10, 20, 30])
print("maximal feasible sets:", [str(S) for S in enumerate_maximal_feasible_sets(inst)])

# Packing repeatedly: q copies of every consumer into k bins, each bin a time slot.
best = best_packing_ratio(inst.demands, inst.supply, q_max=4)
print(f"best packing: q={best.q}, k={best.k}, everyone connected {best.ratio} of the time")

# The egalitarian LP maximises the worst-off consumer.
dist, r = egalitarian_uniform(inst)
print("egalitarian shares:", {str(S): str(x) for S, x in dist.support}, " r* =", r)

# Group fair share weighs groups by size: two people get 2/3 between them.
gfs = gfs_allocation(inst)
print("group fair shares:", {str(S): str(x) for S, x in gfs.support})
rep = fairness_report(inst, gfs)
print("per-agent fractions:", [str(f) for f in rep.fractions])
print("contentious (fair to groups, below r* for someone):", rep.contentious)

# %%
# With small demands the tension is sharper: a tiny consumer tips the
# group weights even though it barely uses any supply.
tiny = Instance.build(30, ["0.001", "29.999", 30])
rep = fairness_report(tiny, gfs_allocation(tiny))
print("tiny consumer case:", [str(f) for f in rep.fractions], "contentious:", rep.contentious)

# %%
# When every pair fits but not all three, rotating pairs beats one packing.
pairs = Instance.build(2, [1, 1, 1])
best = best_packing_ratio(pairs.demands, pairs.supply, q_max=3)
print(f"pairs: q={best.q}, k={best.k}, slots {[str(S) for S in best.packing.bins]}")
print("pairs egalitarian r* =", egalitarian_uniform(pairs)[1])
