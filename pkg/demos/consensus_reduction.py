"""
Consensus halving through an electricity instance
=================================================

A consensus halving splits [0, 1] into two parts that every agent values
equally.  Adding one big consumer whose demand equals the whole supply turns
it into a scheduling problem: whenever the big consumer is on, nobody else is.
"""

from fractions import Fraction as F

import numpy as np

from fairshed import (
    PiecewiseConstantUtility,
    compute_metrics,
    consensus_division_min_cuts,
    egalitarian_additive,
    extract_consensus_from_egalitarian,
    reduce_consensus_to_electricity,
)

rng = np.random.default_rng(7)


def random_valuation(segments=4):
    inner = sorted(rng.choice(np.arange(1, 12), size=segments - 1, replace=False))
    bps = [F(0)] + [F(int(g), 12) for g in inner] + [F(1)]
    dens = [F(int(v)) for v in rng.integers(1, 10, size=segments)]
    return PiecewiseConstantUtility(tuple(bps), tuple(dens)).normalized()


vals = [random_valuation() for _ in range(3)]

# Direct search: fewest cuts, each candidate solved as an exact LP.
direct = consensus_division_min_cuts(vals, 2)
print("direct halving, cuts at", [str(c) for c in direct.cuts])

# Build the scheduling instance: unit demands, plus one consumer taking everything.
inst = reduce_consensus_to_electricity(vals)
print("supply", inst.supply, "demands", [str(d) for d in inst.demands])

seg, A, r = egalitarian_additive(inst)
m = compute_metrics(inst, A)
print("egalitarian value", r, "with", m.switch_count, "switches for", inst.n, "consumers")

# The big consumer's time is one half; everyone else values it at exactly 1/2.
div = extract_consensus_from_egalitarian(inst, A)
for i, (x1, x2) in enumerate(div.values(vals)):
    print(f"agent {i}: {x1} | {x2}")
print("cuts", [str(c) for c in div.cuts], "deviation", div.deviation)
