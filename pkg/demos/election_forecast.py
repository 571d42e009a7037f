"""
Who wins? Exceedance probabilities from poll shares
===================================================

A poll of N respondents with percentage shares p_j gives, under a flat
Dirichlet prior, the posterior concentrations 1 + p_j / 100 * N.  The
exceedance probability of party j is the posterior probability that its
share is the largest.
"""

import numpy as np

import direp

# German federal election 2005, last poll before the vote
parties = ["CDU/CSU", "SPD", "FDP", "Linke", "Gruene", "other"]
alpha = direp.poll_posterior([41, 34, 7, 7, 8, 3], n=1299, round_result=True)
print("posterior alpha:", alpha)

ev = direp.ep_integration(alpha)
for name, p in zip(parties, ev.phi):
    print(f"  {name:8s} {100 * p:7.3f} %")

# %%
# Coalitions are just sums of Dirichlet components, so block probabilities
# need no new machinery: agglomerate first, then compute EPs.

alpha13 = direp.poll_posterior([40, 33, 5, 13, 3, 6], n=1001, round_result=True)
blocks = {"CDU/CSU + FDP": [1, 3], "SPD + Linke": [2, 4], "rest": [5, 6]}
merged = direp.agglomerate(alpha13, list(blocks.values()), base=1)
ev13 = direp.ep_integration(merged)
for name, a, p in zip(blocks, merged, ev13.phi):
    print(f"  {name:14s} alpha={a:5.0f}  EP={100 * p:6.2f} %")

# %%
# The EP is not the probability of an absolute majority.  For a flat
# three-way race, each party leads with probability 1/3 while the chance
# of any single share passing 1/2 is much smaller.

flat = [2, 2, 2]
print("EP of party 1:         ", direp.ep_integration(flat).phi[0])
print("P(share of party 1 > 1/2):", direp.threshold_probability(flat, 0, 0.5))
