"""Why a GHZ probe alone cannot find the frequency
==================================================

A GHZ fringe of N atoms repeats every 2 pi / (N t). Its likelihood has N
equally good peaks inside one single-atom period, so the posterior cannot
tell them apart. Adding smaller probes breaks the tie. The geometric ladder
1, 2, 4, ... atoms (even sizes shifted by -pi/2) leaves a single peak; some
mixtures of single atoms and GHZ-3 blocks do, and some do not.
"""

# %%
import math

from ramsey_metrology import PriorWindow, combination_plan, geometric_ladder, plan_posterior, report
from ramsey_metrology.bayes import accumulate, flat_posterior
from ramsey_metrology.probes import Correlation, ProbeConfig
from ramsey_metrology.sampling import expected_record

full = PriorWindow(-math.pi, math.pi)


def describe(label, post):
    rep = report(post)
    peaks = ", ".join(f"{p:+.3f}" for p in rep.peak_positions)
    print(f"{label:<28} ambiguous={rep.ambiguous!s:<5} estimate={rep.estimate:+.4f} peaks=[{peaks}]")


# %%
# A lone GHZ-3 probe: three equal peaks.
ghz3 = ProbeConfig(3, Correlation.GHZ, omega0=0.0)
describe("GHZ-3 only", accumulate(flat_posterior(full), expected_record(ghz3, 10)).normalize())

# %%
# The ladder {1, 2, 4}: one peak at the true frequency.
describe("ladder 1,2,4 (nu=10)", plan_posterior(geometric_ladder(3, 1, 1, 10), 0.0, window=full))

# %%
# Combinations of single atoms with GHZ-3 blocks, one repetition each.
describe("7 atoms + 4 x GHZ-3", plan_posterior(combination_plan(7, 3, 4, 1, 1, 1), 0.0, window=full))
describe("1 atom + 2 x GHZ-3", plan_posterior(combination_plan(1, 3, 2, 1, 1, 1), 0.0, window=full))
