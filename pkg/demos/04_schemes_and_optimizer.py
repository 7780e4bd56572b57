"""Allocating a fixed atom budget
=================================

With N_T atoms per cycle and nu = T/t repetitions, the question is how to
split the atoms into single atoms and GHZ blocks. Without dephasing the
ladder approaches Heisenberg scaling. With dephasing, large GHZ blocks lose
contrast, so the best split is found by exhaustive search over
(n_u single atoms, p copies of GHZ-n_e). A feedback phase keeps each block at
its most sensitive point once an estimate is available.
"""

# %%
import math

from ramsey_metrology import (
    evaluate_plan,
    feedback_phase_for_estimate,
    geometric_ladder,
    optimize_combination,
    uncorrelated_plan,
)

NU = 100
design = math.pi / 2

# %%
# Ideal ladder against the shot-noise plan of the same size.
for p in range(2, 6):
    n_t = 2**p - 1
    ladder = evaluate_plan(geometric_ladder(p, 1, 1, NU), design).posterior_std
    shot = evaluate_plan(uncorrelated_plan(n_t, 1, 1, NU), design).posterior_std
    print(f"N_T={n_t:2d}: ladder {ladder:.5f}  shot noise {shot:.5f}  ratio {ladder / shot:.2f}")

# %%
# Optimised combinations under dephasing.
for gamma in (0.01, 0.05, 0.1):
    for n_t in (10, 20, 40):
        best = optimize_combination(n_t, 1, 1, NU, gamma, grid_points=4000)
        shot = evaluate_plan(uncorrelated_plan(n_t, 1, 1, NU, gamma), design).posterior_std
        n_u, n_e, copies = best.plan.allocation
        print(f"gamma={gamma:4.2f} N_T={n_t:2d}: n_u={n_u:2d} n_e={n_e:2d} p={copies:2d} "
              f"std {best.report.posterior_std:.5f} vs shot noise {shot:.5f}")

# %%
# Feedback: the phase that moves a block of N atoms to quadrature at the
# current estimate.
for estimate in (design, 1.2, 0.3):
    print(f"estimate {estimate:.3f}: phase for GHZ-3 {feedback_phase_for_estimate(estimate, 3, 1.0):+.4f}")
