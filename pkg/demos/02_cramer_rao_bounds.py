"""How well can a Ramsey measurement pin down the frequency?
============================================================

The Fisher information of one readout sets the Cramer-Rao bound
1/sqrt(nu F) on any unbiased estimator after nu repetitions. Without
dephasing, N independent atoms give the shot-noise bound 1/sqrt(N T t) and a
GHZ probe of N atoms gives the Heisenberg bound 1/(N sqrt(T t)). With
dephasing both reach the same best value sqrt(2 gamma e / (N T)), at a
shorter interrogation time for the GHZ probe.
"""

# %%
import math

from ramsey_metrology import (
    Correlation,
    CrbQuery,
    ProbeConfig,
    crb_uncertainty,
    minimum_uncertainty,
    optimal_operating_point,
)

T = 100.0

# %%
# Ideal scaling: the GHZ advantage grows as sqrt(N).
print(f"{'N':>4} {'shot noise':>12} {'GHZ':>12}")
for n in (1, 4, 16, 64):
    unc = CrbQuery(ProbeConfig(omega0=math.pi / 2), T, n_total=n)
    ghz_cfg = ProbeConfig(n, Correlation.GHZ if n > 1 else Correlation.UNCORRELATED, omega0=math.pi / (2 * n))
    print(f"{n:4d} {crb_uncertainty(unc):12.5f} {crb_uncertainty(CrbQuery(ghz_cfg, T)):12.5f}")

# %%
# With dephasing the interrogation time has an optimum. Both kinds of probe
# reach the same bound there.
gamma = 0.1
for n in (1, 10, 100):
    unc = optimal_operating_point(n, "uncorrelated", gamma, T)
    ghz = optimal_operating_point(n, "ghz", gamma, T)
    print(f"N={n:3d}: uncorrelated t*={unc.t:6.3f} -> {unc.uncertainty:.5f}; "
          f"GHZ t*={ghz.t:6.3f} -> {ghz.uncertainty:.5f}; "
          f"closed form {minimum_uncertainty(n, gamma, T):.5f}")

# %%
# If T is shorter than the unconstrained optimum the best time is T itself,
# and the result is flagged.
print(optimal_operating_point(1, "uncorrelated", 0.01, 10.0))
