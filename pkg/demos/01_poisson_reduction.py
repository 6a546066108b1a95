"""
Poisson reduction
=================

When every environment state has the same arrival rate and the same
server speed, the modulation is invisible to the queue: the stationary
customer count is exactly Poisson with mean lambda / (beta mu), no
matter what the sojourn laws or the routing look like.  This script
builds such a model with three wildly different sojourn families and
checks that the computed factorial moments are the plain powers of the
offered load, and that the raw moments at load 1 are the Bell numbers.
"""

import numpy as np

from mminfenv import (
    Deterministic,
    EnvironmentModel,
    Gamma,
    HyperExponential,
    compute_moment_table,
)

###############################################################################
# A three-state environment with identical rates but unrelated sojourn laws.

lam, beta, mu = 2.0, 0.8, 1.25
rho = lam / (beta * mu)

model = EnvironmentModel(
    arrival_rates=[lam, lam, lam],
    speeds=[beta, beta, beta],
    sojourns=(
        Gamma(shape=2.0, rate=2.0),
        Deterministic(value=1.5),
        HyperExponential(probs=(0.4, 0.6), rates=(0.5, 2.0)),
    ),
    mu=mu,
    routing=[[0.0, 0.7, 0.3], [0.4, 0.0, 0.6], [0.5, 0.5, 0.0]],
)

table = compute_moment_table(model, n_max=8)

print(f"offered load rho = {rho}")
print("order   f_N computed        rho^n")
for n in range(9):
    print(f"{n:5d}   {table.factorial_moments()[n]:<18.12g}  {rho**n:.12g}")

gap = np.max(np.abs(table.factorial_moments() / rho ** np.arange(9) - 1.0))
print(f"\nlargest relative gap to the Poisson factorial moments: {gap:.3e}")

###############################################################################
# At load one the raw moments of a Poisson variable are the Bell numbers.

unit = EnvironmentModel(
    arrival_rates=[beta * mu] * 3,
    speeds=[beta] * 3,
    sojourns=model.sojourns,
    mu=mu,
    routing=model.routing,
)
unit_table = compute_moment_table(unit, n_max=6)
print("\nraw moments at rho = 1 (Bell numbers):")
print("  computed:", np.round(unit_table.raw_moments(), 6).tolist())
print("  expected: [1, 1, 2, 5, 15, 52, 203]")
