"""
A jump equation that cannot reach the negative half-line
========================================================

Nonnegative drift plus positive-only jumps: every path started at 0 stays
at or above 0, so no ball to the left of the origin is ever hit.  The
script shows this three ways: single paths, Monte Carlo, and the
planner refusing to build a chain.
"""

import numpy as np

from levyreach.levy import sample_noise
from levyreach.mc import estimate_hitting
from levyreach.planner import plan_additive
from levyreach.sde import integrate
from levyreach.sde.zoo import one_sided_counterexample

model = one_sided_counterexample(b=0.5, atoms=(0.5, 1.5))
print(model.name, "jump atoms:", model.measure.locations.ravel())

# a few individual paths: the minimum over the skeleton never drops below 0
for seed in range(5):
    noise = sample_noise(model.measure, 1.0, 1e-3, rng=seed)
    path = integrate(model, [0.0], noise, dt=1e-2)
    print(f"seed {seed}: {noise.n_jumps} jumps, min {path.states.min():.3f}, X(1) = {path.final[0]:.3f}")

# Monte Carlo: hits of B(-1, 0.5) at T = 1
est = estimate_hitting(model, [0.0], 1.0, [-1.0], 0.5, n=200_000, dt=1e-2, seed=1)
print(f"hits {est.successes}/{est.trials}, 99% interval [{est.lo:.2e}, {est.hi:.2e}]")

# the additive planner sees that -1 is outside the cone spanned by the atoms
res = plan_additive(model.measure, [0.0], [-1.0], eta_bar=1.0)
print("planner:", res.tag, "-", res.reason)

# the positive side is reachable, with a certificate
cert = plan_additive(model.measure, [0.0], [2.0], eta_bar=0.2)
print(cert.step_table())
