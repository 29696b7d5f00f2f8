"""
Dense sums of two incommensurable jumps
=======================================

With atoms 1 and -sqrt(2) every real number is a limit of finite sums
m*1 - n*sqrt(2).  The lattice search finds the shortest such sum near a
target, and the exact compound-Poisson oracle turns it into a hitting
probability that Monte Carlo can check.
"""

import numpy as np

from levyreach.measures import Atomic, check_assumption_v, check_support_conditions_1d, h0_approximate
from levyreach.mc import estimate_levy_support, exact_cp_hitting_oracle, suggest_trials

pair = Atomic([1.0, -np.sqrt(2)], [1.0, 1.0])
print(check_support_conditions_1d(pair).to_dict())

res = h0_approximate(pair, -0.7, 0.05, budget=20)
print("multiplicities", res.multiplicities, "value %.5f error %.4f" % (res.value[0], res.error))

cert = check_assumption_v(pair, -0.7, 0.1)
print("ball radii:", np.round(cert.radii, 5))

for h in (-0.7, 0.3):
    o = exact_cp_hitting_oracle(pair, 1.0, [h], 0.05, truncation=40)
    lead = o.terms[0]
    print(f"B({h}, 0.05): oracle {o.value:.4e} (leading term {lead[0]} = {lead[1]:.3e}, tail <= {o.tail_bound:.1e})")
    n = 2_000_000
    est = estimate_levy_support(pair, 1.0, [h], 0.05, n, seed=3)
    sd = np.sqrt(o.value * (1 - o.value) / n)
    print(f"   MC {est.successes}/{n} = {est.point:.4e}  ({(est.point - o.value) / sd:+.2f} sd)")
    print(f"   trials for one hit with 99% probability: {suggest_trials(o.value)}")

# a lattice measure is not dense: 1 and -1 only reach the integers
print(check_support_conditions_1d(Atomic([1.0, -1.0], [1.0, 1.0])).reason)
