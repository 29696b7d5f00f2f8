"""
Condition (I): locked quadrant versus a repaired frame
======================================================

Jumps along e1 and e2 alone keep a 2-D path inside the first quadrant.
Adding the third direction -(e1 + e2)/sqrt(2) gives a frame in which
every direction is within a fixed angle of some frame vector, and the
greedy planner walks to (-1, -1) in two jumps.
"""

import numpy as np

from levyreach.mc import estimate_hitting
from levyreach.planner import plan_greedy_frame, verify_certificate
from levyreach.sde.zoo import frame_fixed_2d, quadrant_locked_2d

target = np.array([-1.0, -1.0])

quad = quadrant_locked_2d()
fixed = frame_fixed_2d()
print("frame constants: quadrant %.4f, repaired %.4f" % (quad.kappa, fixed.kappa))

res = plan_greedy_frame(quad, [0, 0], target, eta=0.6)
print("quadrant planner:", res.tag, "-", res.reason)

cert = plan_greedy_frame(fixed, [0, 0], target, eta=0.6)
print(cert.step_table())
for s in cert.meta["steps"]:
    print("  rho %.4f  alignment %.4f  r0 %.4f  g %.4f" % (s["rho"], s["alignment"], s["r0"], s["g"]))
rep = verify_certificate(cert, fixed)
print("verification:", "passed" if rep.passed else "FAILED", rep.checks_passed)

# with a continuous radial density on (0, 1] the same walk lands exactly on the target
smooth = frame_fixed_2d(radii=None)
exact = plan_greedy_frame(smooth, [0, 0], target, eta=0.6)
print("continuous support: %d steps, final distance %.2e" % (exact.n_steps, exact.terminal_error))

# Monte Carlo agrees: nothing reaches B((-1,-1), 0.3) in the locked model
for m in (quad, fixed):
    est = estimate_hitting(m, [0, 0], 1.0, target, 0.3, n=100_000, dt=1e-2, seed=2)
    print(f"{m.name:20s} hits {est.successes:6d}/{est.trials}  lower bound {est.lo:.2e}")
