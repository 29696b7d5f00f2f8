"""Certificate verification and radius allocation."""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .._rng import as_generator, uniform_in_ball

EDGE = 1.0 - 1e-9
SAFETY = 1.0 + 1e-12


@dataclass
class VerificationReport:
    passed: bool
    structural: list
    sampled_ok: bool
    sampled_violations: int
    samples: int
    deterministic_ok: object = None  # True / False / None (no Lipschitz data)
    witness: dict = None
    steps: list = field(default_factory=list)

    @property
    def checks_passed(self):
        out = []
        if self.samples and self.sampled_ok:
            out.append("sampled")
        if self.deterministic_ok:
            out.append("deterministic")
        return out

    def to_dict(self):
        return {
            "passed": self.passed,
            "structural_failures": self.structural,
            "sampled": {"ok": self.sampled_ok, "violations": self.sampled_violations, "samples": self.samples},
            "deterministic": self.deterministic_ok,
            "passed_checks": self.checks_passed,
            "witness": self.witness,
        }


def _exact_le_ball(point, center, radius):
    """``|point - center| <= radius`` in rational arithmetic."""
    r = Fraction(float(radius))
    if r < 0:
        return False
    return sum((Fraction(float(a)) - Fraction(float(b))) ** 2 for a, b in zip(point, center)) <= r * r


def structural_failures(cert, model, measure=None):
    """Type-level invariants of a certificate (all exact, no sampling)."""
    measure = model.measure if measure is None else measure
    out = []
    for i in range(cert.n_steps):
        nxt = cert.q[i] + model.jump(cert.q[i], cert.l[i])
        if not np.array_equal(nxt, cert.q[i + 1]):
            out.append(f"chain inconsistency at step {i + 1}")
    if np.any(cert.eps <= 0) or np.any(cert.eta <= 0):
        out.append("radii must be positive")
    if np.any(np.diff(cert.eta) < 0):
        out.append("eta radii are not monotone")
    slack = Fraction(float(cert.target_radius)) - Fraction(float(cert.eta[-1]))
    if slack < 0 or cert.exact_terminal_error_sq() > slack * slack:
        out.append("terminal containment fails")
    for i in range(cert.n_steps):
        if measure is not None and not measure.ball_charged(cert.l[i], cert.eps[i]):
            out.append(f"mark ball {i + 1} carries no mass")
        if not np.linalg.norm(cert.l[i]) - cert.eps[i] > 1.0 / cert.m0:
            out.append(f"mark ball {i + 1} not inside Z_m0")
    return out


def deterministic_check(model, q, l, eps, eta):
    """Per-step Lipschitz bound ``eta_i (1 + Lx) + eps_{i+1} Lz <= eta_{i+1} - defect``."""
    L = model.lipschitz
    if L is None:
        return None, []
    steps = []
    ok = True
    for i in range(len(eps)):
        lx = L.state_modulus(np.linalg.norm(l[i]) + eps[i])
        defect = float(np.linalg.norm(q[i] + model.jump(q[i], l[i]) - q[i + 1]))
        lhs = float(eta[i]) * (1.0 + float(lx)) + float(eps[i]) * float(L.mark)
        rhs = float(eta[i + 1]) - defect
        # a few ulps of rounding in lhs sit far below this margin
        if lhs <= rhs * (1 - 1e-14):
            good = True
        else:
            # near-tight step: compare in exact arithmetic so rounding cannot decide it
            exact = (Fraction(float(eta[i])) * (1 + Fraction(float(lx)))
                     + Fraction(float(eps[i])) * Fraction(float(L.mark)))
            good = bool(exact <= Fraction(float(eta[i + 1])) - Fraction(defect))
        ok &= good
        steps.append({"step": i + 1, "bound": lhs, "eta_next": float(eta[i + 1]), "defect": defect, "ok": good})
    return ok, steps


def _probe_points(q, l, eta, eps, qn, samples, rng):
    d = q.shape[0]
    Q = uniform_in_ball(q, eta, samples, rng)
    Lm = uniform_in_ball(l, eps, samples, rng)
    # adversarial pairs: both balls pushed to their edges in the same direction
    dirs = [np.eye(d), -np.eye(d)]
    step = qn - q
    if np.linalg.norm(step) > 0:
        u = step / np.linalg.norm(step)
        dirs.append(np.stack([u, -u]))
    U = np.vstack(dirs)
    Q = np.vstack([Q, q + EDGE * eta * U])
    Lm = np.vstack([Lm, l + EDGE * eps * U])
    return Q, Lm


def sampled_check(model, q, l, eps, eta, samples, rng):
    """Containment test on random (plus edge) pairs; returns (violations, witness)."""
    rng = as_generator(rng)
    count, witness = 0, None
    for i in range(len(eps)):
        Q, Lm = _probe_points(q[i], l[i], eta[i], eps[i], q[i + 1], samples, rng)
        out = Q + model.sigma(Q, Lm)
        dist = np.linalg.norm(out - q[i + 1], axis=1)
        bad = dist >= eta[i + 1]
        if bad.any():
            count += int(bad.sum())
            if witness is None:
                k = int(np.flatnonzero(bad)[0])
                witness = {"step": i + 1, "q": Q[k].tolist(), "l": Lm[k].tolist(),
                           "distance": float(dist[k]), "eta_next": float(eta[i + 1])}
    return count, witness


def verify_certificate(cert, model, measure=None, samples=10_000, rng=0):
    """Re-check a certificate against ``model``.

    Structural invariants are exact.  The containment bullet is checked on
    ``samples`` uniform pairs per step (plus edge pairs) and, when the
    model declares Lipschitz bounds, by the deterministic bound.  The
    report passes iff the structure holds, no sampled pair violates
    containment and the deterministic bound (where available) holds.
    """
    st = structural_failures(cert, model, measure)
    viol, wit = (0, None)
    if samples > 0 and cert.n_steps:
        viol, wit = sampled_check(model, cert.q, cert.l, cert.eps, cert.eta, samples, rng)
    det, steps = deterministic_check(model, cert.q, cert.l, cert.eps, cert.eta)
    passed = not st and viol == 0 and det is not False
    if det is None and samples <= 0 and cert.n_steps:
        passed = False  # nothing checked the containment bullet
    return VerificationReport(passed, st, viol == 0, viol, int(samples), det, wit, steps)


# --------------------------------------------------------------------------
# radius allocation
# --------------------------------------------------------------------------

def _jacobians(model, x, z, h=1e-6):
    d = x.size
    Jx, Jz = np.empty((d, d)), np.empty((d, d))
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        Jx[:, k] = (model.jump(x + e, z) - model.jump(x - e, z)) / (2 * h)
        Jz[:, k] = (model.jump(x, z + e) - model.jump(x, z - e)) / (2 * h)
    return np.linalg.norm(Jx, 2), np.linalg.norm(Jz, 2)


def _forward(t, lnorm, lx_fn, lz):
    n = lnorm.size
    eps = np.minimum(t, lnorm / 2)
    eta = np.empty(n + 1)
    eta[0] = t
    for i in range(n):
        eta[i + 1] = (eta[i] * (1.0 + lx_fn(i, eps[i])) + eps[i] * lz[i]) * SAFETY
    return eps, eta


def allocate_radii(model, q, l, slack, samples=10_000, rng=0, max_halvings=20):
    """Choose ``eps``/``eta`` so that the chain certifies into ``eta_n <= slack``.

    With declared Lipschitz data the affine recursion
    ``eta_{i+1} = eta_i (1 + Lx) + eps_{i+1} Lz`` is run forward from a
    common scale ``t`` (``eps_i = eta_0 = t``), halving ``t`` until the
    terminal radius fits.  Without it, moduli are estimated by finite
    differences (doubled for safety) and the result is accepted only after a
    sampled containment check; failing that, all ``eps`` and
    ``eta_0..eta_{n-1}`` are halved, at most ``max_halvings`` times.

    Returns ``(eps, eta, mode)`` or ``None``.
    """
    q = np.atleast_2d(q)
    n = len(l)
    if not slack > 0:
        return None
    if n == 0:
        return np.empty(0), np.array([slack / 2]), "trivial"
    lnorm = np.linalg.norm(l, axis=1)
    L = model.lipschitz
    if L is not None:
        def lx_fn(i, e):
            return L.state_modulus(lnorm[i] + e)

        lz = np.full(n, L.mark)
        mode = "deterministic"
    else:
        est = [_jacobians(model, q[i], l[i]) for i in range(n)]
        lx_loc = np.array([2 * a + 1e-9 for a, _ in est])
        lz = np.array([2 * b + 1e-9 for _, b in est])

        def lx_fn(i, e):
            return lx_loc[i]

        mode = "sampled"
    t = slack / (n + 2)
    for _ in range(400):
        eps, eta = _forward(t, lnorm, lx_fn, lz)
        if eta[-1] < slack:
            break
        t /= 2
    else:
        return None
    if mode == "deterministic":
        ok, _ = deterministic_check(model, q, l, eps, eta)
        return (eps, eta, mode) if ok else None
    for _ in range(max_halvings + 1):
        viol, _ = sampled_check(model, q, l, eps, eta, samples, rng)
        if viol == 0:
            return eps, eta, mode
        eps = eps / 2
        eta = np.r_[eta[:-1] / 2, eta[-1]]
    return None
