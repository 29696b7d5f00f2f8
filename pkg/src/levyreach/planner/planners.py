"""Constructive planners producing jump-chain certificates."""

import numpy as np

from ..errors import ConditionIViolation, SingularCoefficientError
from ..measures import Atomic, Product, RadialPolar, h0_approximate
from .certificate import Infeasible, JumpChainCertificate, smallest_m
from .verify import allocate_radii

# condition (I) needs kappa > 0; frames whose geometric kappa is not positive
# are checked against this floor, so any non-positive alignment fails
KAPPA_FLOOR = 1e-12


def _chain(model, start, marks):
    q = [np.asarray(start, dtype=float)]
    for l in marks:
        q.append(q[-1] + model.jump(q[-1], l))
    return np.array(q)


def replay(model, start, marks):
    """States visited when ``marks`` are applied in order from ``start``."""
    return _chain(model, start, np.atleast_2d(marks) if len(marks) else [])


def _finish(model, start, target, target_radius, q, marks, planner, meta, samples=10_000, rng=0):
    d = q.shape[1]
    marks = np.asarray(marks, dtype=float).reshape(-1, d)
    err = float(np.linalg.norm(q[-1] - target))
    radii = allocate_radii(model, q, marks, target_radius - err, samples=samples, rng=rng)
    if radii is None:
        return Infeasible("budget", "radius allocation failed", {"terminal_error": err})
    eps, eta, mode = radii
    meta = dict(meta, radius_mode=mode, terminal_error=err)
    return JumpChainCertificate(q, marks, eps, eta, smallest_m(marks, eps), target, target_radius, planner, meta)


def _additive_model(measure):
    from ..sde.zoo import compound_poisson
    return compound_poisson(measure, drift=np.zeros(measure.dim))


def plan_additive(measure, start, target, eta_bar, budget=20, model=None, grid=64):
    """Chain for additive noise from an ``H0`` combination approximating ``y - start``.

    The combination is searched with tolerance ``eta_bar/4``; marks are the
    combination's support points in index order, and radii use the slack
    ``eta_bar/2 - |q_n - y|``.
    """
    start = np.atleast_1d(np.asarray(start, dtype=float))
    target = np.atleast_1d(np.asarray(target, dtype=float))
    model = _additive_model(measure) if model is None else model
    if not model.additive:
        raise ValueError("plan_additive needs an additive model")
    h = target - start
    res = h0_approximate(measure, h, eta_bar / 4, budget, grid)
    if not res.feasible:
        tag = "unreachable" if res.reason == "unreachable" else "budget"
        why = ("target lies outside the closed cone of the support" if tag == "unreachable"
               else f"no combination within tolerance using at most {budget} jumps")
        return Infeasible(tag, why, {"budget": budget})
    marks = res.jumps()
    q = _chain(model, start, marks)
    return _finish(model, start, target, eta_bar / 2, q, marks, "additive",
                   {"multiplicities": list(res.multiplicities), "combination_error": res.error})


def plan_one_step_inverse(model, start, target, eta_bar, measure=None, cond_limit=1e12, samples=10_000, rng=0):
    """Single jump ``l = sigma(start)^-1 (y - start)`` for matrix models with dense support."""
    measure = model.measure if measure is None else measure
    start = np.atleast_1d(np.asarray(start, dtype=float))
    target = np.atleast_1d(np.asarray(target, dtype=float))
    M = model.sigma_matrix(start)
    sv = np.linalg.svd(M, compute_uv=False)
    cond = float(sv.max() / sv.min()) if sv.min() > 0 else np.inf
    if not cond < cond_limit:
        raise SingularCoefficientError(f"sigma({start.tolist()}) is singular (condition number {cond:.3g})")
    if np.array_equal(start, target):
        return _finish(model, start, target, eta_bar / 2, start[None, :], [], "one-step-inverse", {"condition": cond})
    l = np.linalg.solve(M, target - start)
    if measure is not None and not (measure.dense_support or measure.ball_charged(l, 1e-9 * np.linalg.norm(l))):
        return Infeasible("support", "the required mark lies outside the declared support", {"mark": l})
    q = _chain(model, start, [l])
    return _finish(model, start, target, eta_bar / 2, q, [l], "one-step-inverse", {"condition": cond},
                   samples, rng)


def _coordinate_atoms(measure, i):
    if isinstance(measure, Product):
        c = measure.coords[i]
        if not isinstance(c, Atomic):
            raise TypeError("coordinate planner needs atomic coordinate measures")
        return c.locations[:, 0] * measure.scales[i]
    if isinstance(measure, Atomic):
        loc = measure.locations
        others = np.delete(loc, i, axis=1)
        on_axis = np.all(others == 0, axis=1)
        return loc[on_axis, i]
    raise TypeError("coordinate planner needs a product or atomic measure")


def plan_coordinatewise(model, start, target, eta, measure=None, budget=1_000_000):
    """Sign walk along each coordinate in index order.

    With ``N = d`` and ``delta = eta/(4N)``, coordinate ``i`` repeatedly
    jumps by ``coeff_i(q) beta_i c`` where ``c`` is the largest atom of sign
    ``sgn(coeff_i beta_i) sgn(y_i - start_i)`` whose worst-case step
    ``kappa1 |beta_i c|`` is at most ``delta/2``; it stops once
    ``|y_i - q_i| <= delta/2``.  Steps never overshoot, so the terminal
    error is at most ``sqrt(N) delta / 2 <= eta/8``.  The certificate
    targets ``B(y, eta/2)``.
    """
    measure = model.measure if measure is None else measure
    if model.coordinate is None:
        raise TypeError("model has no coordinate structure")
    coeff, betas = model.coordinate
    _, kappa1 = model.coeff_bounds
    start = np.atleast_1d(np.asarray(start, dtype=float))
    target = np.atleast_1d(np.asarray(target, dtype=float))
    d = start.size
    delta = eta / (4 * d)
    x = target - start
    q = start.copy()
    marks, states = [], [q.copy()]
    per_coord, step_atoms = [], []
    for i in range(d):
        count = 0
        if abs(target[i] - q[i]) <= delta / 2:
            per_coord.append(0)
            step_atoms.append(None)
            continue
        atoms = _coordinate_atoms(measure, i)
        sgn = np.sign(coeff(q[None, :])[0, i] * betas[i]) * np.sign(x[i])
        cand = atoms[(np.sign(atoms) == sgn) & (kappa1 * np.abs(betas[i] * atoms) <= delta / 2)]
        if cand.size == 0:
            have = atoms[np.sign(atoms) == sgn]
            tag = "sign" if have.size == 0 else "support"
            why = (f"no atom of sign {int(sgn):+d} on coordinate {i + 1}" if tag == "sign"
                   else f"no atom on coordinate {i + 1} small enough for the step cap {delta / 2:g}")
            return Infeasible(tag, why, {"coordinate": i + 1})
        c = cand[np.argmax(np.abs(cand))]
        l = np.zeros(d)
        l[i] = c
        step_atoms.append(float(c))
        while abs(target[i] - q[i]) > delta / 2:
            if len(marks) >= budget:
                return Infeasible("budget", f"walk exceeded {budget} steps", {"coordinate": i + 1})
            q = q + model.jump(q, l)
            marks.append(l)
            states.append(q)
            count += 1
        per_coord.append(count)
    q_arr = np.array(states)
    return _finish(model, start, target, eta / 2, q_arr, marks, "coordinatewise",
                   {"delta": delta, "steps_per_coordinate": per_coord, "step_atoms": step_atoms,
                    "error_bound": 3 * eta / 8})


def frame_radii(measure, frame, upper=1.0):
    """Admissible mark lengths along each frame vector.

    Returns a list with, per frame vector, either a sorted array of atom
    radii (compound-Poisson surrogate) or the float cap of a continuous
    radial support ``(0, cap]``; ``None`` marks an uncharged direction.
    """
    out = []
    for f in frame:
        u = f / np.linalg.norm(f)
        if isinstance(measure, Atomic):
            loc = measure.locations
            nrm = measure.norms
            par = np.abs(loc @ u - nrm) <= 1e-12 * nrm
            out.append(np.sort(nrm[par]) if par.any() else None)
        else:
            cap = upper
            if isinstance(measure, RadialPolar):
                cap = min(upper, measure.tempering.radius)
            out.append(cap if measure.ball_charged(0.5 * cap * u, 0.25 * cap) else None)
    return out


def alignment(model, q, frame, y):
    """``<sigma(q) f_i, y - q> / (|sigma(q) f_i| |y - q|)`` for each frame vector."""
    M = model.sigma_matrix(q)
    V = frame @ M.T
    dv = y - q
    return (V @ dv) / (np.linalg.norm(V, axis=1) * np.linalg.norm(dv)), V


def probe_condition_I(model, frame, kappa, states, n_directions=256, rng=0):
    """Smallest frame alignment over random unit directions at the given states."""
    rng = np.random.default_rng(rng)
    worst = np.inf
    for x in np.atleast_2d(states):
        M = model.sigma_matrix(x)
        V = frame @ M.T
        V = V / np.linalg.norm(V, axis=1, keepdims=True)
        Y = rng.standard_normal((n_directions, model.dim))
        Y /= np.linalg.norm(Y, axis=1, keepdims=True)
        worst = min(worst, float((Y @ V.T).max(axis=1).min()))
    return worst


def plan_greedy_frame(model, start, target, eta, measure=None, frame=None, kappa=None, Lambda=None,
                      budget=10_000, samples=10_000, rng=0):
    """Greedy descent along the best-aligned pushed-forward frame vector.

    At ``q`` with ``rho = |y - q|`` the planner picks the frame vector of
    largest alignment ``w0`` (lowest index on ties), fails if ``w0 < kappa``
    and otherwise jumps a distance ``r0`` minimizing
    ``g(r) = rho^2 - 2 r rho w0 + r^2`` over the admissible lengths
    (``(0, |sigma(q) f|]`` for continuous radial support, the atom radii for a
    compound-Poisson surrogate).  It stops once ``rho <= eta/8``; the
    certificate targets ``B(y, eta/2)``.
    """
    measure = model.measure if measure is None else measure
    frame = np.asarray(model.frame if frame is None else frame, dtype=float)
    frame = frame / np.linalg.norm(frame, axis=1, keepdims=True)
    kappa = model.kappa if kappa is None else kappa
    kappa = KAPPA_FLOOR if kappa is None or kappa <= 0 else kappa
    Lambda = model.Lambda if Lambda is None else Lambda
    start = np.atleast_1d(np.asarray(start, dtype=float))
    target = np.atleast_1d(np.asarray(target, dtype=float))
    radii = frame_radii(measure, frame)
    q = start.copy()
    states, marks, steps = [q.copy()], [], []
    stop = eta / 8
    stalled = False
    while True:
        rho = float(np.linalg.norm(target - q))
        if rho <= stop:
            break
        if len(marks) >= budget:
            return Infeasible("budget", f"greedy walk exceeded {budget} steps", {"state": q})
        w, V = alignment(model, q, frame, target)
        w = np.where([r is not None for r in radii], w, -np.inf)
        i0 = int(np.argmax(w))
        w0 = float(w[i0])
        if w0 < kappa:
            err = ConditionIViolation(q, w0, kappa)
            return Infeasible("condition-I", str(err), {"state": q, "alignment": w0, "kappa": kappa})
        vn = float(np.linalg.norm(V[i0]))
        adm = radii[i0]
        if isinstance(adm, np.ndarray):
            cand = adm * vn
            g_all = rho * rho - 2 * cand * rho * w0 + cand * cand
            k = int(np.argmin(g_all))
            r0, g0 = float(cand[k]), float(g_all[k])
            if not g0 < rho * rho:
                stalled = True
                break
            interior = False
        else:
            cap = adm * vn
            r0 = min(max(rho * w0, 0.0), cap)
            g0 = rho * rho - 2 * r0 * rho * w0 + r0 * r0
            interior = rho * w0 < cap
        l = frame[i0] * (r0 / vn)
        q = q + model.jump(q, l)
        steps.append({"rho": rho, "alignment": w0, "index": i0, "r0": r0, "g": g0,
                      "interior": interior, "case": "far" if (Lambda and rho * kappa > 1 / Lambda) else "near",
                      "new_rho": float(np.linalg.norm(target - q))})
        marks.append(l)
        states.append(q.copy())
    err = float(np.linalg.norm(target - q))
    if err >= eta / 2:
        return Infeasible("stalled", f"walk stalled at distance {err:.6g} >= {eta / 2:g}", {"state": q})
    meta = {"kappa": kappa, "Lambda": Lambda, "steps": steps, "stalled": stalled,
            "length_bound": greedy_length_bound(np.linalg.norm(target - start), eta, kappa, Lambda)
            if Lambda else None,
            "condition_I": "probabilistically validated at visited states"}
    return _finish(model, start, target, eta / 2, np.array(states), marks, "greedy-frame", meta, samples, rng)


def greedy_length_bound(rho0, eta, kappa, Lambda):
    """``ceil((rho0^2 - (eta/8)^2) Lambda^2) + ceil(log(8 rho0/eta) / (-log(1 - kappa^2)/2)) + 1``."""
    if rho0 <= eta / 8:
        return 0
    a = int(np.ceil(max(rho0 ** 2 - (eta / 8) ** 2, 0.0) * Lambda ** 2))
    if kappa >= 1:
        return a + 2
    b = int(np.ceil(np.log(8 * rho0 / eta) / (-0.5 * np.log1p(-kappa ** 2))))
    return a + b + 1
