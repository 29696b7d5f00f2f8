"""Support conditions and the finite-combination set ``H0``.

``H0`` is the set of finite N-combinations of support points; density of
``H0`` is what makes additive noise able to steer a path anywhere.  The
checks here work from the *declared* support of a measure (atoms, rays and
radial intervals) and never try to infer a support from a density.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import nnls

from .atomic import Atomic
from .product import Product
from .radial import RadialPolar
from .subordinated import GaussianBase, Subordinated

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
CONDITIONS = ("1", "2", "3", "4", "5", "6")


@dataclass
class SupportReport:
    conditions: dict
    basis: dict
    h0_dense: object  # True / False / None (inconclusive)
    witness: list = field(default_factory=list)
    reason: str = ""

    def to_dict(self):
        return {
            "conditions": {k: self.conditions[k] for k in CONDITIONS},
            "basis": {k: self.basis[k] for k in CONDITIONS},
            "h0_dense": {True: "true", False: "false", None: "inconclusive"}[self.h0_dense],
            "witness": [float(w) for w in self.witness],
            "reason": self.reason,
        }


def _support_1d(measure):
    """``(atoms, intervals, infinite_mass)`` of a declared 1-D support.

    Intervals are ``(lo, hi)`` pairs of positive length; endpoints may be
    infinite.  Atoms are isolated points.
    """
    if measure.dim != 1:
        raise ValueError("expected a 1-D measure")
    if isinstance(measure, Atomic):
        return list(measure.locations[:, 0]), [], False
    if isinstance(measure, RadialPolar):
        R = measure.tempering.radius
        ivs = []
        for u in measure.directions[:, 0]:
            ivs.append((0.0, R) if u > 0 else (-R, 0.0))
        return [], ivs, not measure.finite_activity
    if isinstance(measure, Product):
        atoms, ivs, inf = _support_1d(measure.coords[0])
        b = measure.scales[0]
        atoms = [b * a for a in atoms]
        ivs = [tuple(sorted((b * lo, b * hi))) for lo, hi in ivs]
        return atoms, ivs, inf
    if isinstance(measure, Subordinated):
        if isinstance(measure.base, GaussianBase):
            return [], [(-np.inf, 0.0), (0.0, np.inf)], not measure.finite_activity
        return _support_1d(measure._atomic)
    raise TypeError(f"no declared support for {type(measure).__name__}")


def is_rational(x, max_den=10**4, rtol=1e-12):
    """Numerical rationality test for a float ratio of declared atoms.

    Every float is rational, so the question is really whether the declared
    value *means* a rational number.  A ratio counts as rational when some
    fraction with denominator at most ``max_den`` reproduces it to ``rtol``;
    a genuinely irrational ratio misses every such fraction by roughly
    ``1/max_den**2``, far above float resolution.
    """
    f = Fraction(x).limit_denominator(max_den)
    return abs(float(f) - x) <= rtol * max(1.0, abs(x))


def _touches(a, iv):
    lo, hi = iv
    return lo <= a <= hi


def check_support_conditions_1d(measure):
    """Evaluate the six sufficient conditions for density of ``H0`` in ``R``."""
    atoms, ivs, infinite = _support_1d(measure)
    pos_atoms = [a for a in atoms if a > 0]
    neg_atoms = [a for a in atoms if a < 0]
    pos_ivs = [iv for iv in ivs if iv[1] > 0 and iv[0] >= 0]
    neg_ivs = [iv for iv in ivs if iv[0] < 0 and iv[1] <= 0]
    has_pos = bool(pos_atoms or pos_ivs)
    has_neg = bool(neg_atoms or neg_ivs)
    zero_accum = infinite or any(_touches(0.0, iv) for iv in ivs)

    res, basis, witness = {}, {}, []

    res["1"] = PASS if (has_pos and has_neg and zero_accum) else FAIL
    basis["1"] = "verified"
    res["2"] = PASS if (infinite and has_pos and has_neg) else FAIL
    basis["2"] = "verified"

    # (3): some a != 0 in S whose mirror -a is an accumulation point of S
    ok3 = any(_touches(-a, iv) for a in atoms for iv in ivs)
    for lo, hi in ivs:
        for lo2, hi2 in ivs:
            if max(-hi, lo2) < min(-lo, hi2):
                ok3 = True
    res["3"] = PASS if ok3 else FAIL
    basis["3"] = "declared"

    # (4): S unbounded on the side opposite to some nonzero support point
    up = any(np.isinf(hi) and hi > 0 for _, hi in ivs)
    down = any(np.isinf(lo) and lo < 0 for lo, _ in ivs)
    res["4"] = PASS if ((up and has_neg) or (down and has_pos)) else FAIL
    basis["4"] = "declared"

    res["5"] = PASS if (pos_ivs and neg_ivs) else FAIL
    basis["5"] = "verified"

    ok6 = False
    if has_pos and has_neg and (pos_ivs or neg_ivs):
        ok6 = True
    else:
        for a in pos_atoms:
            for b in neg_atoms:
                if not is_rational(a / b):
                    ok6 = True
                    witness = [a, b]
                    break
            if ok6:
                break
    res["6"] = PASS if ok6 else FAIL
    basis["6"] = "verified"

    if any(v == PASS for v in res.values()):
        return SupportReport(res, basis, True, witness, "sufficient condition holds")
    if not (has_pos and has_neg):
        return SupportReport(res, basis, False, witness, "support is one-sided")
    if not ivs and len(atoms) > 0:
        ref = atoms[0]
        if all(is_rational(a / ref) for a in atoms):
            return SupportReport(res, basis, False, witness, "atoms generate a discrete lattice")
    return SupportReport(res, basis, None, witness, "no condition decides")


# --------------------------------------------------------------------------
# H0 search
# --------------------------------------------------------------------------

@dataclass
class H0Result:
    feasible: bool
    reason: str  # "found" | "budget" | "unreachable"
    points: np.ndarray = None
    multiplicities: tuple = ()
    value: np.ndarray = None
    error: float = np.inf

    @property
    def total(self):
        return int(sum(self.multiplicities))

    def jumps(self):
        """The combination unrolled as a jump sequence (index order)."""
        out = []
        for p, k in zip(self.points, self.multiplicities):
            out.extend([p] * int(k))
        return np.array(out).reshape(-1, self.points.shape[1]) if out else np.empty((0, self.points.shape[1]))


def exact_combination(points, mult):
    """``sum_i m_i a_i`` in exact rational arithmetic (as Fractions)."""
    d = points.shape[1]
    acc = [Fraction(0)] * d
    for p, k in zip(points, mult):
        if k:
            for j in range(d):
                acc[j] += int(k) * Fraction(float(p[j]))
    return acc


def exact_sq_distance(vec_fracs, target):
    return sum((v - Fraction(float(t))) ** 2 for v, t in zip(vec_fracs, target))


def _candidate_points(measure, target, grid, budget):
    pts = [measure.support_points(grid)]
    if measure.dense_support:
        tnorm = np.linalg.norm(target)
        if tnorm > 0:
            extra = [target / k for k in range(1, budget + 1)
                     if measure.ball_charged(target / k, 1e-12 * tnorm / k)]
            if extra:
                pts.insert(0, np.array(extra))
    pts = np.vstack(pts)
    pts = pts[np.linalg.norm(pts, axis=1) > 0]
    _, first = np.unique(pts, axis=0, return_index=True)
    return pts[np.sort(first)]


def h0_approximate(measure, target, tol, budget=20, grid=64, max_states=200_000):
    """Best N-combination of declared support points near ``target``.

    Searches levels of total multiplicity ``0, 1, ..., budget``; at the first
    level that has a combination within ``tol`` it returns the one closest to
    the target (ties: lexicographically smallest multiplicity vector).  Levels
    larger than ``max_states`` are pruned to the states closest to the
    target, in which case an unsuccessful search reports ``"budget"``.
    ``"unreachable"`` is reserved for targets farther than ``tol`` from the
    closed cone spanned by the support points.
    """
    target = np.atleast_1d(np.asarray(target, dtype=float))
    if tol <= 0 or budget < 1:
        raise ValueError("need tol > 0 and budget >= 1")
    pts = _candidate_points(measure, target, grid, budget)
    J, d = pts.shape
    tol_sq = Fraction(float(tol)) ** 2

    if np.linalg.norm(target) < tol:
        return H0Result(True, "found", pts, (0,) * J, np.zeros(d), float(np.linalg.norm(target)))

    _, cone_res = nnls(pts.T, target)
    if cone_res > tol * (1 + 1e-9):
        return H0Result(False, "unreachable", pts)

    maxnorm = float(np.linalg.norm(pts, axis=1).max())
    # states: multiplicity vectors generated in canonical (non-decreasing index) order
    mults = np.zeros((1, J), dtype=np.int64)
    vals = np.zeros((1, d))
    last = np.zeros(1, dtype=np.int64)
    pruned = False
    for level in range(1, budget + 1):
        new_m, new_v, new_l = [], [], []
        for j in range(J):
            src = last <= j
            if not src.any():
                continue
            m = mults[src].copy()
            m[:, j] += 1
            new_m.append(m)
            new_v.append(vals[src] + pts[j])
            new_l.append(np.full(m.shape[0], j))
        mults = np.vstack(new_m)
        vals = np.vstack(new_v)
        last = np.concatenate(new_l)
        dist = np.linalg.norm(vals - target, axis=1)
        remaining = budget - level
        alive = dist - remaining * maxnorm <= tol * (1 + 1e-9)
        mults, vals, last, dist = mults[alive], vals[alive], last[alive], dist[alive]
        if mults.shape[0] == 0:
            break
        hits = np.flatnonzero(dist <= tol * (1 + 1e-9))
        best = None
        for h in hits:
            m = tuple(int(v) for v in mults[h])
            exact = exact_combination(pts, m)
            dsq = exact_sq_distance(exact, target)
            if dsq <= tol_sq:
                key = (dsq, m)
                if best is None or key < best[0]:
                    best = (key, m, exact)
        if best is not None:
            _, m, exact = best
            value = np.array([float(v) for v in exact])
            return H0Result(True, "found", pts, m, value, float(np.linalg.norm(value - target)))
        if mults.shape[0] > max_states:
            keep = np.argsort(dist, kind="stable")[:max_states]
            mults, vals, last = mults[keep], vals[keep], last[keep]
            pruned = True
    return H0Result(False, "budget" if (pruned or level == budget or mults.shape[0]) else "unreachable", pts)


# --------------------------------------------------------------------------
# finitely many charged balls whose Minkowski sum sits inside B(h, eta_h)
# --------------------------------------------------------------------------

@dataclass
class BallCertificate:
    feasible: bool
    reason: str
    centers: np.ndarray = None
    radii: np.ndarray = None
    target: np.ndarray = None
    eta: float = 0.0

    def to_dict(self):
        out = {"feasible": self.feasible, "reason": self.reason}
        if self.feasible:
            out.update(centers=self.centers.tolist(), radii=self.radii.tolist(),
                       target=self.target.tolist(), eta=self.eta)
        return out


def verify_ball_sum(measure, centers, radii, target, eta):
    """Exact check that ``sum_i B(a_i, r_i)`` lies in ``B(target, eta)``.

    Uses rational arithmetic on the stored floats, so the verdict does not
    depend on rounding.  Also checks ``|a_i| > r_i`` and that every ball
    meets the declared support.
    """
    centers = np.atleast_2d(centers)
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        return False
    s = exact_combination(centers, [1] * len(centers))
    slack = Fraction(float(eta)) - sum(Fraction(float(r)) for r in radii)
    if slack < 0 or exact_sq_distance(s, target) > slack * slack:
        return False
    for a, r in zip(centers, radii):
        if sum(Fraction(float(x)) ** 2 for x in a) <= Fraction(float(r)) ** 2:
            return False
        if not measure.ball_charged(a, r):
            return False
    return True


def check_assumption_v(measure, h, eta_h, budget=20, tol=None, grid=64):
    """Charged balls ``B(a_i, eta_i)``, ``0`` outside their closures, summing into ``B(h, eta_h)``."""
    h = np.atleast_1d(np.asarray(h, dtype=float))
    if eta_h <= 0:
        raise ValueError("eta_h must be positive")
    res = h0_approximate(measure, h, eta_h / 2 if tol is None else tol, budget, grid)
    if not res.feasible:
        return BallCertificate(False, res.reason)
    centers = res.jumps()
    n = len(centers)
    if n == 0:
        return BallCertificate(False, "target within tolerance of 0; no jump needed")
    share = (eta_h - res.error) / n
    radii = np.minimum(share, np.linalg.norm(centers, axis=1) / 2)
    for _ in range(64):
        if verify_ball_sum(measure, centers, radii, h, eta_h):
            return BallCertificate(True, "found", centers, radii, h, float(eta_h))
        radii = np.nextafter(radii, 0) * (1 - 1e-15)
    return BallCertificate(False, "radius allocation failed exact verification")
