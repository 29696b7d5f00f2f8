"""Named example models.

Several entries cancel the compensator: the engine always adds
``-int_{|z|<=1} sigma(x, z) nu(dz)`` to the drift, so a model whose jumps
should act *uncompensated* (positive jumps pushing a path upward, say) sets
its drift to ``b + int_{|z|<=1} sigma(x, z) nu(dz)``.
"""

import numpy as np

from ..measures import Atomic, Product, RadialPolar, Tempering
from .model import LipschitzBounds, ModelSpec

E3 = np.array([-1.0, -1.0]) / np.sqrt(2.0)


def _additive(X, Z):
    return Z.copy()


def _const_drift(c):
    c = np.asarray(c, dtype=float)
    return lambda X: np.broadcast_to(c, X.shape).copy()


def _small_first_moment(measure):
    return np.asarray(measure.first_moment(0.0, 1.0), dtype=float).reshape(measure.dim)


def frozen(dim=1):
    """``A = 0``, ``sigma = 0``: every path stays put."""
    return ModelSpec(dim, lambda X: np.zeros_like(X), lambda X, Z: np.zeros_like(Z),
                     measure=None, lipschitz=LipschitzBounds(0.0, 0.0), name="frozen", params={"dim": dim})


def pure_drift(c=(1.0,)):
    c = np.atleast_1d(np.asarray(c, dtype=float))
    return ModelSpec(c.size, _const_drift(c), lambda X, Z: np.zeros_like(Z), measure=None,
                     lipschitz=LipschitzBounds(0.0, 0.0), name="pure_drift", params={"c": c.tolist()})


def compound_poisson(measure, drift=None):
    """``A = drift`` with additive noise; ``drift=None`` cancels the compensator."""
    c = _small_first_moment(measure) if drift is None else np.asarray(drift, dtype=float)
    return ModelSpec(measure.dim, _const_drift(c), _additive, measure, LipschitzBounds(0.0, 1.0),
                     {"additive"}, name="compound_poisson")


def ornstein_uhlenbeck(theta=1.0, measure=None, dim=1):
    """``A(x) = -theta x`` with additive noise (default: symmetric tempered 1-stable jumps)."""
    if measure is None:
        measure = RadialPolar.symmetric_1d(1.0, Tempering.exponential(1.0)) if dim == 1 else \
            RadialPolar.from_sphere_density(dim, 1.0, tempering=Tempering.exponential(1.0), n_directions=64)
    return ModelSpec(measure.dim, lambda X: -theta * X, _additive, measure,
                     LipschitzBounds(0.0, 1.0, drift=abs(theta)), {"additive", "monotone-drift"} if theta >= 0 else {"additive"},
                     name="ornstein_uhlenbeck", params={"theta": theta})


def one_sided_counterexample(b=0.5, atoms=(0.5, 1.5), rates=(1.0, 1.0)):
    """Nonnegative drift and positive jumps in 1-D: no path started at 0 goes below 0."""
    if b < 0 or min(atoms) <= 0:
        raise ValueError("needs b >= 0 and positive atoms")
    nu = Atomic(np.asarray(atoms, dtype=float), rates)
    c = b + _small_first_moment(nu)
    return ModelSpec(1, _const_drift(c), _additive, nu, LipschitzBounds(0.0, 1.0),
                     {"additive", "one-sided"}, name="one_sided_counterexample",
                     params={"b": b, "atoms": list(atoms), "rates": list(rates)})


def _frame_measure(frame, radii, alpha, rate):
    if radii is not None:
        locs = [r * f for f in frame for r in radii]
        return Atomic(np.array(locs), [rate] * len(locs))
    return RadialPolar(alpha, frame, np.ones(len(frame)), Tempering.truncation(1.0))


def _frame_model(frame, name, radii, alpha, rate, b, tags):
    frame = np.asarray(frame, dtype=float)
    nu = _frame_measure(frame, radii, alpha, rate)
    c = np.asarray(b, dtype=float) + _small_first_moment(nu)
    kappa = frame_kappa(frame)
    return ModelSpec(2, _const_drift(c), _additive, nu, LipschitzBounds(0.0, 1.0), tags, name=name,
                     params={"radii": None if radii is None else list(radii), "alpha": alpha,
                             "rate": rate, "b": list(np.asarray(b, dtype=float))},
                     matrix=lambda X: np.broadcast_to(np.eye(2), (X.shape[0], 2, 2)),
                     frame=frame, kappa=kappa, Lambda=1.0)


def quadrant_locked_2d(radii=(0.25, 0.5, 1.0), alpha=0.5, rate=1.0, b=(0.0, 0.0)):
    """Jumps only along ``e1`` and ``e2`` (uncompensated): paths never leave the closed first quadrant.

    ``radii`` selects a compound-Poisson surrogate with atoms ``r e_i``;
    ``radii=None`` uses a stable-like density on ``(0, 1]`` along each axis.
    """
    return _frame_model(np.eye(2), "quadrant_locked_2d", radii, alpha, rate, b,
                        {"additive", "one-sided", "condition-I frame"})


def frame_fixed_2d(radii=(0.25, 0.5, 1.0), alpha=0.5, rate=1.0, b=(0.0, 0.0)):
    """The quadrant model plus the direction ``e3 = -(e1 + e2)/sqrt(2)``."""
    return _frame_model(np.vstack([np.eye(2), E3]), "frame_fixed_2d", radii, alpha, rate, b,
                        {"additive", "condition-I frame"})


def frame_kappa(frame, n=20000):
    """``min_{|y|=1} max_i <f_i, y>`` for unit frame vectors (exact in 2-D, sampled otherwise)."""
    frame = np.asarray(frame, dtype=float)
    frame = frame / np.linalg.norm(frame, axis=1, keepdims=True)
    if frame.shape[1] == 2:
        ang = np.sort(np.arctan2(frame[:, 1], frame[:, 0]))
        gaps = np.diff(np.r_[ang, ang[0] + 2 * np.pi])
        return float(np.cos(gaps.max() / 2))
    y = np.random.default_rng(0).standard_normal((n, frame.shape[1]))
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    return float((y @ frame.T).max(axis=1).min())


def monotone_cubic(dim=1, atoms=(0.5, 1.5), rate=1.0):
    """``A(x) = -x**3`` componentwise with symmetric additive jumps ``±a e_i``."""
    locs = []
    for i in range(dim):
        for a in atoms:
            for s in (1.0, -1.0):
                z = np.zeros(dim)
                z[i] = s * a
                locs.append(z)
    nu = Atomic(np.array(locs), [rate] * len(locs))
    return ModelSpec(dim, lambda X: -X ** 3, _additive, nu, LipschitzBounds(0.0, 1.0),
                     {"additive", "monotone-drift"}, name="monotone_cubic",
                     params={"dim": dim, "atoms": list(atoms), "rate": rate})


def singular_stable_like(alpha=1.5, holder=0.5, angle=0.3, amp=0.25, w=(1.0, -0.5), n_directions=64):
    """Bounded Hölder drift and ``sigma(x) = (1 + amp sin<w, x>) R(angle)`` in 2-D.

    ``|sigma(x) xi|`` stays within ``[(1 - amp)|xi|, (1 + amp)|xi|]``; the
    frame ``e1, e2, e3`` keeps its alignment constant under the rotation.
    """
    w = np.asarray(w, dtype=float)
    R = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])

    def scale(X):
        return 1.0 + amp * np.sin(X @ w)

    def matrix(X):
        return scale(X)[:, None, None] * R[None, :, :]

    def sigma(X, Z):
        return scale(X)[:, None] * (Z @ R.T)

    def drift(X):
        return -0.5 * np.sign(X) * np.minimum(np.abs(X), 1.0) ** holder

    nu = RadialPolar.from_sphere_density(2, alpha, tempering=Tempering.exponential(1.0), n_directions=n_directions)
    frame = np.vstack([np.eye(2), E3])
    Lam = max(1.0 + amp, 1.0 / (1.0 - amp))
    return ModelSpec(2, drift, sigma, nu, LipschitzBounds(amp * np.linalg.norm(w), 1.0 + amp), set(),
                     name="singular_stable_like",
                     params={"alpha": alpha, "holder": holder, "angle": angle, "amp": amp, "w": w.tolist()},
                     matrix=matrix, frame=frame, kappa=frame_kappa(frame), Lambda=Lam)


def coordinate_walk(coeff, betas, atoms=None, kappa=(0.5, 2.0), lipschitz=None):
    """``sigma(x, z)_i = coeff(x)_i * beta_i * z_i`` with per-coordinate atoms ``±2^-k``.

    ``coeff`` maps ``(n, d) -> (n, d)``; ``kappa = (kappa2, kappa1)`` bounds
    ``|coeff|``.
    """
    betas = np.asarray(betas, dtype=float)
    d = betas.size
    if atoms is None:
        atoms = [s * 2.0 ** -k for k in range(0, 13) for s in (1.0, -1.0)]
    coords = [Atomic(np.asarray(atoms, dtype=float), np.ones(len(atoms))) for _ in range(d)]
    nu = Product(coords)

    def sigma(X, Z):
        return coeff(X) * betas * Z

    return ModelSpec(d, lambda X: np.zeros_like(X), sigma, nu, lipschitz, set(), name="coordinate_walk",
                     params={"betas": betas.tolist()}, coordinate=(coeff, betas), coeff_bounds=tuple(kappa))


def lipschitz_scalar_1d(amp=0.1):
    """``sigma(x, z) = (1 + amp sin x) z`` in 1-D."""
    def sigma(X, Z):
        return (1.0 + amp * np.sin(X)) * Z

    nu = RadialPolar.symmetric_1d(1.0, Tempering.exponential(1.0))
    return ModelSpec(1, lambda X: np.zeros_like(X), sigma, nu, LipschitzBounds(amp, 1.0 + amp), set(),
                     name="lipschitz_scalar_1d", params={"amp": amp},
                     matrix=lambda X: (1.0 + amp * np.sin(X))[:, :, None])


REGISTRY = {
    "frozen": frozen,
    "pure_drift": pure_drift,
    "ornstein_uhlenbeck": ornstein_uhlenbeck,
    "one_sided_counterexample": one_sided_counterexample,
    "quadrant_locked_2d": quadrant_locked_2d,
    "frame_fixed_2d": frame_fixed_2d,
    "monotone_cubic": monotone_cubic,
    "singular_stable_like": singular_stable_like,
    "lipschitz_scalar_1d": lipschitz_scalar_1d,
}


def make_model(name, **params):
    if name not in REGISTRY:
        raise KeyError(f"unknown model {name!r}; known: {sorted(REGISTRY)}")
    return REGISTRY[name](**params)
