import numpy as np
from scipy.special import gamma as gamma_fn

from ..errors import EmptyRegionError, InfiniteMassError
from ._base import (
    IntensityMeasure,
    Tempering,
    ball_interval_on_ray,
    gauss_legendre_log,
    radial_integral,
    sample_radius,
)

RULE_NODES = 64


def sphere_grid(dim, n):
    """Deterministic near-uniform directions on the unit sphere ``S^{dim-1}``."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        t = 2 * np.pi * np.arange(n) / n
        return np.column_stack([np.cos(t), np.sin(t)])
    if dim == 3:
        k = np.arange(n) + 0.5
        z = 1 - 2 * k / n
        phi = np.pi * (1 + 5**0.5) * k
        rho = np.sqrt(1 - z * z)
        return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    g = np.random.default_rng(0).standard_normal((n, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sphere_area(dim):
    return 2 * np.pi ** (dim / 2) / gamma_fn(dim / 2)


class RadialPolar(IntensityMeasure):
    """Polar-form measure ``nu(dr, du) = q(r) r^(-1-alpha) dr w(du)``.

    ``w`` is a finite measure on the sphere, given either as weighted
    directions or, via :meth:`from_sphere_density`, as a density discretized
    on a fixed direction grid.  The declared support is the set of rays
    ``{r u : 0 < r <= R}`` over charged directions, ``R`` the tempering cutoff.
    """

    kind = "radial"

    def __init__(self, alpha, directions, weights, tempering=None, full_sphere=False):
        if not 0 <= alpha < 2:
            raise ValueError("alpha must lie in [0, 2)")
        u = np.asarray(directions, dtype=float)
        if u.ndim == 1:
            u = u[:, None]
        w = np.asarray(weights, dtype=float).reshape(-1)
        if u.shape[0] != w.shape[0] or np.any(w <= 0):
            raise ValueError("need one positive weight per direction")
        norms = np.linalg.norm(u, axis=1)
        if np.any(np.abs(norms - 1) > 1e-9):
            raise ValueError("directions must be unit vectors")
        u = u / norms[:, None]
        u.setflags(write=False)
        w.setflags(write=False)
        self.alpha = float(alpha)
        self.directions = u
        self.weights = w
        self.tempering = tempering if tempering is not None else Tempering()
        self.full_sphere = bool(full_sphere)
        self.dim = u.shape[1]

    @classmethod
    def from_sphere_density(cls, dim, alpha, density=None, tempering=None, n_directions=256):
        """Discretize a positive density on the sphere (default: uniform).

        ``n_directions`` is the approximation knob for masses and sampling;
        the declared support is the full punctured ball of radius ``R``.
        """
        u = sphere_grid(dim, n_directions)
        f = np.ones(len(u)) if density is None else np.asarray([density(v) for v in u], dtype=float)
        if np.any(f <= 0):
            raise ValueError("sphere density must be strictly positive")
        w = f * sphere_area(dim) / len(u) if dim > 1 else f
        return cls(alpha, u, w, tempering, full_sphere=True)

    @classmethod
    def symmetric_1d(cls, alpha, tempering=None, weight=1.0):
        return cls(alpha, [[1.0], [-1.0]], [weight, weight], tempering)

    def __repr__(self):
        return (f"RadialPolar(alpha={self.alpha}, n_directions={len(self.weights)}, "
                f"tempering={self.tempering})")

    def _radial(self, a, b, power=0.0):
        return radial_integral(self.alpha, self.tempering, a, b, power)

    def mass_annulus(self, lo, hi=np.inf):
        return float(self.weights.sum() * self._radial(lo, hi))

    def _ball_pieces(self, center, radius):
        c = np.broadcast_to(np.asarray(center, dtype=float), (self.dim,))
        pieces = []
        for j, u in enumerate(self.directions):
            iv = ball_interval_on_ray(u, c, radius)
            if iv is None:
                continue
            a, b = max(iv[0], 0.0), min(iv[1], self.tempering.radius)
            if b > a:
                pieces.append((j, a, b))
        return pieces

    def mass_in_ball(self, center, radius):
        total = 0.0
        for j, a, b in self._ball_pieces(center, radius):
            total += self.weights[j] * self._radial(a, b)
        return float(total)

    def _sample_pieces(self, pieces, size, rng):
        masses = np.array([self.weights[j] * self._radial(a, b) for j, a, b in pieces])
        if masses.size == 0 or masses.sum() <= 0:
            raise EmptyRegionError("region carries no mass")
        if not np.all(np.isfinite(masses)):
            raise InfiniteMassError("region has infinite mass; raise the cutoff")
        pick = rng.choice(len(pieces), size=size, p=masses / masses.sum())
        out = np.empty((size, self.dim))
        for k, (j, a, b) in enumerate(pieces):
            sel = np.flatnonzero(pick == k)
            if sel.size:
                r = sample_radius(self.alpha, self.tempering, a, b, sel.size, rng)
                out[sel] = r[:, None] * self.directions[j]
        return out

    def sample_annulus(self, lo, hi, size, rng):
        pieces = [(j, lo, hi) for j in range(len(self.weights))]
        if self.mass_annulus(lo, hi) <= 0:
            raise EmptyRegionError(f"annulus ({lo}, {hi}] carries no mass")
        return self._sample_pieces(pieces, size, rng)

    def sample_in_ball(self, center, radius, size, rng):
        return self._sample_pieces(self._ball_pieces(center, radius), size, rng)

    def first_moment(self, lo, hi):
        return self._radial(lo, hi, 1.0) * (self.weights @ self.directions)

    def second_moment(self, lo, hi):
        u = self.directions
        return self._radial(lo, hi, 2.0) * ((u * self.weights[:, None]).T @ u)

    def annulus_rule(self, lo, hi):
        b = min(hi, self.tempering.radius)
        if not b > lo:
            return np.empty((0, self.dim)), np.empty(0)
        if lo <= 0 or not np.isfinite(b):
            raise InfiniteMassError("quadrature rule needs a bounded annulus away from 0")
        r, wr = gauss_legendre_log(lo, b, RULE_NODES)
        wr = wr * self.tempering(r) * r ** (-1.0 - self.alpha)
        nodes = (r[None, :, None] * self.directions[:, None, :]).reshape(-1, self.dim)
        weights = (self.weights[:, None] * wr[None, :]).reshape(-1)
        return nodes, weights

    def ball_charged(self, center, radius):
        c = np.broadcast_to(np.asarray(center, dtype=float), (self.dim,))
        if self.full_sphere:
            dist = float(np.linalg.norm(c))
            return radius > 0 and dist - radius < self.tempering.radius
        return len(self._ball_pieces(c, radius)) > 0

    def support_points(self, grid=64):
        rmax = self.tempering.radius if np.isfinite(self.tempering.radius) else 4.0
        radii = rmax * np.arange(1, grid + 1) / grid
        return (radii[None, :, None] * self.directions[:, None, :]).reshape(-1, self.dim)

    @property
    def dense_support(self):
        return self.full_sphere

    def describe_support(self):
        desc = {"radial_interval": [0.0, float(self.tempering.radius)]}
        if self.full_sphere:
            desc["directions"] = "sphere"
        else:
            desc["directions"] = self.directions.tolist()
        return desc
