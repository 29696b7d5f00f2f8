"""Model specification: drift, jump coefficient and declared structure."""

from dataclasses import dataclass, field

import numpy as np

from ..measures import Atomic

TAGS = ("additive", "monotone-drift", "one-sided", "condition-I frame")


@dataclass(frozen=True)
class LipschitzBounds:
    """Declared Lipschitz moduli of ``sigma``.

    ``|sigma(x, z) - sigma(x', z)| <= state * |x - x'|`` (times ``|z|`` when
    ``state_scales_with_mark``) and ``|sigma(x, z) - sigma(x, z')| <= mark * |z - z'|``.
    """

    state: float
    mark: float
    state_scales_with_mark: bool = True
    drift: float = None

    def state_modulus(self, mark_norm):
        return self.state * mark_norm if self.state_scales_with_mark else self.state


@dataclass
class ModelSpec:
    """``dX = A(X) dt + int sigma(X-, z) N~(dt, dz)`` on ``R^d``.

    ``drift`` and ``sigma`` act on stacked states: ``drift(X)`` maps
    ``(n, d) -> (n, d)`` and ``sigma(X, Z)`` maps two ``(n, d)`` arrays to
    ``(n, d)``.  Optional structure:

    ``matrix``
        ``x -> sigma(x)`` for models with ``sigma(x, z) = sigma(x) @ z``
        (batched: ``(n, d) -> (n, d, d)``).
    ``coordinate``
        ``(coeff, betas)`` for ``sigma(x, z)_i = coeff(x)_i * betas[i] * z_i``.
    ``frame``, ``kappa``, ``Lambda``
        frame vectors and constants for the greedy planner.
    """

    dim: int
    drift: object
    sigma: object
    measure: object = None
    lipschitz: LipschitzBounds = None
    tags: frozenset = frozenset()
    name: str = "custom"
    params: dict = field(default_factory=dict)
    matrix: object = None
    coordinate: tuple = None
    frame: np.ndarray = None
    kappa: float = None
    Lambda: float = None
    coeff_bounds: tuple = None  # (kappa2, kappa1) for coordinate models

    def __post_init__(self):
        self.tags = frozenset(self.tags)
        bad = self.tags - set(TAGS)
        if bad:
            raise ValueError(f"unknown tags {sorted(bad)}")

    @property
    def additive(self):
        return "additive" in self.tags

    def A(self, x):
        x = np.asarray(x, dtype=float)
        return self.drift(x.reshape(-1, self.dim)).reshape(x.shape)

    def jump(self, x, z):
        """``sigma(x, z)`` for single vectors (or matching stacks)."""
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        X, Z = np.broadcast_arrays(x.reshape(-1, self.dim), z.reshape(-1, self.dim))
        return self.sigma(X, Z).reshape(np.broadcast_shapes(x.shape, z.shape))

    def sigma_matrix(self, x):
        if self.matrix is None:
            raise TypeError(f"model {self.name!r} has no matrix form sigma(x)")
        return np.asarray(self.matrix(np.asarray(x, dtype=float).reshape(1, self.dim))[0])

    def compensator(self, cutoff, measure=None):
        """``C(X) = int_{cutoff < |z| <= 1} sigma(X, z) nu(dz)`` as a batched callable."""
        measure = self.measure if measure is None else measure
        d = self.dim
        if measure is None or cutoff >= 1.0:
            return lambda X: np.zeros_like(X)
        if self.additive:
            c = np.asarray(measure.first_moment(cutoff, 1.0), dtype=float).reshape(d)
            if not np.any(c):
                return lambda X: np.zeros_like(X)
            return lambda X: np.broadcast_to(c, X.shape)
        if self.matrix is not None:
            c = np.asarray(measure.first_moment(cutoff, 1.0), dtype=float).reshape(d)
            if not np.any(c):
                return lambda X: np.zeros_like(X)
            return lambda X: np.einsum("nij,j->ni", self.matrix(X), c)
        nodes, w = measure.annulus_rule(cutoff, 1.0)
        if w.size == 0:
            return lambda X: np.zeros_like(X)

        nodes = np.asarray(nodes, dtype=float).reshape(-1, d)
        sigma = self.sigma

        def C(X):
            # evaluate sigma on (path, node) pairs in chunks of about 2^18 rows
            n = X.shape[0]
            out = np.zeros_like(X)
            step = max(1, (1 << 18) // max(n, 1))
            for a in range(0, w.size, step):
                Zk, wk = nodes[a:a + step], w[a:a + step]
                k = wk.size
                S = sigma(np.repeat(X, k, axis=0), np.tile(Zk, (n, 1))).reshape(n, k, d)
                out += np.einsum("nkd,k->nd", S, wk)
            return out

        return C

    def validate(self, n=256, rng=None, scale=2.0):
        """Probabilistic check of declared structure on random ``(x, z)`` pairs.

        Returns a list of violation messages (empty when everything holds).
        """
        rng = np.random.default_rng(rng)
        d = self.dim
        X = scale * rng.standard_normal((n, d))
        Z = scale * rng.standard_normal((n, d))
        out = []
        S = self.sigma(X, Z)
        if self.additive and not np.array_equal(S, Z):
            out.append("declared additive but sigma(x, z) != z")
        if self.lipschitz is not None:
            L = self.lipschitz
            X2 = X + 0.1 * rng.standard_normal((n, d))
            Z2 = Z + 0.1 * rng.standard_normal((n, d))
            dx = np.linalg.norm(self.sigma(X2, Z) - S, axis=1)
            bound_x = L.state * np.linalg.norm(X2 - X, axis=1)
            if L.state_scales_with_mark:
                bound_x = bound_x * np.linalg.norm(Z, axis=1)
            if np.any(dx > bound_x * (1 + 1e-9) + 1e-12):
                out.append("state Lipschitz bound violated")
            dz = np.linalg.norm(self.sigma(X, Z2) - S, axis=1)
            if np.any(dz > L.mark * np.linalg.norm(Z2 - Z, axis=1) * (1 + 1e-9) + 1e-12):
                out.append("mark Lipschitz bound violated")
        if self.Lambda is not None and self.matrix is not None:
            M = self.matrix(X)
            sv = np.linalg.svd(M, compute_uv=False)
            if np.any(sv.max(axis=1) > self.Lambda * (1 + 1e-9)) or np.any(sv.min(axis=1) < (1 - 1e-9) / self.Lambda):
                out.append("sigma(x) outside the declared Lambda bounds")
        if "one-sided" in self.tags and isinstance(self.measure, Atomic):
            if self.dim == 1 and not (np.all(self.measure.locations > 0) or np.all(self.measure.locations < 0)):
                out.append("declared one-sided but atoms have both signs")
        return out
