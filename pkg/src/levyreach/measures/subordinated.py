"""Intensity of a subordinated process ``L_t = X_{Z_t}``.

With subordinator Lévy measure ``rho`` and drift ``beta0`` the jump
intensity is ``nu(B) = beta0 nu_X(B) + int mu_X^s(B) rho(ds)``, ``mu_X^s`` the
law of ``X_s``.  Two bases are supported:

* :class:`GaussianBase` -- ``X`` a Brownian motion with covariance ``C``;
  ``nu_X = 0`` (the ``beta0`` part is a continuous Gaussian component, carried
  separately by the noise sampler).
* :class:`Product` with atomic coordinates -- ``X`` compound Poisson; with an
  atomic subordinator ``nu`` is itself atomic and is built explicitly.
"""

import numpy as np
from scipy import integrate, stats

from ..errors import EmptyRegionError, QuadratureError
from ._base import QUAD_RTOL, IntensityMeasure
from .atomic import Atomic
from .product import Product
from .radial import RadialPolar, sphere_grid

LAW_TAIL = 1e-13
RULE_SAMPLES = 4096
S_GRID = 2048


class GaussianBase:
    """Brownian motion on ``R^d`` with covariance ``cov`` per unit time."""

    def __init__(self, cov):
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        if cov.shape[0] != cov.shape[1]:
            raise ValueError("covariance must be square")
        eig = np.linalg.eigvalsh(cov)
        if np.any(eig <= 0):
            raise ValueError("covariance must be positive definite")
        self.cov = cov
        self.eig = eig
        self.chol = np.linalg.cholesky(cov)
        self.dim = cov.shape[0]
        self.isotropic = bool(np.allclose(cov, eig[0] * np.eye(self.dim), rtol=1e-13, atol=0))

    def __repr__(self):
        return f"GaussianBase(cov={self.cov.tolist()})"

    def tail(self, s, r):
        """``P(|X_s| > r)``."""
        if r <= 0:
            return 1.0
        if self.isotropic:
            return float(stats.chi2.sf(r * r / (s * self.eig[0]), self.dim))
        lam = s * self.eig
        x = r * r

        def f(u):
            theta = 0.5 * np.sum(np.arctan(lam * u)) - 0.5 * x * u
            rho = np.prod((1 + (lam * u) ** 2) ** 0.25)
            return np.sin(theta) / (u * rho)

        val, err = integrate.quad(f, 0, np.inf, limit=500)
        if err > 1e-9:
            raise QuadratureError(f"Gaussian norm tail did not converge (err {err:.2e})")
        return float(min(max(0.5 + val / np.pi, 0.0), 1.0))

    def ball_prob(self, s, center, radius):
        if not self.isotropic:
            raise NotImplementedError("ball masses need an isotropic Gaussian base")
        v = s * self.eig[0]
        nc = float(np.dot(center, center)) / v
        return float(stats.ncx2.cdf(radius * radius / v, self.dim, nc))

    def sample(self, s, size, rng):
        g = rng.standard_normal((size, self.dim))
        return np.sqrt(np.asarray(s, dtype=float)).reshape(-1, 1) * (g @ self.chol.T)

    def sample_annulus(self, s, lo, hi, size, rng):
        """Draws of ``X_s`` conditioned on ``lo < |X_s| <= hi``."""
        if self.isotropic:
            scale = np.sqrt(s * self.eig[0])
            chi = stats.chi(self.dim)
            a, b = chi.cdf(lo / scale), chi.cdf(hi / scale)
            if not b > a:
                raise EmptyRegionError("annulus has negligible Gaussian mass")
            rad = scale * chi.ppf(a + (b - a) * rng.random(size))
            u = rng.standard_normal((size, self.dim))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
            return rad[:, None] * u
        out = np.empty((size, self.dim))
        filled, tries = 0, 0
        while filled < size:
            x = self.sample(np.full(4 * (size - filled) + 16, s), 4 * (size - filled) + 16, rng)
            n = np.linalg.norm(x, axis=1)
            x = x[(n > lo) & (n <= hi)][: size - filled]
            out[filled:filled + len(x)] = x
            filled += len(x)
            tries += 1
            if tries > 10_000:
                raise EmptyRegionError("rejection sampler for the annulus stalled")
        return out

    def sample_ball(self, s, center, radius, size, rng):
        """Draws of ``X_s`` conditioned on ``B(center, radius)`` by rejection."""
        from .._rng import uniform_in_ball

        prec = np.linalg.inv(s * self.cov)
        c = np.asarray(center, dtype=float)
        # density max over the ball is at the point closest to 0
        dist = np.linalg.norm(c)
        closest = c * max(0.0, 1 - radius / dist) if dist > 0 else c
        log_max = -0.5 * closest @ prec @ closest
        out = np.empty((size, self.dim))
        filled, tries = 0, 0
        while filled < size:
            y = uniform_in_ball(c, radius, 4 * (size - filled) + 16, rng)
            logd = -0.5 * np.einsum("ij,jk,ik->i", y, prec, y)
            keep = np.log(rng.random(len(y))) < logd - log_max
            y = y[keep][: size - filled]
            out[filled:filled + len(y)] = y
            filled += len(y)
            tries += 1
            if tries > 100_000:
                raise EmptyRegionError("rejection sampler for the ball stalled")
        return out


def _poisson_counts(mean, tail):
    k = int(stats.poisson.isf(tail, mean)) + 1 if mean > 0 else 0
    ks = np.arange(k + 1)
    return ks, stats.poisson.pmf(ks, mean)


def cp_law_1d(measure, t, tail=LAW_TAIL):
    """Law of a 1-D compound Poisson variable with atomic intensity at time ``t``.

    Returned as ``(values, probabilities)``; total multiplicity is truncated
    where the aggregate Poisson tail drops below ``tail``.
    """
    vals = np.zeros(1)
    probs = np.ones(1)
    for a, lam in zip(measure.locations[:, 0], measure.rates):
        ks, pk = _poisson_counts(lam * t, tail / max(1, len(measure.rates)))
        vals = (vals[:, None] + ks[None, :] * a).reshape(-1)
        probs = (probs[:, None] * pk[None, :]).reshape(-1)
    return vals, probs


class Subordinated(IntensityMeasure):
    kind = "subordinated"

    def __init__(self, base, subordinator, drift=0.0):
        if subordinator.dim != 1:
            raise ValueError("subordinator must be a 1-D measure")
        if np.any(subordinator.support_points(8)[:, 0] <= 0):
            raise ValueError("subordinator measure must live on (0, inf)")
        if drift < 0:
            raise ValueError("subordinator drift must be >= 0")
        self.base = base
        self.subordinator = subordinator
        self.drift = float(drift)
        self.dim = base.dim
        self._atomic = None
        if isinstance(base, Product):
            if not isinstance(subordinator, Atomic) or not all(isinstance(m, Atomic) for m in base.coords):
                raise NotImplementedError("product base needs atomic coordinates and an atomic subordinator")
            self._atomic = self._build_atomic()
        elif not isinstance(base, GaussianBase):
            raise TypeError("base must be a GaussianBase or a Product measure")
        self._check_subordinator()

    def __repr__(self):
        return f"Subordinated(base={self.base!r}, subordinator={self.subordinator!r}, drift={self.drift})"

    def _check_subordinator(self):
        rho = self.subordinator
        val = rho.first_moment(0.0, 1.0)[0] + rho.mass_annulus(1.0, np.inf)
        if not np.isfinite(val):
            raise ValueError("subordinator violates int (1 ^ s) rho(ds) < inf")
        self.subordinator_activity = float(val)

    # -- product base: explicit atoms --------------------------------------
    def _product_law(self, s):
        base = self.base
        pts = np.zeros((1, self.dim))
        probs = np.ones(1)
        for i, m in enumerate(base.coords):
            v, p = cp_law_1d(m, s)
            step = np.zeros((len(v), self.dim))
            step[:, i] = base.scales[i] * v
            pts = (pts[:, None, :] + step[None, :, :]).reshape(-1, self.dim)
            probs = (probs[:, None] * p[None, :]).reshape(-1)
        return pts, probs

    def _build_atomic(self):
        locs, rates = [], []
        rho = self.subordinator
        for s, lam in zip(rho.locations[:, 0], rho.rates):
            pts, probs = self._product_law(s)
            keep = (np.linalg.norm(pts, axis=1) > 0) & (probs > 0)
            locs.append(pts[keep])
            rates.append(lam * probs[keep])
        if self.drift > 0:
            for i, m in enumerate(self.base.coords):
                z = np.zeros((len(m.rates), self.dim))
                z[:, i] = self.base.scales[i] * m.locations[:, 0]
                locs.append(z)
                rates.append(self.drift * m.rates)
        locs = np.vstack(locs)
        rates = np.concatenate(rates)
        # merge coincident atoms so the support description stays finite and exact
        uniq, inv = np.unique(locs, axis=0, return_inverse=True)
        merged = np.bincount(inv.reshape(-1), weights=rates)
        return Atomic(uniq, merged)

    # -- gaussian base: integrals over rho ------------------------------------
    def _rho_integral(self, g):
        rho = self.subordinator
        if isinstance(rho, Atomic):
            return float(sum(lam * g(s) for s, lam in zip(rho.locations[:, 0], rho.rates)))
        if isinstance(rho, RadialPolar):
            w = rho.weights[rho.directions[:, 0] > 0].sum()
            temp = rho.tempering

            def f(s):
                return g(s) * temp(s) * s ** (-1.0 - rho.alpha)

            upper = temp.radius
            pieces = [(0.0, min(1.0, upper))]
            if upper > 1.0:
                pieces.append((1.0, upper))
            total, err = 0.0, 0.0
            for a, b in pieces:
                val, est = integrate.quad(f, a, b, limit=400, epsabs=1e-14, epsrel=1e-10)
                total += val
                err += est
            if err > QUAD_RTOL * max(abs(total), 1e-12):
                raise QuadratureError(f"subordinator integral did not converge (err {err:.2e})")
            return float(w * total)
        raise TypeError("unsupported subordinator measure")

    def _s_table(self, weight):
        """Tabulated ``rho(ds) * weight(s)`` for inverse-CDF draws of ``s``."""
        rho = self.subordinator
        if isinstance(rho, Atomic):
            s = rho.locations[:, 0]
            p = rho.rates * np.array([weight(v) for v in s])
            return s, p, True
        upper = rho.tempering.radius if np.isfinite(rho.tempering.radius) else 1e3
        s = np.geomspace(1e-8, upper, S_GRID)
        dens = np.array([weight(v) for v in s]) * rho.tempering(s) * s ** (-1.0 - rho.alpha)
        return s, dens, False

    def _draw_s(self, weight, size, rng):
        s, p, discrete = self._s_table(weight)
        if p.sum() <= 0:
            raise EmptyRegionError("region carries no mass")
        if discrete:
            return s[rng.choice(len(s), size=size, p=p / p.sum())]
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(s))])
        return np.interp(rng.random(size) * cdf[-1], cdf, s)

    def mass_annulus(self, lo, hi=np.inf):
        if self._atomic is not None:
            return self._atomic.mass_annulus(lo, hi)
        base = self.base
        return self._rho_integral(lambda s: base.tail(s, lo) - (0.0 if np.isinf(hi) else base.tail(s, hi)))

    def mass_in_ball(self, center, radius):
        if self._atomic is not None:
            return self._atomic.mass_in_ball(center, radius)
        c = np.asarray(center, dtype=float)
        return self._rho_integral(lambda s: self.base.ball_prob(s, c, radius))

    def sample_annulus(self, lo, hi, size, rng):
        if self._atomic is not None:
            return self._atomic.sample_annulus(lo, hi, size, rng)
        base = self.base
        weight = lambda s: base.tail(s, lo) - (0.0 if np.isinf(hi) else base.tail(s, hi))
        s = self._draw_s(weight, size, rng)
        out = np.empty((size, self.dim))
        for v in np.unique(s):
            sel = np.flatnonzero(s == v)
            out[sel] = base.sample_annulus(v, lo, hi, sel.size, rng)
        return out

    def sample_in_ball(self, center, radius, size, rng):
        if self._atomic is not None:
            return self._atomic.sample_in_ball(center, radius, size, rng)
        c = np.asarray(center, dtype=float)
        s = self._draw_s(lambda v: self.base.ball_prob(v, c, radius), size, rng)
        out = np.empty((size, self.dim))
        for v in np.unique(s):
            sel = np.flatnonzero(s == v)
            out[sel] = self.base.sample_ball(v, c, radius, sel.size, rng)
        return out

    def first_moment(self, lo, hi):
        if self._atomic is not None:
            return self._atomic.first_moment(lo, hi)
        return np.zeros(self.dim)  # centered Gaussian laws are symmetric

    def second_moment(self, lo, hi):
        if self._atomic is not None:
            return self._atomic.second_moment(lo, hi)
        base = self.base
        if not base.isotropic:
            raise NotImplementedError("second moments need an isotropic Gaussian base")
        d, c = self.dim, base.eig[0]

        def g(s):
            v = s * c
            top = 1.0 if np.isinf(hi) else stats.chi2.cdf(hi * hi / v, d + 2)
            return v * (top - stats.chi2.cdf(lo * lo / v, d + 2))

        return self._rho_integral(g) * np.eye(d)

    def annulus_rule(self, lo, hi):
        if self._atomic is not None:
            return self._atomic.annulus_rule(lo, hi)
        mass = self.mass_annulus(lo, hi)
        if mass <= 0:
            return np.empty((0, self.dim)), np.empty(0)
        # fixed-seed Monte Carlo rule; an approximation documented in the README
        nodes = self.sample_annulus(lo, hi, RULE_SAMPLES, np.random.default_rng(20240601))
        return nodes, np.full(RULE_SAMPLES, mass / RULE_SAMPLES)

    def ball_charged(self, center, radius):
        if self._atomic is not None:
            return self._atomic.ball_charged(center, radius)
        return radius > 0

    def support_points(self, grid=64):
        if self._atomic is not None:
            return self._atomic.support_points(grid)
        rmax = 4.0 * np.sqrt(self.base.eig.max())
        u = sphere_grid(self.dim, 16 if self.dim > 1 else 2)
        radii = rmax * np.arange(1, grid + 1) / grid
        return (radii[None, :, None] * u[:, None, :]).reshape(-1, self.dim)

    @property
    def dense_support(self):
        return self._atomic is None

    def describe_support(self):
        if self._atomic is not None:
            return self._atomic.describe_support()
        return {"dense": True}
