"""Shared pieces of the intensity-measure variants.

Conventions used throughout:

* ``Z_m = {z : |z| > 1/m}`` uses a strict inequality; annuli are
  ``{lo < |z| <= hi}``; balls ``B(c, r)`` are open.
* All masses are intensities (units 1/time).
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ..errors import EmptyRegionError, QuadratureError

QUAD_RTOL = 1e-8


@dataclass(frozen=True)
class Tempering:
    """Radial tempering ``q(r) = scale * exp(-rate * r) * 1{r <= radius}``.

    The catalog names map onto the parameters: ``constant`` (rate 0, no
    cutoff), ``exponential`` (rate > 0) and ``truncation`` (finite radius).
    """

    scale: float = 1.0
    rate: float = 0.0
    radius: float = np.inf

    def __post_init__(self):
        if self.scale < 0 or self.rate < 0 or not self.radius > 0:
            raise ValueError("tempering needs scale >= 0, rate >= 0, radius > 0")

    @classmethod
    def constant(cls, scale=1.0):
        return cls(scale=scale)

    @classmethod
    def exponential(cls, rate, scale=1.0):
        return cls(scale=scale, rate=rate)

    @classmethod
    def truncation(cls, radius, scale=1.0):
        return cls(scale=scale, radius=radius)

    @property
    def kind(self):
        if self.rate > 0:
            return "exponential"
        if np.isfinite(self.radius):
            return "truncation"
        return "constant"

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.radius, self.scale * np.exp(-self.rate * r), 0.0)


def radial_integral(alpha, tempering, a, b, power=0.0):
    """``int_a^b r**power * q(r) * r**(-1-alpha) dr`` with ``0 <= a < b <= inf``.

    Closed form for untempered integrands, adaptive quadrature otherwise.
    Returns ``inf`` for divergent integrals and raises
    :class:`QuadratureError` when quadrature cannot certify ``QUAD_RTOL``.
    """
    b = min(b, tempering.radius)
    if not b > a or tempering.scale == 0:
        return 0.0
    e = power - alpha
    if a == 0 and e <= 0:
        return np.inf
    if tempering.rate == 0:
        if np.isinf(b):
            if e >= 0:
                return np.inf
            return tempering.scale * (-(a**e) / e)
        if e == 0:
            return tempering.scale * np.log(b / a)
        return tempering.scale * (b**e - a**e) / e

    lam = tempering.rate

    def f(r):
        return np.exp(-lam * r) * r ** (e - 1.0)

    total, err = 0.0, 0.0
    pieces = []
    if a == 0:
        split = min(b, 1.0 / lam)
        pieces.append((0.0, split))
        if b > split:
            pieces.append((split, b))
    else:
        pieces.append((a, b))
    for lo, hi in pieces:
        val, est = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-11, limit=400)
        total += val
        err += est
    if not np.isfinite(total) or err > QUAD_RTOL * max(abs(total), 1e-300):
        raise QuadratureError(
            f"radial integral on ({a}, {b}) did not converge: value {total}, error {err}"
        )
    return tempering.scale * total


def sample_radius(alpha, tempering, a, b, size, rng):
    """Draw radii from ``q(r) r^(-1-alpha)`` restricted to ``(a, b]``, ``a > 0``."""
    b = min(b, tempering.radius)
    if not (a > 0 and b > a):
        raise EmptyRegionError(f"empty radial interval ({a}, {b}]")
    out = np.empty(size)
    filled = 0
    while filled < size:
        need = size - filled
        u = rng.random(need)
        if alpha > 0:
            hi_term = 0.0 if np.isinf(b) else b ** (-alpha)
            r = (a ** (-alpha) - u * (a ** (-alpha) - hi_term)) ** (-1.0 / alpha)
        else:
            if np.isinf(b):
                raise EmptyRegionError("alpha = 0 needs a finite radial cutoff or tempering")
            r = a * (b / a) ** u
        if tempering.rate > 0:
            keep = rng.random(need) < np.exp(-tempering.rate * (r - a))
            r = r[keep]
        out[filled:filled + r.size] = r
        filled += r.size
    return out


def ball_interval_on_ray(direction, center, radius):
    """Parameters ``t`` with ``|t*u - c| < radius`` as ``(lo, hi)`` or ``None``."""
    proj = float(np.dot(direction, center))
    disc = proj * proj - float(np.dot(center, center)) + radius * radius
    if disc <= 0:
        return None
    s = np.sqrt(disc)
    return proj - s, proj + s


class IntensityMeasure(ABC):
    """A Lévy intensity measure on ``R^d`` with a declared support."""

    kind = "abstract"
    dim: int

    # --- mass -----------------------------------------------------------
    @abstractmethod
    def mass_annulus(self, lo, hi=np.inf):
        """``nu({lo < |z| <= hi})``."""

    @abstractmethod
    def mass_in_ball(self, center, radius):
        """``nu(B(center, radius))``."""

    def mass_beyond(self, r):
        return self.mass_annulus(r, np.inf)

    # --- sampling -------------------------------------------------------
    @abstractmethod
    def sample_annulus(self, lo, hi, size, rng):
        """``size`` i.i.d. draws from ``nu`` restricted to the annulus."""

    @abstractmethod
    def sample_in_ball(self, center, radius, size, rng):
        """``size`` i.i.d. draws from ``nu`` restricted to the ball."""

    # --- integrals ------------------------------------------------------
    @abstractmethod
    def first_moment(self, lo, hi):
        """``int_{lo<|z|<=hi} z nu(dz)``."""

    @abstractmethod
    def second_moment(self, lo, hi):
        """``int_{lo<|z|<=hi} z z^T nu(dz)``."""

    @abstractmethod
    def annulus_rule(self, lo, hi):
        """Nodes and weights with ``sum w_k f(z_k) ~ int_{lo<|z|<=hi} f dnu``."""

    def integrate_annulus(self, f, lo, hi):
        nodes, weights = self.annulus_rule(lo, hi)
        if weights.size == 0:
            return None
        vals = np.asarray(f(nodes), dtype=float)
        return np.tensordot(weights, vals, axes=(0, 0))

    def integrability(self):
        """``int (|z|^2 ^ 1) nu(dz)``."""
        return float(np.trace(self.second_moment(0.0, 1.0))) + self.mass_annulus(1.0, np.inf)

    # --- declared support -------------------------------------------------
    @abstractmethod
    def ball_charged(self, center, radius):
        """Whether the declared support meets ``B(center, radius) minus {0}``."""

    @abstractmethod
    def support_points(self, grid=64):
        """A finite set of declared support points (all nonzero)."""

    @property
    def finite_activity(self):
        return np.isfinite(self.mass_annulus(0.0, np.inf))

    @property
    def dense_support(self):
        return False

    @abstractmethod
    def describe_support(self):
        """JSON-ready description of the declared support."""

    def check(self):
        """Raise ``ValueError`` unless the integrability invariant holds."""
        val = self.integrability()
        if not np.isfinite(val):
            raise ValueError(f"{self.kind} measure violates int(|z|^2 ^ 1) dnu < inf")
        return val


def gauss_legendre_log(a, b, n):
    """Gauss-Legendre nodes/weights in ``log r`` on ``[a, b]`` (``0 < a < b < inf``)."""
    x, w = np.polynomial.legendre.leggauss(n)
    la, lb = np.log(a), np.log(b)
    t = 0.5 * (lb - la) * x + 0.5 * (lb + la)
    r = np.exp(t)
    return r, 0.5 * (lb - la) * w * r
