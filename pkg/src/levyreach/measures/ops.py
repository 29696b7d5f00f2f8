"""Region-level queries on intensity measures."""

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .._rng import as_generator
from ..errors import EmptyRegionError, InfiniteMassError, QuadratureError
from ._base import QUAD_RTOL
from .atomic import Atomic
from .product import Product
from .radial import RadialPolar


@dataclass(frozen=True)
class Annulus:
    """``Z_m = {z : |z| > 1/m}`` (optionally capped: ``1/m < |z| <= hi``)."""

    m: float
    hi: float = np.inf

    @property
    def lo(self):
        return 1.0 / self.m


@dataclass(frozen=True)
class Ball:
    """Open ball ``B(center, radius)``."""

    center: tuple
    radius: float


def mass_of_region(measure, m):
    """``nu({|z| > 1/m})``."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    return measure.mass_beyond(1.0 / m)


def region_mass(measure, region):
    if isinstance(region, Ball):
        return measure.mass_in_ball(np.asarray(region.center, dtype=float), region.radius)
    return measure.mass_annulus(region.lo, region.hi)


def sample_jump(measure, region, rng=None, size=None):
    """Draw from ``nu`` restricted to ``region`` and normalized.

    Returns one vector, or an array of ``size`` vectors.
    """
    rng = as_generator(rng)
    if not isinstance(region, (Ball, Annulus)):
        region = Annulus(region)
    mass = region_mass(measure, region)
    if not mass > 0:
        raise EmptyRegionError(f"region {region} has zero intensity mass")
    if not np.isfinite(mass):
        raise InfiniteMassError(f"region {region} has infinite intensity mass")
    n = 1 if size is None else int(size)
    if isinstance(region, Ball):
        out = measure.sample_in_ball(np.asarray(region.center, dtype=float), region.radius, n, rng)
    else:
        out = measure.sample_annulus(region.lo, region.hi, n, rng)
    return out[0] if size is None else out


def integrate_jump_map(measure, f, lo, hi):
    """``int_{lo<|z|<=hi} f(z) nu(dz)`` for a vector-valued ``f`` of ``(k, d)`` arrays.

    Exact for atoms, adaptive (vector) quadrature for radial pieces, the
    measure's own quadrature rule otherwise.
    """
    d = measure.dim
    if not hi > lo:
        return None
    if isinstance(measure, Atomic):
        nodes, w = measure.annulus_rule(lo, hi)
        if w.size == 0:
            return None
        return w @ np.asarray(f(nodes), dtype=float).reshape(len(w), -1)
    if isinstance(measure, RadialPolar):
        b = min(hi, measure.tempering.radius)
        if not b > lo:
            return None
        if lo <= 0 or not np.isfinite(b):
            raise InfiniteMassError("jump-map integral needs a bounded annulus away from 0")
        total = None
        for u, w in zip(measure.directions, measure.weights):
            def g(r, u=u):
                z = (r * u)[None, :]
                return np.asarray(f(z), dtype=float).reshape(-1) * measure.tempering(r) * r ** (-1.0 - measure.alpha)

            val, err = integrate.quad_vec(g, lo, b, epsabs=1e-13, epsrel=1e-10)
            if not np.all(np.isfinite(val)) or err > QUAD_RTOL * max(np.abs(val).max(), 1e-10):
                raise QuadratureError(f"jump-map integral did not converge (err {err:.2e})")
            total = w * val if total is None else total + w * val
        return total
    if isinstance(measure, Product):
        total = None
        for i, coord in enumerate(measure.coords):
            beta = measure.scales[i]

            def fi(t, i=i, beta=beta):
                z = np.zeros((t.shape[0], d))
                z[:, i] = beta * t[:, 0]
                return f(z)

            val = integrate_jump_map(coord, fi, lo / abs(beta), hi / abs(beta))
            if val is not None:
                total = val if total is None else total + val
        return total
    nodes, w = measure.annulus_rule(lo, hi)
    if w.size == 0:
        return None
    return w @ np.asarray(f(nodes), dtype=float).reshape(len(w), -1)


def compensator_drift(measure, sigma, x, m, lower=None):
    """``int_{1/m < |z| <= 1} sigma(x, z) nu(dz)``.

    ``sigma=None`` means additive noise (``sigma(x, z) = z``), handled with
    the exact first moment.  ``lower`` overrides the inner radius ``1/m``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lo = 1.0 / m if lower is None else lower
    if lo >= 1.0:
        return np.zeros(measure.dim)
    if sigma is None:
        return np.asarray(measure.first_moment(lo, 1.0), dtype=float).reshape(measure.dim)
    val = integrate_jump_map(measure, lambda z: sigma(np.broadcast_to(x, z.shape), z), lo, 1.0)
    return np.zeros(measure.dim) if val is None else val.reshape(measure.dim)
