import numpy as np

from ..errors import EmptyRegionError
from ._base import IntensityMeasure


class Atomic(IntensityMeasure):
    """Finite sum of point masses ``sum_j rate_j * delta_{a_j}``.

    Parameters
    ----------
    locations : array_like, shape (k, d) or (k,)
        Atom locations; a 1-D sequence is read as ``k`` atoms in ``R^1``.
    rates : array_like, shape (k,)
        Positive intensities (1/time).
    """

    kind = "atomic"

    def __init__(self, locations, rates):
        loc = np.asarray(locations, dtype=float)
        if loc.ndim == 1:
            loc = loc[:, None]
        rates = np.asarray(rates, dtype=float).reshape(-1)
        if loc.ndim != 2 or loc.shape[0] != rates.shape[0] or loc.shape[0] == 0:
            raise ValueError("need one positive rate per atom and at least one atom")
        if np.any(rates <= 0) or not np.all(np.isfinite(rates)):
            raise ValueError("atom rates must be positive and finite")
        norms = np.linalg.norm(loc, axis=1)
        if np.any(norms <= 0):
            raise ValueError("atoms must not sit at the origin")
        loc.setflags(write=False)
        rates.setflags(write=False)
        norms.setflags(write=False)
        self.locations = loc
        self.rates = rates
        self.norms = norms
        self.dim = loc.shape[1]

    def __repr__(self):
        return f"Atomic(locations={self.locations.tolist()}, rates={self.rates.tolist()})"

    def _annulus_mask(self, lo, hi):
        return (self.norms > lo) & (self.norms <= hi)

    def _ball_mask(self, center, radius):
        c = np.broadcast_to(np.asarray(center, dtype=float), (self.dim,))
        return np.linalg.norm(self.locations - c, axis=1) < radius

    def mass_annulus(self, lo, hi=np.inf):
        return float(self.rates[self._annulus_mask(lo, hi)].sum())

    def mass_in_ball(self, center, radius):
        return float(self.rates[self._ball_mask(center, radius)].sum())

    def _draw(self, mask, size, rng):
        idx = np.flatnonzero(mask)
        if idx.size == 0:
            raise EmptyRegionError("region carries no atoms")
        p = self.rates[idx] / self.rates[idx].sum()
        pick = idx[rng.choice(idx.size, size=size, p=p)] if idx.size > 1 else np.full(size, idx[0])
        return self.locations[pick].copy()

    def sample_annulus(self, lo, hi, size, rng):
        return self._draw(self._annulus_mask(lo, hi), size, rng)

    def sample_in_ball(self, center, radius, size, rng):
        return self._draw(self._ball_mask(center, radius), size, rng)

    def first_moment(self, lo, hi):
        m = self._annulus_mask(lo, hi)
        return self.rates[m] @ self.locations[m]

    def second_moment(self, lo, hi):
        m = self._annulus_mask(lo, hi)
        a = self.locations[m]
        return (a * self.rates[m][:, None]).T @ a

    def annulus_rule(self, lo, hi):
        m = self._annulus_mask(lo, hi)
        return self.locations[m], self.rates[m]

    def ball_charged(self, center, radius):
        return bool(self._ball_mask(center, radius).any())

    def support_points(self, grid=64):
        return self.locations.copy()

    def describe_support(self):
        return {"atoms": self.locations.tolist()}
