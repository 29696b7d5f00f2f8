import numpy as np

from ..errors import EmptyRegionError
from ._base import IntensityMeasure


class Product(IntensityMeasure):
    """Intensity of ``L = sum_i beta_i L_i e_i`` with independent 1-D ``L_i``.

    Jumps of distinct coordinates never coincide, so the measure lives on the
    coordinate axes: ``nu = sum_i (x -> beta_i x e_i)_# nu_i``.
    """

    kind = "product"

    def __init__(self, per_coordinate, scales=None):
        coords = list(per_coordinate)
        if not coords or any(m.dim != 1 for m in coords):
            raise ValueError("per_coordinate must be a non-empty list of 1-D measures")
        beta = np.ones(len(coords)) if scales is None else np.asarray(scales, dtype=float).reshape(-1)
        if beta.shape[0] != len(coords) or np.any(beta == 0):
            raise ValueError("need one nonzero scale per coordinate")
        beta.setflags(write=False)
        self.coords = coords
        self.scales = beta
        self.dim = len(coords)

    def __repr__(self):
        return f"Product(coords={self.coords!r}, scales={self.scales.tolist()})"

    def _abs(self, i):
        return abs(self.scales[i])

    def mass_annulus(self, lo, hi=np.inf):
        return float(sum(m.mass_annulus(lo / self._abs(i), hi / self._abs(i))
                         for i, m in enumerate(self.coords)))

    def coordinate_annulus_masses(self, lo, hi=np.inf):
        return np.array([m.mass_annulus(lo / self._abs(i), hi / self._abs(i))
                         for i, m in enumerate(self.coords)])

    def _axis_balls(self, center, radius):
        """Per-coordinate 1-D balls (in the unscaled variable) hit by ``B(center, radius)``."""
        c = np.broadcast_to(np.asarray(center, dtype=float), (self.dim,))
        out = []
        total_sq = float(c @ c)
        for i in range(self.dim):
            off_axis = total_sq - c[i] ** 2
            disc = radius * radius - off_axis
            if disc <= 0:
                continue
            half = np.sqrt(disc)
            out.append((i, c[i] / self.scales[i], half / self._abs(i)))
        return out

    def mass_in_ball(self, center, radius):
        return float(sum(self.coords[i].mass_in_ball([c1], r1)
                         for i, c1, r1 in self._axis_balls(center, radius)))

    def _embed(self, i, x):
        z = np.zeros((x.shape[0], self.dim))
        z[:, i] = self.scales[i] * x[:, 0]
        return z

    def _mix(self, masses, draw, size, rng):
        masses = np.asarray(masses, dtype=float)
        if masses.sum() <= 0:
            raise EmptyRegionError("region carries no mass")
        pick = rng.choice(masses.size, size=size, p=masses / masses.sum())
        out = np.zeros((size, self.dim))
        for k in range(masses.size):
            sel = np.flatnonzero(pick == k)
            if sel.size:
                out[sel] = draw(k, sel.size)
        return out

    def sample_annulus(self, lo, hi, size, rng):
        masses = self.coordinate_annulus_masses(lo, hi)

        def draw(i, n):
            x = self.coords[i].sample_annulus(lo / self._abs(i), hi / self._abs(i), n, rng)
            return self._embed(i, x)

        return self._mix(masses, draw, size, rng)

    def sample_in_ball(self, center, radius, size, rng):
        balls = self._axis_balls(center, radius)
        masses = [self.coords[i].mass_in_ball([c1], r1) for i, c1, r1 in balls]

        def draw(k, n):
            i, c1, r1 = balls[k]
            return self._embed(i, self.coords[i].sample_in_ball([c1], r1, n, rng))

        return self._mix(masses, draw, size, rng)

    def first_moment(self, lo, hi):
        return np.array([self.scales[i] * m.first_moment(lo / self._abs(i), hi / self._abs(i))[0]
                         for i, m in enumerate(self.coords)])

    def second_moment(self, lo, hi):
        return np.diag([self.scales[i] ** 2 * m.second_moment(lo / self._abs(i), hi / self._abs(i))[0, 0]
                        for i, m in enumerate(self.coords)])

    def annulus_rule(self, lo, hi):
        nodes, weights = [], []
        for i, m in enumerate(self.coords):
            x, w = m.annulus_rule(lo / self._abs(i), hi / self._abs(i))
            if w.size:
                nodes.append(self._embed(i, x))
                weights.append(w)
        if not weights:
            return np.empty((0, self.dim)), np.empty(0)
        return np.vstack(nodes), np.concatenate(weights)

    def coordinate_integrability(self):
        """Per-coordinate ``int |beta_i x|^2 ^ 1 nu_i(dx)``."""
        out = []
        for i, m in enumerate(self.coords):
            b = self._abs(i)
            out.append(b * b * m.second_moment(0.0, 1.0 / b)[0, 0] + m.mass_annulus(1.0 / b, np.inf))
        return np.array(out)

    def ball_charged(self, center, radius):
        return any(self.coords[i].ball_charged([c1], r1) for i, c1, r1 in self._axis_balls(center, radius))

    def support_points(self, grid=64):
        pts = [self._embed(i, m.support_points(grid)) for i, m in enumerate(self.coords)]
        return np.vstack(pts)

    def describe_support(self):
        return {"axes": [m.describe_support() for m in self.coords], "scales": self.scales.tolist()}
