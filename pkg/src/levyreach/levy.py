"""Sampling of pure-jump Lévy noise.

A :class:`NoiseRealization` holds the jumps of the driving Poisson random
measure above a cutoff ``delta`` on ``(0, T]``.  Jumps at or below the
cutoff are either dropped (their compensator goes into the drift, which is
what the SDE engine does by default) or replaced by a Brownian term with
the matching covariance.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from ._rng import as_generator
from .errors import InfiniteMassError
from .measures import Atomic, GaussianBase, Subordinated

DEFAULT_CUTOFF = 1e-3
DROP = "drop-with-compensator"
GAUSSIAN = "gaussian-approximation"
MODES = (DROP, GAUSSIAN)


def _mode(mode):
    aliases = {"drop": DROP, "gaussian": GAUSSIAN}
    mode = aliases.get(mode, mode)
    if mode not in MODES:
        raise ValueError(f"small-jump mode must be one of {MODES}")
    return mode


def annulus_index(marks):
    """Smallest ``m`` with ``|z| > 1/m`` for each mark."""
    norms = np.linalg.norm(np.atleast_2d(marks), axis=1)
    return (np.floor(1.0 / norms) + 1).astype(np.int64)


@dataclass
class NoiseRealization:
    """Jumps above the cutoff on ``(0, horizon]``.

    ``gaussian_cov`` (per unit time) is set in gaussian-approximation mode
    and for subordinated noise with a Brownian drift part; the engine draws
    its increments from ``gaussian_seed``.
    """

    horizon: float
    times: np.ndarray
    marks: np.ndarray
    cutoff: float
    mode: str = DROP
    seed: object = None
    gaussian_cov: np.ndarray = None
    gaussian_seed: int = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float).reshape(-1)
        marks = np.asarray(self.marks, dtype=float)
        self.marks = marks.reshape(self.times.size, marks.shape[-1] if marks.ndim > 1 else -1)

    @property
    def dim(self):
        return self.marks.shape[1]

    @property
    def n_jumps(self):
        return self.times.size

    @property
    def annulus(self):
        return annulus_index(self.marks) if self.n_jumps else np.empty(0, dtype=np.int64)

    @property
    def big_jumps(self):
        return list(zip(self.times.tolist(), self.marks.tolist(), self.annulus.tolist()))

    def restrict(self, cutoff):
        """Thin to the jumps with norm above a larger cutoff."""
        if cutoff < self.cutoff:
            raise ValueError("thinning can only raise the cutoff")
        keep = np.linalg.norm(self.marks, axis=1) > cutoff
        return NoiseRealization(self.horizon, self.times[keep], self.marks[keep], cutoff,
                                self.mode, self.seed, self.gaussian_cov, self.gaussian_seed, dict(self.meta))

    def until(self, t):
        keep = self.times <= t
        return NoiseRealization(min(t, self.horizon), self.times[keep], self.marks[keep], self.cutoff,
                                self.mode, self.seed, self.gaussian_cov, self.gaussian_seed, dict(self.meta))

    def to_dict(self):
        return {
            "horizon": self.horizon,
            "cutoff": self.cutoff,
            "mode": self.mode,
            "seed": self.seed,
            "dim": self.dim,
            "jumps": [{"time": t, "mark": z, "annulus": int(m)} for t, z, m in self.big_jumps],
            "gaussian_cov": None if self.gaussian_cov is None else np.asarray(self.gaussian_cov).tolist(),
            "gaussian_seed": self.gaussian_seed,
            "meta": self.meta,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d):
        dim = int(d["dim"])
        times = [j["time"] for j in d["jumps"]]
        marks = np.array([j["mark"] for j in d["jumps"]], dtype=float).reshape(len(times), dim)
        cov = d.get("gaussian_cov")
        return cls(float(d["horizon"]), np.array(times, dtype=float), marks, float(d["cutoff"]),
                   d.get("mode", DROP), d.get("seed"), None if cov is None else np.array(cov),
                   d.get("gaussian_seed"), dict(d.get("meta", {})))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def empty_noise(dim, T=0.0, cutoff=DEFAULT_CUTOFF):
    return NoiseRealization(float(T), np.empty(0), np.empty((0, dim)), cutoff)


def super_cutoff_mass(measure, cutoff):
    mass = measure.mass_beyond(cutoff)
    if not np.isfinite(mass):
        raise InfiniteMassError(
            f"intensity above cutoff {cutoff:g} is infinite; choose a larger cutoff")
    return mass


def _uniform_times(T, k, rng):
    # (0, T] rather than [0, T)
    return np.sort(T * (1.0 - rng.random(k)))


def sample_noise(measure, T, cutoff=DEFAULT_CUTOFF, mode=DROP, rng=None):
    """One realization of the jumps of norm ``> cutoff`` on ``(0, T]``.

    The count is Poisson with mean ``T * nu(|z| > cutoff)``, times are
    sorted uniforms and marks are i.i.d. from the normalized restriction.
    """
    mode = _mode(mode)
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = as_generator(rng)
    d = measure.dim
    if T <= 0:
        return NoiseRealization(0.0, np.empty(0), np.empty((0, d)), cutoff, mode, seed)
    mass = super_cutoff_mass(measure, cutoff)
    k = rng.poisson(T * mass) if mass > 0 else 0
    times = _uniform_times(T, k, rng)
    marks = measure.sample_annulus(cutoff, np.inf, k, rng) if k else np.empty((0, d))
    out = NoiseRealization(float(T), times, marks, cutoff, mode, seed)
    if mode == GAUSSIAN:
        out.gaussian_cov = np.asarray(measure.second_moment(0.0, cutoff), dtype=float).reshape(d, d)
        out.gaussian_seed = int(rng.integers(2**63))
    return out


@dataclass
class NoiseBatch:
    """Jumps of ``n`` independent realizations in flat, path-sorted arrays.

    Path ``p`` owns ``times[offsets[p]:offsets[p+1]]`` (sorted) and the
    corresponding rows of ``marks``.
    """

    horizon: float
    counts: np.ndarray
    times: np.ndarray
    marks: np.ndarray
    cutoff: float

    @property
    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.counts)])

    @property
    def path_index(self):
        return np.repeat(np.arange(self.counts.size), self.counts)

    def realization(self, p):
        o = self.offsets
        return NoiseRealization(self.horizon, self.times[o[p]:o[p + 1]], self.marks[o[p]:o[p + 1]], self.cutoff)

    def restrict(self, cutoff):
        keep = np.linalg.norm(self.marks, axis=1) > cutoff
        counts = np.bincount(self.path_index[keep], minlength=self.counts.size)
        return NoiseBatch(self.horizon, counts, self.times[keep], self.marks[keep], cutoff)


def sample_noise_batch(measure, T, cutoff, n, rng):
    """``n`` realizations drawn in one vectorized pass (same law as :func:`sample_noise`)."""
    rng = as_generator(rng)
    d = measure.dim
    mass = super_cutoff_mass(measure, cutoff) if T > 0 else 0.0
    counts = rng.poisson(T * mass, size=n) if mass > 0 else np.zeros(n, dtype=np.int64)
    total = int(counts.sum())
    u = T * (1.0 - rng.random(total))
    path = np.repeat(np.arange(n), counts)
    order = np.lexsort((u, path))
    times = u[order]
    marks = measure.sample_annulus(cutoff, np.inf, total, rng) if total else np.empty((0, d))
    return NoiseBatch(float(T), counts.astype(np.int64), times, marks, cutoff)


def sample_stable_1d(alpha, skew=0.0, rng=None, size=None):
    """Standard alpha-stable variates (Chambers–Mallows–Stuck).

    Parametrization ``S_alpha(1, skew, 0)`` in the Samorodnitsky–Taqqu
    sense: characteristic exponent ``-|t|^alpha (1 - i skew sgn(t) tan(pi alpha/2))``
    for ``alpha != 1``.  ``alpha < 1`` with ``skew = 1`` is supported on
    ``(0, inf)``.
    """
    if not 0 < alpha <= 2:
        raise ValueError("alpha must lie in (0, 2]")
    if not -1 <= skew <= 1:
        raise ValueError("skew must lie in [-1, 1]")
    rng = as_generator(rng)
    n = 1 if size is None else size
    v = np.pi * (rng.random(n) - 0.5)
    w = rng.standard_exponential(n)
    if alpha == 1:
        h = np.pi / 2 + skew * v
        x = (2 / np.pi) * (h * np.tan(v) - skew * np.log((np.pi / 2) * w * np.cos(v) / h))
    else:
        t = skew * np.tan(np.pi * alpha / 2)
        b = np.arctan(t) / alpha
        s = (1 + t * t) ** (1 / (2 * alpha))
        x = (s * np.sin(alpha * (v + b)) / np.cos(v) ** (1 / alpha)
             * (np.cos(v - alpha * (v + b)) / w) ** ((1 - alpha) / alpha))
    return float(x[0]) if size is None else x


def sample_subordinated_path(base, subordinator, T, cutoff=DEFAULT_CUTOFF, drift=0.0, rng=None):
    """Jumps above ``cutoff`` of the subordinated process ``X(Z(t))``.

    ``base`` is a :class:`GaussianBase` or an atomic ``Product`` measure.
    A positive subordinator drift with a Gaussian base contributes a
    continuous Brownian part, carried as ``gaussian_cov``.
    """
    measure = base if isinstance(base, Subordinated) else Subordinated(base, subordinator, drift)
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = as_generator(rng)
    noise = sample_noise(measure, T, cutoff, DROP, rng)
    noise.seed = seed
    if isinstance(measure.base, GaussianBase) and measure.drift > 0 and T > 0:
        noise.gaussian_cov = measure.drift * measure.base.cov
        noise.gaussian_seed = int(rng.integers(2**63))
    noise.meta["subordinated"] = True
    return noise


def exact_cp_counts(measure: Atomic, T, n, rng):
    """Per-atom Poisson jump counts of a compound-Poisson measure, shape ``(n, J)``."""
    rng = as_generator(rng)
    return rng.poisson(T * measure.rates, size=(n, measure.rates.size))
