"""Single-path integration, truncation and stopping times."""

import io
from dataclasses import dataclass, field

import numpy as np

from ..errors import DivergenceError
from ..levy import NoiseRealization
from . import engine

CSV_SCHEMA = "levyreach-path v1"


@dataclass
class PathRecord:
    """Skeleton of one simulated trajectory.

    Rows are the grid times and the jump times; a jump contributes a
    pre-jump row (flag 0) followed by a post-jump row (flag 1) at the same
    time.  ``compensator[k]`` is the compensator integral ``h * C(x)`` over
    the Euler piece ending at row ``k``.
    """

    times: np.ndarray
    states: np.ndarray
    jump_flag: np.ndarray
    compensator: np.ndarray
    jumps: list
    dropped: list
    dt: float
    cutoff: float
    mode: str
    seed: object = None
    truncation: int = None
    model: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def final(self):
        return self.states[-1]

    @property
    def horizon(self):
        return float(self.times[-1])

    def jump_consistency(self, model):
        """True when every recorded jump satisfies ``post == pre + sigma(pre, mark)`` bitwise."""
        for j in self.jumps:
            post = j["pre"] + model.jump(j["pre"], j["mark"])
            if not np.array_equal(post, j["post"]):
                return False
        return True

    def before(self, t):
        """Rows strictly before time ``t``."""
        keep = self.times < t
        return self.times[keep], self.states[keep]

    def to_csv(self, target=None):
        """Columnar export: ``time, x1..xd, jump``; returns the text when ``target`` is None."""
        d = self.states.shape[1]
        buf = io.StringIO()
        buf.write(f"# {CSV_SCHEMA}\n")
        buf.write(",".join(["time"] + [f"x{i + 1}" for i in range(d)] + ["jump"]) + "\n")
        for t, x, f in zip(self.times, self.states, self.jump_flag):
            buf.write(",".join([repr(float(t))] + [repr(float(v)) for v in x] + [str(int(f))]) + "\n")
        text = buf.getvalue()
        if target is None:
            return text
        if hasattr(target, "write"):
            target.write(text)
        else:
            with open(target, "w") as fh:
                fh.write(text)
        return text


def _gaussian(noise, rng_seed=None):
    if noise.gaussian_cov is None:
        return None
    cov = np.atleast_2d(noise.gaussian_cov)
    # small-jump covariances can be rank deficient; eigen-factor instead of Cholesky
    w, v = np.linalg.eigh(cov)
    chol = v * np.sqrt(np.clip(w, 0.0, None))
    seed = noise.gaussian_seed if rng_seed is None else rng_seed
    return chol, np.random.default_rng(seed)


def _integrate(model, x0, noise, dt, T, measure, drop_mask, truncation):
    T = noise.horizon if T is None else float(T)
    if T > noise.horizon + 1e-15:
        raise ValueError("noise horizon does not cover the requested interval")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float)).reshape(1, model.dim)
    keep = noise.times <= T
    times, marks = noise.times[keep], noise.marks[keep]
    applied = ~drop_mask[keep]
    comp = model.compensator(noise.cutoff, measure)
    res = engine.run(model, x0, T, dt, times, marks, None, applied, comp,
                     gaussian=_gaussian(noise), record=True)
    if res.diverged[0]:
        raise DivergenceError(res.divergence_time[0])
    r = res.record
    return PathRecord(
        times=np.array(r["times"]), states=np.array(r["states"]), jump_flag=np.array(r["flags"]),
        compensator=np.array(r["comp"]), jumps=r["jumps"], dropped=r["dropped"], dt=float(dt),
        cutoff=noise.cutoff, mode=noise.mode, seed=noise.seed, truncation=truncation, model=model.name,
    )


def integrate(model, x0, noise: NoiseRealization, dt, T=None, measure=None):
    """Jump-adapted Euler path of the full equation driven by ``noise``.

    In the default small-jump mode the compensator of ``cutoff < |z| <= 1``
    enters the drift; ``measure`` defaults to ``model.measure``.
    """
    return _integrate(model, x0, noise, dt, T, measure, np.zeros(noise.n_jumps, dtype=bool), None)


def integrate_truncated(model, x0, noise: NoiseRealization, dt, m, T=None, measure=None):
    """Path of the truncated equation: jumps with ``|z| > 1/m`` are removed.

    The drift is the same as for the full equation (the compensator over
    ``Z_m \\ Z_1`` stays), so the two paths agree until the first removed jump.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    big = np.linalg.norm(noise.marks, axis=1) > 1.0 / m if noise.n_jumps else np.zeros(0, dtype=bool)
    return _integrate(model, x0, noise, dt, T, measure, big, int(m))


def first_jump_time(noise, m, i=1):
    """Time of the ``i``-th jump with ``|z| > 1/m``; ``None`` if there are fewer."""
    if m < 1 or i < 1:
        raise ValueError("need m >= 1 and i >= 1")
    if noise.n_jumps == 0:
        return None
    t = noise.times[np.linalg.norm(noise.marks, axis=1) > 1.0 / m]
    return float(t[i - 1]) if t.size >= i else None


def exit_time(path: PathRecord, center, radius):
    """First skeleton time with the state outside the open ball ``B(center, radius)``."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    c = np.asarray(center, dtype=float)
    out = np.linalg.norm(path.states - c, axis=1) >= radius
    idx = np.flatnonzero(out)
    return float(path.times[idx[0]]) if idx.size else None


__all__ = ["PathRecord", "integrate", "integrate_truncated", "first_jump_time", "exit_time"]
