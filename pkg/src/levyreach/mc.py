"""Monte Carlo estimators and exact compound-Poisson oracles.

Trials run in blocks of ``TRIAL_BLOCK``; block ``b`` draws from its own
seed stream, so counts are identical for any worker count.  Success counts
are integers and are reduced exactly.
"""

import itertools
import math
import multiprocessing as mp
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from ._rng import TRIAL_BLOCK, block_generator, derived_seed
from .errors import DivergenceError, LevyReachError
from .levy import DEFAULT_CUTOFF, GAUSSIAN, _mode, sample_noise_batch
from .measures import Atomic
from .sde import engine

CONFIDENCE = 0.99
DIVERGENCE_LIMIT = 0.01
CSV_SCHEMA = "levyreach-mc v1"
CSV_COLUMNS = ("experiment", "n", "k", "point", "lo", "hi", "seed", "wall_time")


def clopper_pearson(k, n, confidence=CONFIDENCE):
    """Exact two-sided binomial interval."""
    if not 0 <= k <= n or n < 1:
        raise ValueError("need 0 <= k <= n and n >= 1")
    a = 1.0 - confidence
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


@dataclass
class MCEstimate:
    trials: int
    successes: int
    confidence: float = CONFIDENCE
    seed: object = None
    runtime: float = 0.0
    diverged: int = 0
    label: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def point(self):
        return self.successes / self.trials

    @property
    def interval(self):
        return clopper_pearson(self.successes, self.trials, self.confidence)

    @property
    def lo(self):
        return self.interval[0]

    @property
    def hi(self):
        return self.interval[1]

    @property
    def stderr(self):
        p = self.point
        return math.sqrt(p * (1 - p) / self.trials)

    def to_dict(self):
        lo, hi = self.interval
        return {"experiment": self.label, "n": self.trials, "k": self.successes, "point": self.point,
                "lo": lo, "hi": hi, "confidence": self.confidence, "seed": self.seed,
                "diverged": self.diverged, "extra": self.extra}

    def csv_row(self):
        d = self.to_dict()
        return [self.label, self.trials, self.successes, repr(d["point"]), repr(d["lo"]), repr(d["hi"]),
                self.seed, f"{self.runtime:.3f}"]


def write_csv(estimates, target):
    lines = [f"# {CSV_SCHEMA}", ",".join(CSV_COLUMNS)]
    lines += [",".join(str(v) for v in e.csv_row()) for e in estimates]
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w") as fh:
            fh.write(text)
    return text


def suggest_trials(p, confidence=CONFIDENCE):
    """Trials needed so that at least one success occurs with probability ``confidence``."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    return int(math.ceil(math.log1p(-confidence) / math.log1p(-p)))


# --------------------------------------------------------------------------
# block driver
# --------------------------------------------------------------------------

_WORK = None


def _call(args):
    b, size = args
    return _WORK(b, size)


def run_blocks(n, work, workers=1):
    """Sum the integer tuples ``work(block, size)`` over all blocks of ``n`` trials."""
    global _WORK
    blocks = [(b, min(TRIAL_BLOCK, n - b * TRIAL_BLOCK)) for b in range(-(-n // TRIAL_BLOCK))]
    if workers is None:
        workers = mp.cpu_count()
    if workers > 1 and len(blocks) > 1 and "fork" in mp.get_all_start_methods():
        _WORK = work
        try:
            with mp.get_context("fork").Pool(min(workers, len(blocks))) as pool:
                parts = pool.map(_call, blocks, chunksize=1)
        finally:
            _WORK = None
    else:
        parts = [work(b, s) for b, s in blocks]
    return tuple(int(sum(p[i] for p in parts)) for i in range(len(parts[0])))


def _check_divergence(div, n):
    if div > DIVERGENCE_LIMIT * n:
        raise DivergenceError(float("nan"), f"{div} of {n} paths diverged (limit {DIVERGENCE_LIMIT:.0%})")


def simulate_block(model, x0, T, dt, size, rng, cutoff=DEFAULT_CUTOFF, mode="drop", measure=None,
                   truncation=None, exit_ball=None):
    """Integrate ``size`` independent paths; returns the engine result."""
    measure = model.measure if measure is None else measure
    mode = _mode(mode)
    d = model.dim
    x0 = np.broadcast_to(np.asarray(x0, dtype=float).reshape(-1, d), (size, d))
    if measure is None or T <= 0:
        return engine.run(model, x0, T, dt, exit_ball=exit_ball)
    batch = sample_noise_batch(measure, T, cutoff, size, rng)
    applied = None
    if truncation is not None:
        applied = ~(np.linalg.norm(batch.marks, axis=1) > 1.0 / truncation)
    gaussian = None
    if mode == GAUSSIAN:
        cov = np.asarray(measure.second_moment(0.0, cutoff), dtype=float).reshape(d, d)
        w, v = np.linalg.eigh(cov)
        gaussian = (v * np.sqrt(np.clip(w, 0, None)), np.random.default_rng(rng.integers(2**63)))
    return engine.run(model, x0, T, dt, batch.times, batch.marks, batch.path_index, applied,
                      model.compensator(cutoff, measure), gaussian, exit_ball)


def estimate_hitting(model, x0, T, y, kappa, n, dt=1e-2, cutoff=DEFAULT_CUTOFF, seed=0,
                     confidence=CONFIDENCE, workers=1, mode="drop", measure=None, label="hitting"):
    """``P(|X^x0(T) - y| < kappa)`` from ``n`` independent paths (terminal state only)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    t0 = time.perf_counter()

    def work(b, size):
        res = simulate_block(model, x0, T, dt, size, block_generator(seed, b), cutoff, mode, measure)
        ok = ~res.diverged & (np.linalg.norm(res.x - y, axis=1) < kappa)
        return int(ok.sum()), int(res.diverged.sum())

    k, div = run_blocks(n, work, workers)
    _check_divergence(div, n)
    return MCEstimate(n, k, confidence, seed, time.perf_counter() - t0, div, label,
                      {"T": T, "dt": dt, "cutoff": cutoff, "target": y.tolist(), "kappa": kappa})


def estimate_levy_support(measure, s, h, eps, n, cutoff=DEFAULT_CUTOFF, seed=0, confidence=CONFIDENCE,
                          workers=1, compensated=None, label="levy-support"):
    """``P(L(s) in B(h, eps))`` for the Lévy process with intensity ``measure``.

    For finite activity ``L(s)`` is the plain compound-Poisson sum of jumps
    (``compensated=False``); otherwise the jumps above ``cutoff`` are
    summed and their compensator over ``cutoff < |z| <= 1`` removed.
    """
    h = np.atleast_1d(np.asarray(h, dtype=float))
    d = measure.dim
    if compensated is None:
        compensated = not measure.finite_activity
    comp = np.zeros(d)
    if compensated and cutoff < 1:
        comp = np.asarray(measure.first_moment(cutoff, 1.0), dtype=float).reshape(d) * s
    t0 = time.perf_counter()

    def work(b, size):
        batch = sample_noise_batch(measure, s, cutoff, size, block_generator(seed, b))
        tot = np.zeros((size, d))
        if batch.marks.shape[0]:
            np.add.at(tot, batch.path_index, batch.marks)
        ok = np.linalg.norm(tot - comp - h, axis=1) < eps
        return (int(ok.sum()),)

    (k,) = run_blocks(n, work, workers)
    return MCEstimate(n, k, confidence, seed, time.perf_counter() - t0, 0, label,
                      {"s": s, "cutoff": cutoff, "target": h.tolist(), "eps": eps, "compensated": compensated})


def estimate_stay_in_ball(model, h, eta, t, probe_eps, n_initials, n_paths, dt=1e-2, cutoff=DEFAULT_CUTOFF,
                          seed=0, confidence=CONFIDENCE, mode="drop", label="stay-in-ball"):
    """Worst case over probe starts of ``P(exit time from B(h, eta) >= t)``.

    Probes: the ``2d`` points ``h ± probe_eps e_k`` (pulled inside by a
    relative ``1e-12``), then uniform points of ``B(h, probe_eps)`` up to
    ``n_initials`` in total.
    """
    h = np.atleast_1d(np.asarray(h, dtype=float))
    if probe_eps > eta / 2:
        raise ValueError("probe radius must be at most eta/2")
    d = h.size
    edge = probe_eps * (1 - 1e-12)
    probes = [h + edge * s * e for e in np.eye(d) for s in (1.0, -1.0)]
    rng = np.random.default_rng(derived_seed(seed, 0))
    extra = max(0, n_initials - len(probes))
    if extra:
        g = rng.standard_normal((extra, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        probes += list(h + g * (probe_eps * rng.random(extra) ** (1 / d))[:, None])
    probes = np.array(probes[:max(n_initials, 1)])
    t0 = time.perf_counter()
    results = []
    for j, x0 in enumerate(probes):
        sj = derived_seed(seed, 1, j)

        def work(b, size, x0=x0, sj=sj):
            res = simulate_block(model, x0, t, dt, size, block_generator(sj, b), cutoff, mode,
                                 exit_ball=(h, eta))
            stay = ~res.diverged & (np.isnan(res.exit_time) | (res.exit_time >= t))
            return int(stay.sum()), int(res.diverged.sum())

        k, div = run_blocks(n_paths, work)
        _check_divergence(div, n_paths)
        results.append(MCEstimate(n_paths, k, confidence, sj, 0.0, div, f"{label}[{j}]", {"start": x0.tolist()}))
    worst = min(results, key=lambda e: (e.point, e.lo))
    return MCEstimate(worst.trials, worst.successes, confidence, seed, time.perf_counter() - t0, worst.diverged,
                      label, {"worst_start": worst.extra["start"],
                              "probes": [(e.extra["start"], e.successes) for e in results]})


def check_e_property(model, x, y, T, n, dt=1e-2, cutoff=DEFAULT_CUTOFF, seed=0, slack=0.05, workers=1):
    """Sample mean of ``|X^x(T) - X^y(T)|^2`` on common noise against ``|x - y|^2``.

    Passes iff ``mean <= |x - y|^2 (1 + slack)``; ``mean + 3 se`` is reported
    alongside.
    """
    if not ({"monotone-drift", "additive"} <= model.tags):
        raise ValueError("the e-property check needs a model tagged monotone-drift and additive")
    d = model.dim
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    bound = float(np.sum((x - y) ** 2))
    measure = model.measure

    def work(b, size):
        rng = block_generator(seed, b)
        x0 = np.vstack([np.broadcast_to(x, (size, d)), np.broadcast_to(y, (size, d))])
        if measure is None:
            res = engine.run(model, x0, T, dt)
        else:
            batch = sample_noise_batch(measure, T, cutoff, size, rng)
            times = np.r_[batch.times, batch.times]
            marks = np.vstack([batch.marks, batch.marks])
            path = np.r_[batch.path_index, batch.path_index + size]
            res = engine.run(model, x0, T, dt, times, marks, path, None, model.compensator(cutoff, measure))
        diff = np.sum((res.x[:size] - res.x[size:]) ** 2, axis=1)
        div = res.diverged[:size] | res.diverged[size:]
        diff = diff[~div]
        # float sums are order dependent; keep exact per-block totals as Fractions
        return diff.size, Fraction(math.fsum(diff)), Fraction(math.fsum(diff * diff)), int(div.sum())

    blocks = [(b, min(TRIAL_BLOCK, n - b * TRIAL_BLOCK)) for b in range(-(-n // TRIAL_BLOCK))]
    parts = [work(b, s) for b, s in blocks]
    m = sum(p[0] for p in parts)
    div = sum(p[3] for p in parts)
    _check_divergence(div, n)
    s1 = float(sum(p[1] for p in parts))
    s2 = float(sum(p[2] for p in parts))
    mean = s1 / m
    var = max(s2 / m - mean * mean, 0.0) * m / max(m - 1, 1)
    se = math.sqrt(var / m)
    return {"mean": mean, "stderr": se, "mean_plus_3se": mean + 3 * se, "bound": bound,
            "threshold": bound * (1 + slack), "margin": bound * (1 + slack) - mean,
            "passed": bool(mean <= bound * (1 + slack)), "n": m, "diverged": div,
            "x": x.tolist(), "y": y.tolist(), "T": T, "dt": dt, "seed": seed}


# --------------------------------------------------------------------------
# exact oracle
# --------------------------------------------------------------------------

@dataclass
class OracleResult:
    value: float
    tail_bound: float
    truncation: int
    terms: list

    def to_dict(self):
        return {"value": self.value, "tail_bound": self.tail_bound, "truncation": self.truncation,
                "top_terms": [{"multiplicities": list(m), "probability": p} for m, p in self.terms[:10]]}


MAX_ORACLE_TERMS = 5_000_000


def _compositions(J, total_max):
    """All multiplicity vectors of length ``J`` with sum ``<= total_max``."""
    for tot in range(total_max + 1):
        for bars in itertools.combinations(range(tot + J - 1), J - 1):
            prev, m = -1, []
            for b in bars:
                m.append(b - prev - 1)
                prev = b
            m.append(tot + J - 1 - prev - 1)
            yield tuple(m)


def exact_cp_hitting_oracle(measure: Atomic, T, y, kappa, truncation=40, accuracy=1e-12):
    """``P(sum_j M_j a_j in B(y, kappa))`` for independent ``M_j ~ Poisson(T rate_j)``.

    This is the law of a drift-free compound-Poisson process at time ``T``.
    Multi-indices with total count above ``truncation`` are dropped; their
    probability is at most the Poisson(``T * sum(rates)``) tail, reported as
    ``tail_bound``.  Ball membership is decided in exact rational arithmetic.
    """
    if not isinstance(measure, Atomic):
        raise TypeError("the exact oracle needs an atomic measure")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    lam = T * measure.rates
    tail = float(stats.poisson.sf(truncation, lam.sum()))
    if tail > accuracy:
        raise LevyReachError(f"truncation {truncation} leaves tail mass {tail:.3g} > {accuracy:g}; increase it")
    J = lam.size
    if math.comb(truncation + J, J) > MAX_ORACLE_TERMS:
        raise LevyReachError("too many multi-indices for the exact oracle; reduce atoms or truncation")
    locs = [[Fraction(float(v)) for v in row] for row in measure.locations]
    yf = [Fraction(float(v)) for v in y]
    k2 = Fraction(float(kappa)) ** 2
    logp = [stats.poisson.logpmf(np.arange(truncation + 1), l) for l in lam]
    terms = []
    for m in _compositions(J, truncation):
        pt = [sum((mj * locs[j][c] for j, mj in enumerate(m) if mj), Fraction(0)) for c in range(len(yf))]
        if sum((a - b) ** 2 for a, b in zip(pt, yf)) < k2:
            terms.append((m, math.exp(sum(logp[j][mj] for j, mj in enumerate(m)))))
    terms.sort(key=lambda t: -t[1])
    value = math.fsum(p for _, p in terms)
    return OracleResult(value, tail, truncation, terms)
