"""Jump-adapted explicit Euler scheme, vectorized over independent paths.

Grid: the union of ``{k*dt} ∩ [0, T]`` (``T`` appended) and every jump time.
Between consecutive grid points the state follows one Euler step of the
effective drift ``A(x) - C(x)``, where ``C`` is the compensator of the
jumps in ``cutoff < |z| <= 1``.  Jumps are applied exactly at their times.
A jump can also be *dropped* (truncated equation): its time still splits
the Euler step, so a truncated run and a full run on common noise perform
identical floating-point operations until the first dropped jump.
"""

from dataclasses import dataclass, field

import numpy as np

DIVERGENCE_GUARD = 1e12


def time_grid(T, dt):
    if not dt > 0:
        raise ValueError("dt must be positive")
    if T <= 0:
        return np.array([0.0])
    K = max(1, int(np.ceil(T / dt - 1e-9)))
    g = np.minimum(np.arange(K + 1) * dt, T)
    g[-1] = T
    return g


@dataclass
class EngineResult:
    x: np.ndarray
    diverged: np.ndarray
    divergence_time: np.ndarray
    exit_time: np.ndarray = None
    record: dict = field(default=None)


def _event_groups(grid, n, times, path, K):
    """Order jumps by (grid step, rank within the step for its path, path)."""
    if times.size == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), np.array([0])
    step = np.searchsorted(grid, times, side="left") - 1
    step = np.clip(step, 0, K - 1)
    o = np.lexsort((times, path, step))
    key = step[o] * n + path[o]
    first = np.r_[True, key[1:] != key[:-1]]
    start = np.maximum.accumulate(np.where(first, np.arange(key.size), 0))
    rank = np.empty(times.size, dtype=np.int64)
    rank[o] = np.arange(key.size) - start
    order = np.lexsort((path, rank, step))
    gkey = step[order] * (rank.max() + 1) + rank[order]
    bounds = np.r_[0, np.flatnonzero(gkey[1:] != gkey[:-1]) + 1, order.size]
    return order, step[order][bounds[:-1]], bounds


def run(model, x0, T, dt, times=None, marks=None, path=None, applied=None, compensator=None,
        gaussian=None, exit_ball=None, record=False, guard=DIVERGENCE_GUARD):
    """Integrate ``n`` paths over ``[0, T]``.

    Parameters
    ----------
    x0 : array (n, d) or (d,)
        Initial states.
    times, marks, path : arrays
        Flat jump table; ``path[j]`` owns jump ``j``.  Times must lie in ``(0, T]``.
    applied : bool array, optional
        ``False`` entries are split points only (dropped jumps).
    compensator : callable, optional
        Batched ``C(X)``; zero when omitted.
    gaussian : (chol, Generator), optional
        Brownian small-jump surrogate with per-unit-time covariance ``chol @ chol.T``.
    exit_ball : (center, radius), optional
        Records the first skeleton time at which ``|X - center| >= radius``.
    record : bool
        Keep the full skeleton (single path only).
    """
    d = model.dim
    X = np.array(np.broadcast_to(np.asarray(x0, dtype=float), (np.atleast_2d(x0).shape[0], d)))
    n = X.shape[0]
    if record and n != 1:
        raise ValueError("recording is supported for a single path")
    grid = time_grid(T, dt)
    K = grid.size - 1
    times = np.empty(0) if times is None else np.asarray(times, dtype=float)
    marks = np.empty((0, d)) if marks is None else np.asarray(marks, dtype=float).reshape(-1, d)
    path = np.zeros(times.size, dtype=np.int64) if path is None else np.asarray(path, dtype=np.int64)
    applied = np.ones(times.size, dtype=bool) if applied is None else np.asarray(applied, dtype=bool)
    if times.size and (times.min() <= 0 or times.max() > T):
        raise ValueError("jump times must lie in (0, T]")
    order, gstep, bounds = _event_groups(grid, n, times, path, K)
    C = compensator if compensator is not None else (lambda Y: np.zeros_like(Y))
    drift, sigma = model.drift, model.sigma
    additive = model.additive
    chol, grng = gaussian if gaussian is not None else (None, None)

    tau = np.zeros(n)
    div_t = np.full(n, np.nan)
    ex_t = None
    if exit_ball is not None:
        c, r = np.asarray(exit_ball[0], dtype=float), float(exit_ball[1])
        ex_t = np.full(n, np.nan)
        ex_t[np.linalg.norm(X - c, axis=1) >= r] = 0.0

    rec = None
    if record:
        rec = {"times": [0.0], "states": [X[0].copy()], "flags": [0], "comp": [np.zeros(d)],
               "jumps": [], "dropped": []}

    def euler(Y, h):
        c_val = C(Y)
        out = Y + h[:, None] * (drift(Y) - c_val)
        if chol is not None:
            inc = (grng.standard_normal(Y.shape) @ chol.T) * np.sqrt(h)[:, None]
            out = out + (inc if additive else sigma(Y, inc))
        return out, c_val

    def check(idx, Y, t):
        # whole-array extremes are cheap; NaN makes both comparisons fail
        if Y.size and not (Y.max() <= guard and Y.min() >= -guard):
            bad = ~np.isfinite(Y).all(axis=1) | (np.abs(Y).max(axis=1) > guard)
        else:
            bad = None
        if bad is not None and bad.any():
            newly = idx[bad & np.isnan(div_t[idx])]
            div_t[newly] = t if np.ndim(t) == 0 else t[bad & np.isnan(div_t[idx])]
        if ex_t is not None:
            out = np.linalg.norm(Y - c, axis=1) >= r
            sel = out & np.isnan(ex_t[idx])
            if sel.any():
                ex_t[idx[sel]] = t if np.ndim(t) == 0 else t[sel]

    g = 0
    all_idx = np.arange(n)
    with np.errstate(all="ignore"):
        for k in range(K):
            while g < gstep.size and gstep[g] == k:
                sel = order[bounds[g]:bounds[g + 1]]
                P = path[sel]
                tj = times[sel]
                h = tj - tau[P]
                Y, c_val = euler(X[P], h)
                check(P, Y, tj)
                app = applied[sel]
                if rec is not None:
                    rec["times"].append(float(tj[0]))
                    rec["states"].append(Y[0].copy())
                    rec["flags"].append(0)
                    rec["comp"].append(h[0] * c_val[0])
                if app.any():
                    pre = Y[app]
                    Y[app] = pre + sigma(pre, marks[sel][app])
                    check(P[app], Y[app], tj[app])
                if rec is not None:
                    if app[0]:
                        rec["jumps"].append({"time": float(tj[0]), "mark": marks[sel][0].copy(),
                                             "pre": pre[0].copy(), "post": Y[0].copy()})
                        rec["times"].append(float(tj[0]))
                        rec["states"].append(Y[0].copy())
                        rec["flags"].append(1)
                        rec["comp"].append(np.zeros(d))
                    else:
                        rec["dropped"].append({"time": float(tj[0]), "mark": marks[sel][0].copy()})
                X[P] = Y
                tau[P] = tj
                g += 1
            h = grid[k + 1] - tau
            X, c_val = euler(X, h)
            tau[:] = grid[k + 1]
            check(all_idx, X, grid[k + 1])
            if rec is not None:
                rec["times"].append(float(grid[k + 1]))
                rec["states"].append(X[0].copy())
                rec["flags"].append(0)
                rec["comp"].append(h[0] * c_val[0])
    return EngineResult(X, ~np.isnan(div_t), div_t, ex_t, rec)
