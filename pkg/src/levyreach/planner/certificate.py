"""Jump-chain reachability certificates."""

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


def smallest_m(l, eps):
    """Smallest integer ``m`` with ``min_i(|l_i| - eps_i) > 1/m`` (1 for an empty chain)."""
    if len(eps) == 0:
        return 1
    gap = float(np.min(np.linalg.norm(np.atleast_2d(l), axis=1) - np.asarray(eps)))
    if not gap > 0:
        raise ValueError("a mark ball touches the origin")
    m = int(np.floor(1.0 / gap)) + 1
    while not gap > 1.0 / m:  # guard against rounding in 1/gap
        m += 1
    return m


@dataclass
class Infeasible:
    """Planner outcome when no certificate was produced.

    ``tag`` separates the causes: ``"unreachable"`` (structural: the target
    is provably outside reach), ``"budget"`` (search ran out), ``"condition-I"``,
    ``"sign"``, ``"support"`` and ``"stalled"``.
    """

    tag: str
    reason: str
    detail: dict = field(default_factory=dict)
    feasible: bool = False

    def to_dict(self):
        return {"feasible": False, "tag": self.tag, "reason": self.reason, "detail": _plain(self.detail)}


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    return x


@dataclass
class JumpChainCertificate:
    """States ``q_0..q_n``, marks ``l_1..l_n`` and radii of a reachability chain.

    Claims, for the model's ``sigma``: ``q_i = q_{i-1} + sigma(q_{i-1}, l_i)``;
    ``eta_0 <= ... <= eta_n``; every ``q~ + sigma(q~, l~)`` with
    ``q~ in B(q_i, eta_i)``, ``l~ in B(l_{i+1}, eps_{i+1})`` lies in
    ``B(q_{i+1}, eta_{i+1})``; ``|q_n - y| + eta_n <= target_radius``;
    each mark ball is charged and sits in ``{|z| > 1/m0}``.
    """

    q: np.ndarray
    l: np.ndarray
    eps: np.ndarray
    eta: np.ndarray
    m0: int
    target: np.ndarray
    target_radius: float
    planner: str = ""
    meta: dict = field(default_factory=dict)
    feasible: bool = True

    def __post_init__(self):
        self.q = np.atleast_2d(np.asarray(self.q, dtype=float))
        d = self.q.shape[1]
        self.l = np.asarray(self.l, dtype=float).reshape(-1, d)
        self.eps = np.asarray(self.eps, dtype=float).reshape(-1)
        self.eta = np.asarray(self.eta, dtype=float).reshape(-1)
        self.target = np.asarray(self.target, dtype=float).reshape(d)
        if not (self.l.shape[0] == self.eps.size == self.eta.size - 1 == self.q.shape[0] - 1):
            raise ValueError("inconsistent certificate lengths")

    @property
    def n_steps(self):
        return self.l.shape[0]

    @property
    def dim(self):
        return self.q.shape[1]

    @property
    def distances(self):
        return np.linalg.norm(self.q - self.target, axis=1)

    @property
    def terminal_error(self):
        return float(self.distances[-1])

    def exact_terminal_error_sq(self):
        return sum((Fraction(float(a)) - Fraction(float(b))) ** 2 for a, b in zip(self.q[-1], self.target))

    def to_dict(self):
        return {
            "feasible": True,
            "planner": self.planner,
            "n_steps": self.n_steps,
            "m0": int(self.m0),
            "target": self.target.tolist(),
            "target_radius": float(self.target_radius),
            "q": self.q.tolist(),
            "l": self.l.tolist(),
            "eps": self.eps.tolist(),
            "eta": self.eta.tolist(),
            "meta": _plain(self.meta),
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d):
        dim = len(d["target"])
        return cls(np.array(d["q"], dtype=float).reshape(-1, dim), np.array(d["l"], dtype=float).reshape(-1, dim),
                   d["eps"], d["eta"], int(d["m0"]), d["target"], float(d["target_radius"]),
                   d.get("planner", ""), dict(d.get("meta", {})))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def step_table(self, digits=6):
        """Human-readable table: i, q_i, l_i, eps_i, eta_i, distance to target."""
        def vec(v):
            return "(" + ", ".join(f"{x:.{digits}g}" for x in v) + ")"

        rows = [("i", "q_i", "l_i", "eps_i", "eta_i", "|q_i - y|")]
        dist = self.distances
        for i in range(self.n_steps + 1):
            rows.append((
                str(i), vec(self.q[i]),
                vec(self.l[i - 1]) if i else "-",
                f"{self.eps[i - 1]:.{digits}g}" if i else "-",
                f"{self.eta[i]:.{digits}g}", f"{dist[i]:.{digits}g}",
            ))
        widths = [max(len(r[k]) for r in rows) for k in range(6)]
        lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines)
