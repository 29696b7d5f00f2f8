"""Declarative measure descriptions (plain dict/list trees) and back.

Numbers may be given as strings with a small arithmetic vocabulary, e.g.
``"-sqrt(2)"`` or ``"2**-3"``, so irrational atoms can be written exactly
as intended rather than as truncated decimals.
"""

import ast
import math
import operator

import numpy as np

from ..errors import ConfigError
from ._base import Tempering
from .atomic import Atomic
from .product import Product
from .radial import RadialPolar
from .subordinated import GaussianBase, Subordinated

_FUNCS = {"sqrt": math.sqrt, "exp": math.exp, "log": math.log, "cos": math.cos, "sin": math.sin}
_CONSTS = {"pi": math.pi, "e": math.e, "inf": math.inf}
_OPS = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow, ast.USub: operator.neg, ast.UAdd: operator.pos,
}


def number(value, field=None):
    """Float from a number or a short arithmetic expression string."""
    if isinstance(value, bool):
        raise ConfigError("expected a number, got a boolean", field)
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"expected a number, got {type(value).__name__}", field)

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _CONSTS:
            return _CONSTS[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ConfigError(f"unsupported expression {value!r}", field)

    try:
        return float(ev(ast.parse(value.strip(), mode="eval")))
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse number {value!r}", field) from exc


def vector(value, field=None):
    if isinstance(value, (list, tuple)):
        return np.array([number(v, field) for v in value])
    return np.array([number(value, field)])


def _get(tree, key, field, default=None, required=False):
    if key in tree:
        return tree[key]
    if required:
        raise ConfigError("missing required key", f"{field}.{key}" if field else key)
    return default


def tempering_from_config(tree, field="tempering"):
    if tree is None:
        return Tempering()
    if isinstance(tree, str):
        tree = {"kind": tree}
    kind = tree.get("kind", "constant")
    scale = number(tree.get("scale", 1.0), field)
    if kind == "constant":
        return Tempering.constant(scale)
    if kind == "exponential":
        return Tempering.exponential(number(_get(tree, "rate", field, required=True), field), scale)
    if kind == "truncation":
        return Tempering.truncation(number(_get(tree, "radius", field, required=True), field), scale)
    if kind == "custom":
        return Tempering(scale, number(tree.get("rate", 0.0), field), number(tree.get("radius", "inf"), field))
    raise ConfigError(f"unknown tempering kind {kind!r} (constant, exponential, truncation)", field)


def tempering_to_config(t):
    kind = t.kind
    if kind == "exponential" and np.isfinite(t.radius):
        kind = "custom"
    out = {"kind": kind, "scale": t.scale}
    if t.rate > 0:
        out["rate"] = t.rate
    if np.isfinite(t.radius):
        out["radius"] = t.radius
    return out


def measure_from_config(tree, field="measure"):
    """Build an intensity measure from its declarative description."""
    if not isinstance(tree, dict):
        raise ConfigError("measure description must be a mapping", field)
    variant = _get(tree, "variant", field, required=True)
    try:
        if variant == "atomic":
            atoms = _get(tree, "atoms", field, required=True)
            locs = [vector(a, f"{field}.atoms") for a in atoms]
            for i, v in enumerate(locs):
                if not np.any(v):
                    raise ConfigError("atoms must not sit at the origin", f"{field}.atoms[{i}]")
            rates = [number(r, f"{field}.rates") for r in tree.get("rates", [1.0] * len(locs))]
            return Atomic(np.array(locs), rates)
        if variant == "radial":
            alpha = number(_get(tree, "alpha", field, required=True), f"{field}.alpha")
            temp = tempering_from_config(tree.get("tempering"), f"{field}.tempering")
            dirs = tree.get("directions", "symmetric")
            if dirs == "symmetric":
                return RadialPolar.symmetric_1d(alpha, temp, number(tree.get("weight", 1.0)))
            if dirs == "sphere":
                dim = int(_get(tree, "dim", field, required=True))
                return RadialPolar.from_sphere_density(
                    dim, alpha, None, temp, int(tree.get("n_directions", 256)))
            u = np.array([vector(d, f"{field}.directions") for d in dirs])
            w = [number(x, f"{field}.weights") for x in tree.get("weights", [1.0] * len(u))]
            return RadialPolar(alpha, u, w, temp, bool(tree.get("full_sphere", False)))
        if variant == "product":
            coords = [measure_from_config(c, f"{field}.coordinates[{i}]")
                      for i, c in enumerate(_get(tree, "coordinates", field, required=True))]
            scales = tree.get("scales")
            return Product(coords, None if scales is None else [number(s, f"{field}.scales") for s in scales])
        if variant == "subordinated":
            base = _get(tree, "base", field, required=True)
            if "gaussian" in base:
                b = GaussianBase(np.array([vector(r) for r in base["gaussian"]["cov"]]))
            elif "product" in base:
                b = measure_from_config(dict(base["product"], variant="product"), f"{field}.base.product")
            else:
                raise ConfigError("base must be 'gaussian' or 'product'", f"{field}.base")
            sub = measure_from_config(_get(tree, "subordinator", field, required=True), f"{field}.subordinator")
            return Subordinated(b, sub, number(tree.get("drift", 0.0), f"{field}.drift"))
    except ConfigError:
        raise
    except (ValueError, TypeError, NotImplementedError) as exc:
        raise ConfigError(str(exc), field) from exc
    raise ConfigError(f"unknown variant {variant!r}", f"{field}.variant")


def measure_to_config(measure):
    """Inverse of :func:`measure_from_config` (canonical, fully explicit)."""
    if isinstance(measure, Atomic):
        return {"variant": "atomic", "atoms": measure.locations.tolist(), "rates": measure.rates.tolist()}
    if isinstance(measure, RadialPolar):
        return {
            "variant": "radial", "alpha": measure.alpha,
            "directions": measure.directions.tolist(), "weights": measure.weights.tolist(),
            "tempering": tempering_to_config(measure.tempering), "full_sphere": measure.full_sphere,
        }
    if isinstance(measure, Product):
        return {"variant": "product", "coordinates": [measure_to_config(c) for c in measure.coords],
                "scales": measure.scales.tolist()}
    if isinstance(measure, Subordinated):
        if isinstance(measure.base, GaussianBase):
            base = {"gaussian": {"cov": measure.base.cov.tolist()}}
        else:
            p = measure_to_config(measure.base)
            base = {"product": {k: v for k, v in p.items() if k != "variant"}}
        return {"variant": "subordinated", "base": base,
                "subordinator": measure_to_config(measure.subordinator), "drift": measure.drift}
    raise TypeError(f"cannot serialize {type(measure).__name__}")
