"""Config-driven experiments.

    python -m levyreach --config exp.yaml [--seed N] [--workers K] [--out DIR]

Exit status: 0 success / feasible, 2 infeasible, 3 verification failed,
1 configuration or runtime error.  The output directory defaults to
``$LEVYREACH_OUT`` and then ``./levyreach-out``.
"""

import argparse
import copy
import json
import os
import sys
import time

import numpy as np
import yaml

from . import __version__
from .errors import ConfigError, LevyReachError
from .levy import sample_noise
from .mc import (
    CONFIDENCE,
    check_e_property,
    estimate_hitting,
    estimate_levy_support,
    exact_cp_hitting_oracle,
    suggest_trials,
    write_csv,
)
from .measures import Atomic, check_support_conditions_1d, h0_approximate, measure_from_config, measure_to_config
from .planner import (
    JumpChainCertificate,
    plan_additive,
    plan_coordinatewise,
    plan_greedy_frame,
    plan_one_step_inverse,
    verify_certificate,
)
from .sde import integrate, make_model
from .sde.zoo import REGISTRY

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_VERIFY = 0, 1, 2, 3
OUT_ENV = "LEVYREACH_OUT"
KINDS = ("simulate", "plan", "verify-cert", "estimate-hitting", "estimate-support", "check-support",
         "check-e-property")
NEEDS_MODEL = {"simulate", "plan", "verify-cert", "estimate-hitting", "check-e-property"}

DEFAULTS = {
    "seed": 0,
    "start": None,
    "target": {"center": None, "radius": 0.3},
    "numerics": {"T": 1.0, "dt": 1e-2, "cutoff": 1e-3, "n": 10_000, "confidence": CONFIDENCE,
                 "mode": "drop-with-compensator"},
    "planner": {"method": "auto", "budget": 20, "samples": 10_000},
    "certificate": None,
    "second_point": None,
    "oracle_truncation": 40,
}


# --------------------------------------------------------------------------
# loading
# --------------------------------------------------------------------------

def _line_map(text):
    """Dotted key path -> 1-based line number, from the YAML node tree."""
    lines = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                p = f"{path}.{k.value}" if path else str(k.value)
                lines[p] = k.start_mark.line + 1
                walk(v, p)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                p = f"{path}[{i}]"
                lines[p] = v.start_mark.line + 1
                walk(v, p)

    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return lines
    if root is not None:
        walk(root, "")
    return lines


def load_config(path):
    """Parse a YAML or JSON config file; returns ``(tree, line_map)``."""
    with open(path) as fh:
        text = fh.read()
    try:
        tree = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"cannot parse config: {getattr(exc, 'problem', exc)}",
                          line=None if mark is None else mark.line + 1) from exc
    if not isinstance(tree, dict):
        raise ConfigError("config must be a mapping at top level", line=1)
    return tree, _line_map(text)


def _merge(defaults, given):
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _vec(v, field):
    from .measures import vector
    return None if v is None else vector(v, field).tolist()


def resolve(tree):
    """Validate and fill defaults; the result re-resolves to itself."""
    if "kind" not in tree:
        raise ConfigError("missing required key", "kind")
    kind = tree["kind"]
    if kind not in KINDS:
        raise ConfigError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}", "kind")
    unknown = set(tree) - set(DEFAULTS) - {"kind", "measure", "model"}
    if unknown:
        raise ConfigError("unknown key", sorted(unknown)[0])
    cfg = _merge(DEFAULTS, {k: v for k, v in tree.items() if k not in ("kind", "measure", "model")})
    cfg = {"kind": kind, **cfg}
    if kind in NEEDS_MODEL and "model" not in tree:
        raise ConfigError("missing required key", "model")
    if "model" in tree:
        m = tree["model"]
        if isinstance(m, str):
            m = {"name": m}
        if not isinstance(m, dict) or "name" not in m:
            raise ConfigError("model must be a name or a mapping with 'name'", "model")
        if m["name"] not in REGISTRY:
            raise ConfigError(f"unknown model {m['name']!r}; known: {', '.join(sorted(REGISTRY))}", "model.name")
        cfg["model"] = {"name": m["name"], "params": dict(m.get("params", {}))}
    if "measure" in tree:
        cfg["measure"] = measure_to_config(measure_from_config(tree["measure"]))
    elif kind in ("estimate-support", "check-support"):
        raise ConfigError("missing required key", "measure")
    num = cfg["numerics"]
    for key in ("T", "dt", "cutoff", "confidence"):
        try:
            num[key] = float(num[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError("expected a number", f"numerics.{key}") from exc
    num["n"] = int(num["n"])
    if num["dt"] <= 0 or num["cutoff"] <= 0 or num["n"] < 1 or not 0 < num["confidence"] < 1:
        raise ConfigError("need dt > 0, cutoff > 0, n >= 1 and confidence in (0, 1)", "numerics")
    if num["mode"] in ("drop", "gaussian"):
        num["mode"] = {"drop": "drop-with-compensator", "gaussian": "gaussian-approximation"}[num["mode"]]
    if num["mode"] not in ("drop-with-compensator", "gaussian-approximation"):
        raise ConfigError("unknown small-jump mode", "numerics.mode")
    cfg["seed"] = int(cfg["seed"])
    cfg["start"] = _vec(cfg["start"], "start")
    cfg["second_point"] = _vec(cfg["second_point"], "second_point")
    cfg["target"]["center"] = _vec(cfg["target"]["center"], "target.center")
    cfg["target"]["radius"] = float(cfg["target"]["radius"])
    if cfg["planner"]["method"] not in ("auto", "additive", "one-step-inverse", "coordinatewise", "greedy-frame"):
        raise ConfigError("unknown planner method", "planner.method")
    return cfg


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------

def _model(cfg):
    m = cfg["model"]
    try:
        model = make_model(m["name"], **m["params"])
    except TypeError as exc:
        raise ConfigError(str(exc), "model.params") from exc
    if "measure" in cfg:
        model.measure = measure_from_config(cfg["measure"])
    return model


def _start(cfg, model):
    return np.zeros(model.dim) if cfg["start"] is None else np.array(cfg["start"])


def _target(cfg, dim):
    c = cfg["target"]["center"]
    if c is None:
        raise ConfigError("missing required key", "target.center")
    c = np.array(c)
    if c.size != dim:
        raise ConfigError(f"target has dimension {c.size}, expected {dim}", "target.center")
    return c, cfg["target"]["radius"]


def _plan(cfg, model):
    y, radius = _target(cfg, model.dim)
    start = _start(cfg, model)
    eta = 2 * radius
    p = cfg["planner"]
    method = p["method"]
    if method == "auto":
        if model.frame is not None and model.matrix is not None:
            method = "greedy-frame"
        elif model.coordinate is not None:
            method = "coordinatewise"
        elif model.additive:
            method = "additive"
        else:
            method = "one-step-inverse"
    if method == "additive":
        res = plan_additive(model.measure, start, y, eta, p["budget"], model)
    elif method == "greedy-frame":
        res = plan_greedy_frame(model, start, y, eta, samples=p["samples"], rng=cfg["seed"])
    elif method == "coordinatewise":
        res = plan_coordinatewise(model, start, y, eta)
    else:
        res = plan_one_step_inverse(model, start, y, eta, samples=p["samples"], rng=cfg["seed"])
    return method, res


def run_experiment(cfg, out_dir, workers=1, stdout=None):
    """Execute a resolved config; returns ``(exit_code, report)``."""
    stdout = sys.stdout if stdout is None else stdout
    kind = cfg["kind"]
    num = cfg["numerics"]
    seed = cfg["seed"]
    result, code, files = {}, EXIT_OK, {}
    os.makedirs(out_dir, exist_ok=True)

    if kind == "simulate":
        model = _model(cfg)
        noise = sample_noise(model.measure, num["T"], num["cutoff"], num["mode"], seed) if model.measure is not None \
            else None
        if noise is None:
            from .levy import empty_noise
            noise = empty_noise(model.dim, num["T"], num["cutoff"])
        path = integrate(model, _start(cfg, model), noise, num["dt"])
        files["path"] = "path.csv"
        files["noise"] = "noise.json"
        path.to_csv(os.path.join(out_dir, files["path"]))
        with open(os.path.join(out_dir, files["noise"]), "w") as fh:
            fh.write(noise.to_json(indent=2))
        result = {"final_state": path.final.tolist(), "n_jumps": noise.n_jumps, "n_rows": int(path.times.size)}

    elif kind == "plan":
        model = _model(cfg)
        method, res = _plan(cfg, model)
        result = {"method": method}
        if not res.feasible:
            code = EXIT_INFEASIBLE
            result.update(res.to_dict())
            print(f"infeasible ({res.tag}): {res.reason}", file=stdout)
        else:
            rep = verify_certificate(res, model, samples=cfg["planner"]["samples"], rng=seed)
            result.update(certificate=res.to_dict(), verification=rep.to_dict())
            files["certificate"] = "certificate.json"
            with open(os.path.join(out_dir, files["certificate"]), "w") as fh:
                fh.write(res.to_json(indent=2))
            print(f"feasible: {res.n_steps}-step certificate ({method})", file=stdout)
            print(res.step_table(), file=stdout)
            code = EXIT_OK if rep.passed else EXIT_VERIFY

    elif kind == "verify-cert":
        model = _model(cfg)
        if not cfg["certificate"]:
            raise ConfigError("missing required key", "certificate")
        with open(cfg["certificate"]) as fh:
            cert = JumpChainCertificate.from_json(fh.read())
        rep = verify_certificate(cert, model, samples=cfg["planner"]["samples"], rng=seed)
        result = {"verification": rep.to_dict(), "n_steps": cert.n_steps}
        code = EXIT_OK if rep.passed else EXIT_VERIFY
        print(("verified" if rep.passed else "verification failed") + f" ({', '.join(rep.checks_passed) or 'none'})",
              file=stdout)

    elif kind == "estimate-hitting":
        model = _model(cfg)
        y, radius = _target(cfg, model.dim)
        est = estimate_hitting(model, _start(cfg, model), num["T"], y, radius, num["n"], num["dt"], num["cutoff"],
                               seed, num["confidence"], workers, num["mode"], label="estimate-hitting")
        result = {"estimate": est.to_dict()}
        files["csv"] = "results.csv"
        write_csv([est], os.path.join(out_dir, files["csv"]))
        print(f"hits {est.successes}/{est.trials}  p = {est.point:.6g}  "
              f"[{est.lo:.3g}, {est.hi:.3g}] at {est.confidence:.0%}", file=stdout)

    elif kind == "estimate-support":
        measure = measure_from_config(cfg["measure"])
        y, radius = _target(cfg, measure.dim)
        est = estimate_levy_support(measure, num["T"], y, radius, num["n"], num["cutoff"], seed,
                                    num["confidence"], workers, label="estimate-support")
        result = {"estimate": est.to_dict()}
        if isinstance(measure, Atomic):
            o = exact_cp_hitting_oracle(measure, num["T"], y, radius, cfg["oracle_truncation"])
            result["oracle"] = o.to_dict()
            if 0 < o.value < 1:
                result["suggested_n"] = suggest_trials(o.value, num["confidence"])
        files["csv"] = "results.csv"
        write_csv([est], os.path.join(out_dir, files["csv"]))
        print(f"hits {est.successes}/{est.trials}  p = {est.point:.6g}", file=stdout)

    elif kind == "check-support":
        measure = measure_from_config(cfg["measure"])
        if measure.dim == 1:
            result["support"] = check_support_conditions_1d(measure).to_dict()
        if cfg["target"]["center"] is not None:
            y, radius = _target(cfg, measure.dim)
            h = h0_approximate(measure, y, radius, cfg["planner"]["budget"])
            result["h0"] = {"feasible": h.feasible, "reason": h.reason,
                            "multiplicities": list(h.multiplicities) if h.feasible else None,
                            "error": h.error if h.feasible else None}
        print(json.dumps(result.get("support", result.get("h0"))), file=stdout)

    elif kind == "check-e-property":
        model = _model(cfg)
        x = _start(cfg, model)
        if cfg["second_point"] is None:
            raise ConfigError("missing required key", "second_point")
        rep = check_e_property(model, x, np.array(cfg["second_point"]), num["T"], num["n"], num["dt"],
                               num["cutoff"], seed, workers=workers)
        result = {"e_property": rep}
        code = EXIT_OK if rep["passed"] else EXIT_VERIFY
        print(f"mean {rep['mean']:.6g} vs bound {rep['bound']:.6g}: {'pass' if rep['passed'] else 'fail'}",
              file=stdout)

    report = {"version": __version__, "kind": kind, "exit_code": code, "config": cfg,
              "result": _plain(result), "files": files}
    return code, report


def _plain(x):
    from .planner.certificate import _plain as p
    x = p(x)
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


def main(argv=None):
    ap = argparse.ArgumentParser(prog="levyreach", description=__doc__.split("\n")[0])
    ap.add_argument("--config", required=True, help="experiment config (YAML or JSON)")
    ap.add_argument("--seed", type=int, default=None, help="override the config seed")
    ap.add_argument("--workers", type=int, default=None, help="worker processes (default: all CPUs)")
    ap.add_argument("--out", default=None, help=f"output directory (default: ${OUT_ENV} or ./levyreach-out)")
    args = ap.parse_args(argv)
    out_dir = args.out or os.environ.get(OUT_ENV) or "levyreach-out"
    workers = args.workers or os.cpu_count() or 1
    lines = {}
    try:
        tree, lines = load_config(args.config)
        if args.seed is not None:
            tree["seed"] = args.seed
        cfg = resolve(tree)
        t0 = time.perf_counter()
        code, report = run_experiment(cfg, out_dir, workers)
        report["timing"] = {"wall_seconds": time.perf_counter() - t0}
    except ConfigError as exc:
        if exc.line is None and exc.field is not None:
            line = lines.get(exc.field)
            msg = str(exc).split(": ", 1)[-1] if exc.field else str(exc)
            exc = ConfigError(msg, exc.field, line)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (LevyReachError, ValueError, TypeError, OSError) as exc:
        print(f"error in {args.config}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
