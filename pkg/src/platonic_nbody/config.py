"""JSON run configurations.

A configuration names a group, a cone (catalog id, explicit nu/sigma, or
K4), the grid and the flow parameters.  ``run_config`` executes
build -> test loop -> (optional) minimize -> invariant audit -> export.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .action import action as eval_action
from .action import analytic_action, upsilon
from .archimedean import edge_counts, qr_for, validate_nu
from .catalog import CATALOG, entry_constraint, entry_loop, get_entry
from .chambers import complex_for, validate_sigma
from .io import export_trajectory, write_json
from .loops import (k4_constraint, k4_optimal_rho, k4_test_loop, loop_from_nu,
                    loop_from_sigma)
from .optimizer import FlowParams, gradient_flow, verify_solution
from .symmetry import DEFAULT_POLYHEDRON

ABORTS = ("topology change rejected", "possible boundary minimizer")
OUT_ENV = "PLATONIC_NBODY_OUT"
THREADS_ENV = "PLATONIC_NBODY_THREADS"

SCHEMA = {
    "group": str,
    "polyhedron": str,
    "cone": (str, dict),
    "n": int,
    "grid": int,
    "T": (int, float),
    "alpha": (int, float),
    "action_only": bool,
    "minimize": bool,
    "flow": dict,
    "output": dict,
}
CONE_KEYS = {"nu": list, "sigma": list, "n": int, "start": (int, float)}
OUTPUT_KEYS = {"dir": str, "trajectory": str, "trace": str, "report": str}


class ConfigError(ValueError):
    pass


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Ordered map, fanned out over THREADS_ENV worker threads."""
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def output_dir(cfg_dir: str | None = None) -> Path:
    return Path(os.environ.get(OUT_ENV) or cfg_dir or ".")


def _line_of(text: str, key: str) -> int:
    needle = f'"{key}"'
    for k, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return k
    return 1


def _check(d: dict, schema: dict, text: str, where: str):
    for key, val in d.items():
        if key not in schema:
            raise ConfigError(f"line {_line_of(text, key)}: unknown key {where}{key!r}; "
                              f"allowed: {', '.join(schema)}")
        typ = schema[key]
        if isinstance(val, bool) and typ in (int, (int, float)):
            raise ConfigError(f"line {_line_of(text, key)}: {where}{key!r} must be a number")
        if not isinstance(val, typ):
            names = typ.__name__ if isinstance(typ, type) else " or ".join(t.__name__ for t in typ)
            raise ConfigError(f"line {_line_of(text, key)}: {where}{key!r} must be {names}")


def parse_config(text: str) -> dict:
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("line 1: configuration must be a JSON object")
    _check(cfg, SCHEMA, text, "")
    if "cone" not in cfg:
        raise ConfigError("line 1: missing required key 'cone'")
    cone = cfg["cone"]
    if isinstance(cone, str):
        if cone != "K4" and cone not in CATALOG:
            raise ConfigError(f"line {_line_of(text, 'cone')}: unknown cone id {cone!r}; "
                              f"known ids: K4, {', '.join(CATALOG)}")
    else:
        _check(cone, CONE_KEYS, text, "cone.")
        if ("nu" in cone) == ("sigma" in cone):
            raise ConfigError(f"line {_line_of(text, 'cone')}: cone needs exactly one of 'nu' or 'sigma'")
        if "group" not in cfg:
            raise ConfigError("line 1: an explicit cone needs 'group'")
    if "group" in cfg and cfg["group"] not in ("T", "O", "I", "D2"):
        raise ConfigError(f"line {_line_of(text, 'group')}: group must be T, O, I or D2")
    if "flow" in cfg:
        try:
            FlowParams.from_dict(cfg["flow"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"line {_line_of(text, 'flow')}: {exc}") from None
    if "output" in cfg:
        _check(cfg["output"], OUTPUT_KEYS, text, "output.")
    for key in ("grid", "n"):
        if key in cfg and cfg[key] < 1:
            raise ConfigError(f"line {_line_of(text, key)}: {key!r} must be positive")
    if "T" in cfg and cfg["T"] <= 0:
        raise ConfigError(f"line {_line_of(text, 'T')}: 'T' must be positive")
    return cfg


def load_config(path) -> dict:
    return parse_config(Path(path).read_text())


def build_cone(cfg: dict):
    """(loop, constraint, complex, analytic action or None, label)."""
    cone = cfg["cone"]
    T = float(cfg.get("T", 1.0))
    m = int(cfg.get("grid", 256))
    n = int(cfg.get("n", 1))
    if cone == "K4":
        return k4_test_loop(k4_optimal_rho(T), T, m), k4_constraint(), None, None, "K4"
    if isinstance(cone, str):
        e = get_entry(cone)
        if "group" in cfg and cfg["group"] != e.kind:
            raise ConfigError(f"cone {cone} belongs to group {e.kind}, not {cfg['group']}")
        poly = qr_for(e.kind, e.polyhedron)
        if n == 1:
            loop, cons = entry_loop(e, 1, T, m), entry_constraint(e)
        else:
            loop, cons = loop_from_nu(poly, e.path, n, T, m, start=e.start), None
        n1, n2 = e.counts
        A = analytic_action(poly.group.order, poly.edge_length, n * n1, n * n2,
                            upsilon(poly, 1), upsilon(poly, 2), T)
        return loop, cons, poly.complex, A, cone
    kind = cfg["group"]
    poly = qr_for(kind, cfg.get("polyhedron") or DEFAULT_POLYHEDRON[kind])
    n = int(cone.get("n", n))
    start = float(cone.get("start", 0.25))
    if "nu" in cone:
        rep = validate_nu(poly, cone["nu"], n)
        if not rep:
            raise ConfigError(f"invalid nu: {rep.message}")
        loop = loop_from_nu(poly, cone["nu"], n, T, m, start=start)
        n1, n2 = edge_counts(poly, cone["nu"], n)
        A = analytic_action(poly.group.order, poly.edge_length, n1, n2,
                            upsilon(poly, 1), upsilon(poly, 2), T)
        return loop, None, poly.complex, A, "nu"
    cx = complex_for(kind, poly.group.polyhedron)
    rep = validate_sigma(cx, cone["sigma"], n)
    if not rep:
        raise ConfigError(f"invalid sigma: {rep.message}")
    return loop_from_sigma(cx, cone["sigma"], n, T, m, start=start), None, cx, None, "sigma"


def run_config(cfg: dict, cfg_dir: str | None = None, log=print) -> dict:
    """Execute a parsed configuration; returns the report dictionary."""
    from .topology import crossing_count_audit, loop_invariant

    alpha = float(cfg.get("alpha", 1.0))
    loop, cons, cx, A, label = build_cone(cfg)
    report: dict = {"cone": label, "grid": loop.m, "T": loop.T, "alpha": alpha}
    b = eval_action(loop, alpha)
    report["test_action"] = b.to_dict()
    if A is not None and alpha == 1.0:
        report["analytic_action"] = A
        log(f"analytic test action: {A:.4f}")
    log(f"discrete test action (optimal scaling): {b.scaledMin:.4f}")
    ok = True
    if cfg.get("minimize", False) and not cfg.get("action_only", False):
        params = FlowParams.from_dict({**cfg.get("flow", {}), "alpha": alpha})
        loop, tr = gradient_flow(loop, params, cons, cx)
        report["flow"] = {k: v for k, v in tr.to_dict().items()
                          if k not in ("actions", "grad_norms", "steps", "min_gamma")}
        report["flow"]["final_action"] = tr.final_action
        report["verification"] = verify_solution(loop, alpha).to_dict()
        ok = ok and tr.monotone and tr.reason not in ABORTS
        log(f"minimized action: {tr.final_action:.6f} ({tr.reason}, {tr.iterations} iterations)")
        out = cfg.get("output", {})
        if out.get("trace"):
            write_json(tr.to_dict(), output_dir(out.get("dir") or cfg_dir) / out["trace"])
    if cx is not None:
        try:
            sig, n = loop_invariant(cx, loop)
            report["invariant"] = {"sigma": sig, "n": n,
                                   "audit": crossing_count_audit(cx, loop, sig, n).to_dict()}
        except ValueError as exc:
            report["invariant"] = {"error": str(exc)}
            ok = False
    out = cfg.get("output", {})
    base = output_dir(out.get("dir") or cfg_dir)
    if out.get("trajectory"):
        base.mkdir(parents=True, exist_ok=True)
        export_trajectory(loop, base / out["trajectory"],
                          extra={"cone": label, "alpha": alpha, "action": report["test_action"]})
    if out.get("report"):
        base.mkdir(parents=True, exist_ok=True)
        write_json(report, base / out["report"])
    report["ok"] = bool(ok)
    return report


def run_config_file(path, log=print) -> dict:
    return run_config(load_config(path), str(Path(path).parent), log)
