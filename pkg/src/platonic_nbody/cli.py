"""Command-line entry point: ``platonic-nbody <command> ...``.

Every command writes JSON (or CSV) to stdout or to the requested file and
exits with status 0 only when all of its checks pass.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__


def _dump(obj, out=None) -> None:
    from .io import _default

    text = json.dumps(obj, indent=1, sort_keys=True, default=_default) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _group(name: str, polyhedron: str | None = None):
    from .loops import group_from_name

    return group_from_name(name, polyhedron)


def _complex_of(group):
    from .chambers import complex_for

    if group.kind not in ("T", "O", "I"):
        raise SystemExit(f"no chamber complex for group {group.kind}")
    return complex_for(group.kind, group.polyhedron)


# --- commands -----------------------------------------------------------------


def cmd_groups(args) -> int:
    from .symmetry import group_info

    g = _group(args.group, args.polyhedron)
    info = group_info(g)
    if args.brief:
        info.pop("elements")
    _dump(info, args.out)
    return 0


def cmd_chambers(args) -> int:
    from .chambers import complex_to_dict

    cx = _complex_of(_group(args.group, args.polyhedron))
    _dump(complex_to_dict(cx), args.out)
    return 0


def cmd_qr(args) -> int:
    if args.action == "catalog":
        from .catalog import CATALOG, entry_summary

        _dump([entry_summary(e) for e in CATALOG.values()], args.out)
        return 0
    if not args.group:
        raise SystemExit("qr dump needs a group")
    from .archimedean import qr_for, qr_to_dict

    g = _group(args.group, args.polyhedron)
    _dump(qr_to_dict(qr_for(g.kind, g.polyhedron)), args.out)
    return 0


def cmd_action(args) -> int:
    from .action import CollisionError, action
    from .io import read_loop_json

    loop, _ = read_loop_json(args.loop)
    try:
        b = action(loop, args.alpha)
    except CollisionError as exc:
        _dump({"error": str(exc)}, args.out)
        return 1
    d = b.to_dict()
    d.update(group=loop.group.kind, m=loop.m, T=loop.T)
    _dump(d, args.out)
    return 0


def cmd_tables(args) -> int:
    from .tables import check_summary, emit_tables, format_tables, tables_to_dict

    which = tuple(args.which) if args.which else (1, 2, 3)
    tabs = emit_tables(which)
    if args.json:
        _dump(tables_to_dict(tabs), args.out)
    else:
        text = format_tables(tabs) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    s = check_summary(tabs)
    if args.check:
        ok = s["bound_cells_ok"] and s["action_cells_ok"] and s["inequalities_ok"]
        for c in s["failed_cells"]:
            print(f"out of tolerance: {c}", file=sys.stderr)
        for q in s["failed_inequalities"]:
            print(f"bound violated: {q}", file=sys.stderr)
        return 0 if ok else 1
    return 0


def cmd_invariant(args) -> int:
    from .io import read_loop_json
    from .topology import crossing_count_audit, invariant_report

    loop, _ = read_loop_json(args.loop)
    cx = _complex_of(loop.group)
    try:
        rep = invariant_report(cx, loop)
    except ValueError as exc:
        _dump({"error": str(exc)}, args.out)
        return 1
    audit = crossing_count_audit(cx, loop, rep["sigma"], rep["n"])
    rep["audit"] = audit.to_dict()
    _dump(rep, args.out)
    return 0 if audit.ok else 1


def _load_cone(spec: str, grid: int | None, T: float):
    """(loop, constraint, complex, label) from a catalog id, K4, a loop JSON or a config."""
    from .config import build_cone, parse_config
    from .io import loop_from_dict

    p = Path(spec)
    if p.suffix == ".json" and p.exists():
        text = p.read_text()
        d = json.loads(text)
        if "x" in d:
            loop = loop_from_dict(d)
            if grid and grid != loop.m:
                loop = loop.resampled(grid)
            cx = _complex_of(loop.group) if loop.group.kind in ("T", "O", "I") else None
            return loop, None, cx, p.stem
        cfg = parse_config(text)
    else:
        cfg = {"cone": spec, "T": T}
    if grid:
        cfg["grid"] = grid
    loop, cons, cx, _, label = build_cone(cfg)
    return loop, cons, cx, label


def _params(args, alpha: float):
    from .optimizer import FlowParams

    d = json.loads(Path(args.params).read_text()) if args.params else {}
    d["alpha"] = alpha
    return FlowParams.from_dict(d)


def cmd_minimize(args) -> int:
    from .config import ABORTS
    from .io import export_trajectory, write_json
    from .optimizer import gradient_flow, verify_solution

    loop, cons, cx, label = _load_cone(args.cone, args.grid, args.T)
    params = _params(args, args.alpha)
    log = (lambda s: print(s, file=sys.stderr)) if args.verbose else None
    loop, tr = gradient_flow(loop, params, cons, cx, log=log)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = label.replace("/", "_")
    trace = tr.to_dict()
    trace["verification"] = verify_solution(loop, args.alpha).to_dict()
    trace.update(cone=label, m=loop.m, T=loop.T)
    write_json(trace, out / f"{stem}_trace.json")
    export_trajectory(loop, out / f"{stem}.csv")
    export_trajectory(loop, out / f"{stem}.json", extra={"cone": label, "alpha": args.alpha})
    ok = tr.monotone and tr.reason not in ABORTS
    print(json.dumps({"cone": label, "final_action": tr.final_action, "iterations": tr.iterations,
                      "reason": tr.reason, "monotone": tr.monotone,
                      "residual": trace["verification"]["residual"], "ok": ok}))
    return 0 if ok else 1


def cmd_sweep(args) -> int:
    from .io import write_json
    from .optimizer import alpha_sweep

    loop, cons, cx, label = _load_cone(args.cone, args.grid, args.T)
    alphas = [float(a) for a in args.alphas.split(",")]
    params = _params(args, alphas[0])
    points, _ = alpha_sweep(loop, alphas, params, cons, cx)
    res = {"cone": label, "points": [p.to_dict() for p in points]}
    if args.out:
        write_json(res, args.out)
    else:
        _dump(res)
    return 0


def cmd_kepler(args) -> int:
    from .kepler import ratio_table

    tab = ratio_table(args.grid)
    lines = ["theta,e,a"] + [",".join(format(v, ".17g") for v in row) for row in tab]
    text = "\n".join(lines) + "\n"
    k = int(np.argmax(tab[:, 2]))
    summary = {"n": args.grid, "max_a": float(tab[k, 2]), "theta_at_max": float(tab[k, 0]),
               "a_at_0": float(tab[0, 2]), "ok": bool(tab[:, 2].max() < 1)}
    if args.out:
        Path(args.out).write_text(text)
        print(json.dumps(summary))
    else:
        sys.stdout.write(text)
        print(json.dumps(summary), file=sys.stderr)
    return 0 if summary["ok"] else 1


def cmd_export(args) -> int:
    from .io import export_trajectory

    loop, _, _, label = _load_cone(args.source, args.grid, args.T)
    export_trajectory(loop, args.out, args.format, extra={"cone": label})
    return 0


def cmd_run(args) -> int:
    from .config import ConfigError, run_config_file

    try:
        rep = run_config_file(args.config, log=lambda s: print(s, file=sys.stderr))
    except ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return 2
    _dump(rep)
    return 0 if rep["ok"] else 1


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="platonic-nbody", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def group_args(p, optional=False):
        if optional:
            p.add_argument("group", nargs="?", choices=["T", "O", "I"])
        else:
            p.add_argument("group", choices=["T", "O", "I", "D2"])
        p.add_argument("--polyhedron", help="polyhedron fixing the reference frame")
        p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("groups", help="rotation group summary")
    p.add_argument("action", choices=["info"])
    group_args(p)
    p.add_argument("--brief", action="store_true", help="omit the element list")
    p.set_defaults(fn=cmd_groups)

    p = sub.add_parser("chambers", help="chamber complex")
    p.add_argument("action", choices=["dump"])
    group_args(p)
    p.set_defaults(fn=cmd_chambers)

    p = sub.add_parser("qr", help="Archimedean polyhedron and loop catalog")
    p.add_argument("action", choices=["dump", "catalog"])
    group_args(p, optional=True)
    p.set_defaults(fn=cmd_qr)

    p = sub.add_parser("action", help="evaluate the discrete action of a loop")
    p.add_argument("action", choices=["eval"])
    p.add_argument("loop", help="loop JSON file")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_action)

    p = sub.add_parser("tables", help="regenerate the bound and action tables")
    p.add_argument("--which", type=int, choices=[1, 2, 3], action="append")
    p.add_argument("--check", action="store_true", help="exit 1 on any failed cell or bound")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_tables)

    p = sub.add_parser("invariant", help="topological invariant of a loop")
    p.add_argument("loop", help="loop JSON file")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_invariant)

    def flow_args(p):
        p.add_argument("--cone", required=True, help="catalog id, K4, loop JSON or config JSON")
        p.add_argument("--grid", type=int, help="samples per period")
        p.add_argument("--T", type=float, default=1.0, help="period")
        p.add_argument("--params", help="JSON file of flow parameters")

    p = sub.add_parser("minimize", help="gradient flow from a test loop")
    flow_args(p)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(fn=cmd_minimize)

    p = sub.add_parser("sweep-alpha", help="warm-started flows over alpha")
    flow_args(p)
    p.add_argument("--alphas", required=True, help="comma-separated exponents")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("kepler-ratio", help="A/A0 for symmetric Kepler arcs")
    p.add_argument("--grid", type=int, default=2000)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_kepler)

    p = sub.add_parser("export", help="write a trajectory file")
    p.add_argument("source", help="catalog id, K4, loop JSON or config JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--grid", type=int)
    p.add_argument("--T", type=float, default=1.0)
    p.set_defaults(fn=cmd_export)

    p = sub.add_parser("run", help="execute a JSON run configuration")
    p.add_argument("config")
    p.set_defaults(fn=cmd_run)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return int(args.fn(args) or 0)


if __name__ == "__main__":
    sys.exit(main())
