"""Command line front end.

Commands: length | shear-from-fn | flip | orbit-count | volume | apl-check |
bounding-check.  Exit codes: 0 success, 2 validation error, 3 non-certified
partial result, 64 unknown command.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .errors import GeometryError, ValidationError
from . import asymptotics, foliation
from .fenchel_nielsen import FNPoint, fn_to_holonomy, holonomy_to_shear
from .shear import ShearVector, curve_length, flip_shears
from .triangulation import build_surface, builtin_curve

COMMANDS = (
    "length",
    "shear-from-fn",
    "flip",
    "orbit-count",
    "volume",
    "apl-check",
    "bounding-check",
)

_JSON_KW = dict(sort_keys=True, indent=2)


def _load_surface(arg: str):
    if os.path.isfile(arg):
        with open(arg) as f:
            return build_surface(json.load(f))
    return build_surface(arg)


def _load_shears(T, shears: str | None, shears_file: str | None) -> ShearVector:
    if shears_file:
        with open(shears_file) as f:
            return ShearVector.from_dict(json.load(f))
    if shears is None:
        raise ValidationError("provide --shears or --shears-file")
    vals = [float(x) for x in shears.split(",")]
    return ShearVector(T, tuple(vals))


def _config(args, command):
    cfg = {k.replace("_", "-"): v for k, v in sorted(vars(args).items()) if k != "func"}
    cfg["command"] = command
    return cfg


def _write_json(path, payload):
    with open(path, "w") as f:
        json.dump(payload, f, **_JSON_KW)
        f.write("\n")


def _out(args, name):
    os.makedirs(args.outdir, exist_ok=True)
    return os.path.join(args.outdir, name)


# -- commands -------------------------------------------------------------------

def cmd_length(args):
    T = _load_surface(args.surface)
    s = _load_shears(T, args.shears, args.shears_file)
    if args.require_complete and not s.is_complete(tol=1e-9):
        worst = max(abs(r) for r in s.residuals())
        print(f"completeness residual {worst:g}", file=sys.stderr)
        return 2
    curve = builtin_curve(T, args.curve)
    print(f"{curve_length(s, curve):.7f}")
    return 0


def cmd_shear_from_fn(args):
    if args.fn_file:
        with open(args.fn_file) as f:
            point = FNPoint.from_dict(json.load(f))
        T = _load_surface(point.surface)
    else:
        if args.length is None or args.twist is None:
            raise ValidationError("provide --length and --twist, or --fn-file")
        T = _load_surface(args.surface)
        point = FNPoint(T.name, (args.length,), (args.twist,))
    if T.name != "s_1_1":
        raise ValidationError("shear-from-fn supports the s_1_1 marking")
    rep = fn_to_holonomy(T.name, point)
    sv = holonomy_to_shear(rep, T)
    payload = sv.to_dict()
    payload["config"] = _config(args, "shear-from-fn")
    if args.output:
        _write_json(_out(args, args.output), payload)
    else:
        json.dump(payload, sys.stdout, **_JSON_KW)
        print()
    return 0


def cmd_flip(args):
    T = _load_surface(args.surface)
    s = _load_shears(T, args.shears, args.shears_file)
    flipped = flip_shears(s, args.edge)
    payload = flipped.to_dict()
    payload["config"] = _config(args, "flip")
    if args.output:
        _write_json(_out(args, args.output), payload)
    else:
        json.dump(payload, sys.stdout, **_JSON_KW)
        print()
    return 0


def cmd_orbit_count(args):
    T = _load_surface(args.surface)
    s = _load_shears(T, args.shears, args.shears_file)
    radii = tuple(np.linspace(args.Lmax / args.grid, args.Lmax, args.grid))
    limits = asymptotics.OrbitLimits(
        max_nodes=args.max_nodes,
        prune_margin=args.margin,
    )
    oc = asymptotics.enumerate_orbit(s, args.Lmax, args.norm, limits, radii=radii)
    cfg = _config(args, "orbit-count")
    csv_path = _out(args, "orbit_counts.csv")
    with open(csv_path, "w") as f:
        f.write("# config: " + json.dumps(cfg, sort_keys=True) + "\n")
        f.write("L,count_raw,count_adjusted,nodes_expanded,certified\n")
        for r, c, ca in zip(oc.radii, oc.counts, oc.counts_adjusted):
            f.write(
                f"{r:.6f},{c},{ca},{oc.nodes_expanded},{str(oc.certified).lower()}\n"
            )
    fit_payload = {
        "config": cfg,
        "norm": oc.norm,
        "stabilizer": oc.stabilizer,
        "prune_margin": oc.prune_margin,
        "certified": oc.certified,
        "nodes_expanded": oc.nodes_expanded,
        "key_collisions": oc.key_collisions,
    }
    fit = None
    try:
        expo, logc, r2 = asymptotics.fit_exponent(
            oc, window=(args.Lmax / 2.0, args.Lmax)
        )
        fit = {"exponent": expo, "log_coefficient": logc, "r_squared": r2,
               "window": [args.Lmax / 2.0, args.Lmax]}
    except ValidationError:
        pass
    fit_payload["fit"] = fit
    _write_json(_out(args, "orbit_fit.json"), fit_payload)
    from .plots import save_loglog_counts

    save_loglog_counts(
        _out(args, "orbit_counts.svg"),
        oc.radii,
        oc.counts,
        fit=(fit["exponent"], fit["log_coefficient"]) if fit else None,
        title=f"{T.name or 'surface'} orbit counts ({oc.norm})",
    )
    print(f"count({args.Lmax:g}) = {oc.count_at(args.Lmax)}  certified = {oc.certified}")
    return 0 if oc.certified else 3


def cmd_volume(args):
    T = _load_surface(args.surface)
    spec = foliation.NormBallSpec.for_surface(T, args.norm, args.radius)
    est, se = foliation.mc_ball_volume(spec, args.samples, args.seed, args.threads)
    payload = {
        "surface": T.surface_ref(),
        "norm": args.norm,
        "radius": args.radius,
        "dim": int(spec.frame().shape[1]),
        "estimate": est,
        "stderr": se,
        "samples": args.samples,
        "seed": args.seed,
        "config": _config(args, "volume"),
    }
    path = _out(args, args.output or "volume.json")
    _write_json(path, payload)
    print(f"volume = {est:.6f} +- {se:.6f}  -> {path}")
    return 0


def cmd_apl_check(args):
    cfg = _config(args, "apl-check")
    ts = np.linspace(args.tmin, args.tmax, args.points)
    cone = asymptotics.ClosedCone(np.array([[1.0]]))
    if args.demo == "arccosh":
        scan = asymptotics.apl_residual_scan(
            lambda x: math.acosh(math.exp(float(x[0]))), cone, [0.0], [1.0], ts
        )
        label = "arccosh(e^t)"
    else:
        T = _load_surface(args.surface)
        if T.name != "s_1_1":
            raise ValidationError("apl-check twist rays support s_1_1")
        edge = args.edge

        def F(x):
            rep = fn_to_holonomy(
                "s_1_1", FNPoint("s_1_1", (args.length,), (float(x[0]),))
            )
            return holonomy_to_shear(rep, T).value(edge)

        scan = asymptotics.apl_residual_scan(F, cone, [0.0], [1.0], ts)
        label = f"shear {edge} along the twist ray (l={args.length:g})"
    payload = {
        "config": cfg,
        "target": label,
        "slope": scan.slope,
        "constant": scan.constant,
        "tail_max_residual": scan.tail_max_residual(),
    }
    _write_json(_out(args, "apl_check.json"), payload)
    csv_path = _out(args, "apl_residuals.csv")
    with open(csv_path, "w") as f:
        f.write("# config: " + json.dumps(cfg, sort_keys=True) + "\n")
        f.write("t,residual\n")
        for t, r in zip(scan.t_grid, scan.residuals):
            f.write(f"{t:.6f},{r:.12e}\n")
    from .plots import save_residual_plot

    save_residual_plot(_out(args, "apl_residuals.svg"), scan.t_grid, scan.residuals, title=label)
    print(f"slope {scan.slope:.6f} constant {scan.constant:.6f} "
          f"tail residual {scan.tail_max_residual():.3e}")
    return 0


def cmd_bounding_check(args):
    T = _load_surface(args.surface)
    if T.name != "s_1_1":
        raise ValidationError("bounding-check supports s_1_1")
    s = _load_shears(T, args.shears, args.shears_file)
    limits = asymptotics.OrbitLimits(max_nodes=args.max_nodes, prune_margin=args.margin)
    oc = asymptotics.enumerate_orbit(
        s, args.Lmax, args.norm, limits, keep_nodes=True
    )
    nodes = [sv for sv in oc.nodes if sv.norm(args.norm) > 1e-9]
    fn_points, f_values = asymptotics.s11_orbit_fn_sample(nodes, args.norm)
    result = asymptotics.bounding_check(fn_points, f_values)
    payload = {
        "config": _config(args, "bounding-check"),
        "samples": len(nodes),
        "sup_ratios": list(result.sup_ratios),
        "half_sup_ratios": list(result.half_sup_ratios),
        "stabilized": result.stabilized,
        "certified": oc.certified,
    }
    _write_json(_out(args, "bounding_check.json"), payload)
    print(f"sup ratios {result.sup_ratios} stabilized {result.stabilized}")
    return 0 if oc.certified else 3


# -- argument plumbing -------------------------------------------------------------

def _add_common(p):
    p.add_argument("--outdir", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="shearlab")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("length", help="geodesic length of a built-in curve")
    p.add_argument("--surface", required=True)
    p.add_argument("--shears")
    p.add_argument("--shears-file")
    p.add_argument("--curve", default="a")
    p.add_argument("--require-complete", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_length)

    p = sub.add_parser("shear-from-fn", help="Fenchel-Nielsen point to shear JSON")
    p.add_argument("--surface", default="s_1_1")
    p.add_argument("--length", type=float)
    p.add_argument("--twist", type=float)
    p.add_argument("--fn-file", help="FN point JSON instead of --length/--twist")
    p.add_argument("--output")
    _add_common(p)
    p.set_defaults(func=cmd_shear_from_fn)

    p = sub.add_parser("flip", help="flip an edge and recompute shears")
    p.add_argument("--surface", required=True)
    p.add_argument("--shears")
    p.add_argument("--shears-file")
    p.add_argument("--edge", required=True)
    p.add_argument("--output")
    _add_common(p)
    p.set_defaults(func=cmd_flip)

    p = sub.add_parser("orbit-count", help="flip-orbit norm-ball counts")
    p.add_argument("--surface", required=True)
    p.add_argument("--shears")
    p.add_argument("--shears-file")
    p.add_argument("--norm", default="euclidean", choices=("euclidean", "sup", "l1"))
    p.add_argument("--Lmax", type=float, required=True)
    p.add_argument("--grid", type=int, default=30)
    p.add_argument("--max-nodes", type=int, default=200_000)
    p.add_argument("--margin", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_orbit_count)

    p = sub.add_parser("volume", help="Monte Carlo norm-ball volume in shear space")
    p.add_argument("--surface", required=True)
    p.add_argument("--norm", default="euclidean", choices=("euclidean", "sup", "l1"))
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--output")
    _add_common(p)
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("apl-check", help="asymptotic linearity scan along a ray")
    p.add_argument("--demo", choices=("arccosh",))
    p.add_argument("--surface", default="s_1_1")
    p.add_argument("--edge", default="e1")
    p.add_argument("--length", type=float, default=2.0)
    p.add_argument("--tmin", type=float, default=1.0)
    p.add_argument("--tmax", type=float, default=30.0)
    p.add_argument("--points", type=int, default=40)
    _add_common(p)
    p.set_defaults(func=cmd_apl_check)

    p = sub.add_parser("bounding-check", help="sup (l + |tau|)/norm over an orbit sample")
    p.add_argument("--surface", default="s_1_1")
    p.add_argument("--shears")
    p.add_argument("--shears-file")
    p.add_argument("--norm", default="euclidean", choices=("euclidean", "sup", "l1"))
    p.add_argument("--Lmax", type=float, default=30.0)
    p.add_argument("--max-nodes", type=int, default=200_000)
    p.add_argument("--margin", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_bounding_check)

    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        build_parser().print_help()
        return 0 if argv else 64
    if argv[0] not in COMMANDS:
        print(f"unknown command {argv[0]!r}; commands: {', '.join(COMMANDS)}",
              file=sys.stderr)
        return 64
    args = build_parser().parse_args(argv)
    if "SHEARLAB_SEED" in os.environ and hasattr(args, "seed"):
        args.seed = int(os.environ["SHEARLAB_SEED"])
    try:
        return args.func(args)
    except (ValidationError, GeometryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
