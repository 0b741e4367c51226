"""Command-line interface: ``frenetshape {synth,estimate,distance,geodesic,matrix}``.

Exit codes
----------
0   success
2   usage error
10  degenerate curve (zero length or zero speed)
11  not a Frenet curve
12  vanishing curvature
13  estimation failure
14  input/output error
15  any other shape error
16  partial failure (some matrix cells could not be computed)
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import synth as synth_mod
from .errors import (
    DegenerateCurve,
    EstimationError,
    NotFrenetCurve,
    ShapeError,
    VanishingCurvature,
    ZeroSpeed,
)
from .estimation import EstimationConfig, estimate_pipeline
from .io import atomic_write, envelope, read_curve, write_curve, write_json, write_matrix, write_table
from .render import curve_strip_svg, heatmap_svg
from .shape_analysis import METHODS, geodesic, pairwise_matrix, shape_distance

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DEGENERATE = 10
EXIT_NOT_FRENET = 11
EXIT_VANISHING = 12
EXIT_ESTIMATION = 13
EXIT_IO = 14
EXIT_OTHER = 15
EXIT_PARTIAL = 16

JOBS_ENV = "FRENETSHAPE_JOBS"
# coefficients of variation skip the boundary zones of the estimator
CV_INTERVAL = (0.05, 0.95)


class CurveFileError(Exception):
    """A curve file could not be read or parsed."""


def exit_code(exc):
    if isinstance(exc, (DegenerateCurve, ZeroSpeed)):
        return EXIT_DEGENERATE
    if isinstance(exc, NotFrenetCurve):
        return EXIT_NOT_FRENET
    if isinstance(exc, VanishingCurvature):
        return EXIT_VANISHING
    if isinstance(exc, EstimationError):
        return EXIT_ESTIMATION
    if isinstance(exc, (CurveFileError, OSError)):
        return EXIT_IO
    return EXIT_OTHER


def _load(path):
    try:
        return read_curve(path)
    except (OSError, ValueError) as exc:
        raise CurveFileError(str(exc)) from exc


# ---------------------------------------------------------------------------
# argument groups


def _add_estimation_flags(p):
    g = p.add_argument_group("curvature estimation")
    d = EstimationConfig()
    g.add_argument("--bandwidth", type=float, default=d.bandwidth, help="kernel half-width (fraction of [0, 1])")
    g.add_argument("--degree", type=int, default=None, help="local polynomial degree (default d + 1)")
    g.add_argument("--knots", type=int, default=d.n_knots, help="interior knots of the smoothing spline")
    g.add_argument("--order", type=int, default=d.order, help="spline order")
    g.add_argument("--lam", type=float, default=None, help="roughness penalty (default: GCV)")
    g.add_argument("--raw-method", choices=("ode", "extrinsic"), default=d.raw_method)
    g.add_argument("--no-positivity", action="store_true", help="skip the positivity constraint")
    g.add_argument("--no-arclength-pass", action="store_true", help="skip the arc-length refit")


def _config(args):
    return EstimationConfig(
        bandwidth=args.bandwidth,
        degree=args.degree,
        n_knots=args.knots,
        order=args.order,
        lam=args.lam,
        raw_method=args.raw_method,
        enforce_positivity=not args.no_positivity,
        arclength_pass=not args.no_arclength_pass,
    )


def _echo(args):
    return {k: v for k, v in vars(args).items() if k not in ("func", "argv")}


def _envelope(args, command, result, meta=None):
    return envelope(command, _echo(args), result, meta, argv=args.argv)


# ---------------------------------------------------------------------------
# synth


def _synth_one(args):
    kind = args.kind
    if kind == "peak-loop":
        return [synth_mod.peak_loop(args.location, args.amplitude, args.width, args.n, args.noise, args.seed)], ["peak_loop"]
    if kind == "peak-loop-set":
        curves = synth_mod.peak_loop_set(args.count, args.amplitude, args.width, args.n, seed=args.seed)
        return curves, [f"peak_loop_{k:02d}" for k in range(len(curves))]
    if kind == "helix3d":
        return [synth_mod.helix3d(args.radius, args.pitch, args.spins, args.n, args.noise, args.seed)], ["helix3d"]
    return [synth_mod.spiral2d(args.spins, args.scale, args.n, args.noise, args.seed)], ["spiral2d"]


def cmd_synth(args):
    out = Path(args.output_dir)
    curves, names = _synth_one(args)
    if args.name and len(curves) == 1:
        names = [args.name]
    manifest = []
    s = np.linspace(0.0, 1.0, args.truth_samples)
    for sc, name in zip(curves, names):
        write_curve(out / f"{name}.csv", sc.curve)
        entry = {"file": f"{name}.csv", "params": sc.params}
        if sc.theta is not None:
            vals = sc.theta(s)
            header = ["s"] + [f"theta{k + 1}" for k in range(vals.shape[1])]
            write_table(out / f"{name}_theta.csv", header, [s] + [vals[:, k] for k in range(vals.shape[1])])
            entry["truth"] = f"{name}_theta.csv"
        manifest.append(entry)
    write_json(out / args.manifest, _envelope(args, "synth", {"curves": manifest}))
    for e in manifest:
        print(out / e["file"])
    return EXIT_OK


# ---------------------------------------------------------------------------
# estimate


def cmd_estimate(args):
    curve = _load(args.file)
    config = _config(args)
    arc, theta, raw = estimate_pipeline(curve, config, return_raw=True)
    s = np.linspace(0.0, 1.0, args.samples)
    vals = theta(s)
    m = vals.shape[1]
    names = [f"theta{k + 1}" for k in range(m)]
    out = Path(args.output)
    write_table(out, ["s"] + names, [s] + [vals[:, k] for k in range(m)])
    raw_path = out.with_name(out.stem + "_raw.csv")
    write_table(
        raw_path,
        ["s"] + names + ["weight"],
        [raw.positions] + [raw.values[:, k] for k in range(m)] + [raw.weights],
    )
    result = {
        "curvature_file": str(out),
        "raw_file": str(raw_path),
        "mean": vals.mean(axis=0),
        "min": vals.min(axis=0),
        "max": vals.max(axis=0),
    }
    meta = {"samples": curve.n, "dim": curve.dim, "config": config.as_dict()}
    write_json(args.envelope or out.with_suffix(".json"), _envelope(args, "estimate", result, meta))
    print(out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# distance


def cmd_distance(args):
    x0, x1 = _load(args.file0), _load(args.file1)
    config = _config(args)
    dist = shape_distance(args.method, x0, x1, config=config, n=args.n)
    result = {"distance": dist.value, "legs": dist.legs}
    reg = dist.registration
    if reg is not None:
        result["warp"] = {"t": reg.warp.grid, "h": reg.warp.values}
        result["registration_cost"] = reg.cost
        if reg.rotation is not None:
            result["rotation"] = reg.rotation
    meta = {"n": args.n or max(x0.n, x1.n), "config": config.as_dict()}
    env = _envelope(args, "distance", result, meta)
    if args.output:
        write_json(args.output, env)
    print(f"{dist.value:.17g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# geodesic


def cmd_geodesic(args):
    x0, x1 = _load(args.file0), _load(args.file1)
    config = _config(args)
    if args.taus < 2:
        raise ValueError("--taus must be at least 2")
    taus = np.linspace(0.0, 1.0, args.taus)
    path = geodesic(args.method, x0, x1, taus, config=config, n=args.n)
    out = Path(args.output_dir)
    snap_config = EstimationConfig(**{**config.as_dict(), "enforce_positivity": False})
    files, errors = [], {str(k): v for k, v in path.errors.items()}
    s = np.linspace(0.0, 1.0, args.samples)
    for k, (tau, snap) in enumerate(zip(taus, path.snapshots)):
        entry = {"tau": tau}
        if snap is None:
            files.append(entry)
            continue
        name = f"snapshot_{k:02d}"
        write_curve(out / f"{name}.csv", snap)
        entry["curve"] = f"{name}.csv"
        try:
            _, th = estimate_pipeline(snap, snap_config)
            vals = th(s)
            header = ["s"] + [f"theta{j + 1}" for j in range(vals.shape[1])]
            write_table(out / f"{name}_curvature.csv", header, [s] + [vals[:, j] for j in range(vals.shape[1])])
            entry["curvature"] = f"{name}_curvature.csv"
            inner = vals[(s >= CV_INTERVAL[0]) & (s <= CV_INTERVAL[1])]
            entry["curvature_cv"] = inner.std(axis=0) / np.maximum(np.abs(inner.mean(axis=0)), 1e-300)
        except ShapeError as exc:
            errors[f"estimate:{tau}"] = f"{type(exc).__name__}: {exc}"
        files.append(entry)
    if not args.no_svg:
        pts = [np.empty((0, x0.dim)) if p is None else p.points for p in path.snapshots]
        atomic_write(out / "geodesic.svg", curve_strip_svg(pts, [f"tau={t:.2f}" for t in taus]))
    result = {"snapshots": files, "errors": errors}
    if path.warp is not None:
        result["warp"] = {"t": path.warp.grid, "h": path.warp.values}
    meta = {"display": path.meta, "config": config.as_dict(), "cv_interval": CV_INTERVAL}
    write_json(out / "geodesic.json", _envelope(args, "geodesic", result, meta))
    print(out / "geodesic.json")
    return EXIT_OK


# ---------------------------------------------------------------------------
# matrix


def _default_jobs():
    try:
        return int(os.environ.get(JOBS_ENV, "1"))
    except ValueError:
        return 1


def cmd_matrix(args):
    files = [Path(f) for f in args.files]
    labels = [f.stem for f in files]
    curves, bad = [], {}
    for k, f in enumerate(files):
        try:
            curves.append(_load(f))
        except CurveFileError as exc:
            curves.append(None)
            bad[k] = str(exc)
    good = [k for k, c in enumerate(curves) if c is not None]
    k_all = len(files)
    values = np.full((k_all, k_all), np.nan)
    errors = {f"{labels[k]}": msg for k, msg in bad.items()}
    if len(good) >= 2:
        dm = pairwise_matrix(
            [curves[k] for k in good],
            args.method,
            config=_config(args),
            n=args.n,
            jobs=args.jobs,
            labels=[labels[k] for k in good],
        )
        values[np.ix_(good, good)] = dm.values
        for (i, j), msg in dm.errors.items():
            errors[f"{labels[good[i]]}/{labels[good[j]]}"] = msg
    elif len(good) == 1:
        values[good[0], good[0]] = 0.0
    out = Path(args.output)
    write_matrix(out, labels, values)
    if not args.no_svg:
        atomic_write(out.with_suffix(".svg"), heatmap_svg(values, labels, title=f"{args.method} distances"))
    result = {"matrix_file": str(out), "labels": labels, "values": values, "errors": errors}
    write_json(out.with_suffix(".json"), _envelope(args, "matrix", result, {"config": _config(args).as_dict()}))
    print(out)
    return EXIT_PARTIAL if errors or not np.all(np.isfinite(values)) else EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser():
    p = argparse.ArgumentParser(prog="frenetshape", description="Elastic shape analysis of Euclidean curves.")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("synth", help="generate synthetic curves")
    ps.add_argument("kind", choices=("peak-loop", "peak-loop-set", "helix3d", "spiral2d"))
    ps.add_argument("--n", type=int, default=512, help="number of samples")
    ps.add_argument("--seed", type=int, default=None)
    ps.add_argument("--noise", type=float, default=0.0, help="Gaussian point-noise standard deviation")
    ps.add_argument("--location", type=float, default=0.5)
    ps.add_argument("--amplitude", type=float, default=60.5)
    ps.add_argument("--width", type=float, default=0.15)
    ps.add_argument("--count", type=int, default=20, help="curves in a peak-loop set")
    ps.add_argument("--radius", type=float, default=1.0)
    ps.add_argument("--pitch", type=float, default=0.5)
    ps.add_argument("--spins", type=float, default=1.0)
    ps.add_argument("--scale", type=float, default=1.0)
    ps.add_argument("--name", default=None, help="file stem for a single curve")
    ps.add_argument("--truth-samples", type=int, default=1001)
    ps.add_argument("--manifest", default="manifest.json")
    ps.add_argument("-o", "--output-dir", default=".")
    ps.set_defaults(func=cmd_synth)

    pe = sub.add_parser("estimate", help="estimate Frenet curvatures of a curve file")
    pe.add_argument("file")
    pe.add_argument("-o", "--output", required=True, help="curvature CSV (s,theta1,...)")
    pe.add_argument("--envelope", default=None, help="result JSON (default: next to the CSV)")
    pe.add_argument("--samples", type=int, default=1001)
    _add_estimation_flags(pe)
    pe.set_defaults(func=cmd_estimate)

    pd = sub.add_parser("distance", help="shape distance between two curve files")
    pd.add_argument("file0")
    pd.add_argument("file1")
    pd.add_argument("--method", choices=METHODS, required=True)
    pd.add_argument("--n", type=int, default=None, help="common grid size")
    pd.add_argument("-o", "--output", default=None, help="result JSON")
    _add_estimation_flags(pd)
    pd.set_defaults(func=cmd_distance)

    pg = sub.add_parser("geodesic", help="geodesic path between two curve files")
    pg.add_argument("file0")
    pg.add_argument("file1")
    pg.add_argument("--method", choices=METHODS, required=True)
    pg.add_argument("--taus", type=int, default=5, help="number of snapshots including endpoints")
    pg.add_argument("--n", type=int, default=None)
    pg.add_argument("--samples", type=int, default=1001, help="samples of each curvature CSV")
    pg.add_argument("--no-svg", action="store_true")
    pg.add_argument("-o", "--output-dir", default=".")
    _add_estimation_flags(pg)
    pg.set_defaults(func=cmd_geodesic)

    pm = sub.add_parser("matrix", help="pairwise distance matrix of curve files")
    pm.add_argument("files", nargs="+")
    pm.add_argument("--method", choices=METHODS, required=True)
    pm.add_argument("--jobs", type=int, default=_default_jobs(), help=f"parallel jobs (default ${JOBS_ENV} or 1)")
    pm.add_argument("--n", type=int, default=None)
    pm.add_argument("--no-svg", action="store_true")
    pm.add_argument("-o", "--output", required=True, help="matrix CSV")
    _add_estimation_flags(pm)
    pm.set_defaults(func=cmd_matrix)
    return p


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(argv)
    args.argv = argv
    try:
        return args.func(args)
    except (ShapeError, CurveFileError, OSError) as exc:
        print(f"frenetshape {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code(exc)
    except ValueError as exc:
        print(f"frenetshape {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
