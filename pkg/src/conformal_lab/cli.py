"""Command-line front end: meshes, metrics, spectra, reports, sweeps.

Exit codes: 0 everything passed, 1 a verification failed, 2 the request
itself was unusable (bad flags, infeasible parameters, malformed config),
3 a numerical routine broke down.  Argparse handles its own usage errors
with code 2, which matches the convention.
"""

import argparse
import json
import sys

from . import conformal, entropy, families, report, spectral
from .errors import (
    ConstructionError,
    DomainError,
    LabError,
    MeshQualityError,
    NormalizationError,
    NumericError,
    ParameterError,
    PrecisionError,
    RangeError,
    TopologyError,
    UsageError,
)
from .surface import HyperbolicSurface, build_mesh

USAGE_ERRORS = (ParameterError, UsageError, DomainError, RangeError)
NUMERIC_ERRORS = (
    NumericError,
    PrecisionError,
    NormalizationError,
    ConstructionError,
    TopologyError,
    MeshQualityError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conformal-lab",
        description="Constructive bounds for conformal deformations of a "
        "closed genus-2 hyperbolic surface.",
    )
    parser.add_argument(
        "--threads", type=int, default=None, metavar="N",
        help="cap worker threads used by compiled kernels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    mesh = sub.add_parser("mesh", help="mesh operations")
    mesh_sub = mesh.add_subparsers(dest="mesh_command", required=True)
    mesh_build = mesh_sub.add_parser("build", help="subdivide and glue the octagon")
    mesh_build.add_argument("--level", type=int, required=True)
    mesh_build.add_argument("--out", default=None, help="write mesh JSON here")

    metric = sub.add_parser("metric", help="metric constructors")
    metric_sub = metric.add_subparsers(dest="metric_command", required=True)
    make = metric_sub.add_parser("make", help="build a family member")
    make.add_argument("--family", required=True, choices=families.FAMILY_NAMES)
    make.add_argument("--eps", type=float, default=None)
    make.add_argument("--delta", type=float, default=None)
    make.add_argument("--amplitude", type=float, default=None)
    make.add_argument("--a", type=float, default=None, help="cylinder scale")
    make.add_argument("--neck", type=float, default=None, help="cylinder neck value")
    make.add_argument("--match-radius", type=float, default=None)
    make.add_argument("--out", default=None, help="write descriptor JSON here")

    spectrum = sub.add_parser("spectrum", help="eigenvalues of a saved metric")
    spectrum.add_argument("--metric", required=True, help="descriptor JSON path")
    spectrum.add_argument("--k", type=int, required=True)
    spectrum.add_argument("--level", type=int, default=3)
    spectrum.add_argument("--out", default=None, help="write spectrum CSV here")

    verify = sub.add_parser("verify", help="full bound report for a saved metric")
    verify.add_argument("--metric", required=True, help="descriptor JSON path")
    verify.add_argument("--report", default=None, help="write report JSON here")
    verify.add_argument("--level", type=int, default=3)
    verify.add_argument("--k", type=int, default=None)

    sweep = sub.add_parser("sweep", help="tabulate families over a grid")
    sweep.add_argument("--config", required=True, help="config JSON path")
    sweep.add_argument("--out", default=None, help="write sweep CSV here")
    sweep.add_argument("--level", type=int, default=None, help="override config level")

    ent = sub.add_parser("entropy", help="closed-form entropy bounds")
    ent_sub = ent.add_subparsers(dest="entropy_command", required=True)
    coding = ent_sub.add_parser("coding", help="ball-packing entropy bound")
    coding.add_argument("--volume", type=float, required=True)
    coding.add_argument("--dim", type=int, required=True)
    coding.add_argument("--rho", type=float, required=True)

    return parser


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise UsageError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "version" not in doc:
        raise UsageError(f"config file {path} must carry a top-level version")
    if doc["version"] != 1:
        raise UsageError(f"unsupported config version {doc['version']!r}")
    return doc


def _write_or_print(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _cmd_mesh_build(args) -> int:
    surface = HyperbolicSurface()
    mesh = build_mesh(surface.domain, args.level)
    if args.out is not None:
        with open(args.out, "w") as fh:
            fh.write(mesh.to_json())
    print(
        f"level {mesh.level}: {mesh.n_rep} vertices, {mesh.n_tri} triangles, "
        f"chi={mesh.euler_characteristic()}, "
        f"sigma-area={mesh.total_area_sigma():.12f}"
    )
    return 0


def _cmd_metric_make(args) -> int:
    surface = HyperbolicSurface()
    params = {}
    if args.family in ("shrinker", "stretcher", "dumbbell"):
        if args.eps is None or args.delta is None:
            raise UsageError(f"family '{args.family}' needs --eps and --delta")
        params.update(eps=args.eps, delta=args.delta)
    elif args.family == "nonpositive_radial":
        if args.amplitude is None:
            raise UsageError("family 'nonpositive_radial' needs --amplitude")
        params.update(amplitude=args.amplitude)
    elif args.family == "cylinder":
        if args.a is not None:
            params.update(a=args.a)
        if args.neck is not None:
            params.update(neck=args.neck)
        if args.match_radius is not None:
            params.update(match_radius=args.match_radius)
    metric = families.make(surface, args.family, **params)
    doc = conformal.to_descriptor(metric)
    text = json.dumps(doc, indent=2) + "\n"
    _write_or_print(text, args.out)
    if args.out is not None:
        print(f"{args.family}: descriptor written to {args.out}")
    return 0


def _load_metric(path, surface):
    try:
        doc = conformal.load_descriptor(path)
    except FileNotFoundError as exc:
        raise UsageError(f"metric descriptor not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"descriptor {path} is not valid JSON: {exc}") from exc
    return conformal.from_descriptor(doc, surface=surface)


def _cmd_spectrum(args) -> int:
    surface = HyperbolicSurface()
    metric = _load_metric(args.metric, surface)
    if not isinstance(metric, conformal.ConformalMetric):
        raise UsageError(
            f"family '{metric.family}' has no assembled spectrum"
        )
    mesh = build_mesh(surface.domain, args.level)
    result = spectral.eigenvalues(spectral.assemble(metric, mesh), args.k)
    _write_or_print(result.to_csv(), args.out)
    if args.out is not None:
        print(
            f"lambda_0..lambda_{args.k} written to {args.out} "
            f"(lambda_1={result.eigenvalues[1]:.9g})"
            if args.k >= 1
            else f"lambda_0 written to {args.out}"
        )
    return 0


def _cmd_verify(args) -> int:
    surface = HyperbolicSurface()
    metric = _load_metric(args.metric, surface)
    config = {}
    if args.k is not None:
        config["k"] = args.k
    mesh = None
    if getattr(metric, "family", None) != "cylinder":
        mesh = build_mesh(surface.domain, args.level)
    rep = report.verify_metric(metric, mesh, config)
    if args.report is not None:
        rep.write(args.report)
    counts = {}
    for e in rep.entries:
        counts[e.status] = counts.get(e.status, 0) + 1
    summary = ", ".join(f"{v} {k}" for k, v in sorted(counts.items()))
    print(f"{metric.family}: {summary}; report "
          f"{'PASS' if rep.passed else 'FAIL'}")
    if not rep.passed:
        for e in rep.entries:
            if e.failed:
                print(f"  FAIL {e.name}: {e.lhs!r} {e.relation} {e.rhs!r} "
                      f"margin {e.margin!r} {e.detail}")
        return 1
    return 0


def _cmd_sweep(args) -> int:
    doc = load_config(args.config)
    level = args.level if args.level is not None else doc.get("level", 3)
    grid = doc.get("grid")
    config = {
        k: doc[k]
        for k in report.DEFAULT_CONFIG
        if k in doc
    }
    surface = HyperbolicSurface()
    mesh = build_mesh(surface.domain, level)
    table = report.sweep(surface, mesh, grid, config)
    _write_or_print(table.to_csv(), args.out)
    bad = [r for r in table.rows if r["error"]]
    if args.out is not None:
        print(f"{len(table.rows)} rows written to {args.out}, "
              f"{len(bad)} with errors")
    if bad:
        for row in bad:
            print(f"  ERROR {row['family']} "
                  f"eps={row['eps']} delta={row['delta']} "
                  f"amplitude={row['amplitude']}: {row['error']}")
        return 1
    return 0


def _cmd_entropy_coding(args) -> int:
    bound = entropy.coding_entropy_bound(args.volume, args.dim, args.rho)
    count = entropy.coding_ball_count(args.volume, args.dim, args.rho)
    print(f"coding bound: ln({count}) / {0.25 * args.rho!r} = {bound!r}")
    return 0


def _dispatch(args) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise UsageError(f"--threads must be >= 1, got {args.threads}")
        try:
            import numba

            numba.set_num_threads(args.threads)
        except ImportError:
            pass
    if args.command == "mesh":
        return _cmd_mesh_build(args)
    if args.command == "metric":
        return _cmd_metric_make(args)
    if args.command == "spectrum":
        return _cmd_spectrum(args)
    if args.command == "verify":
        return _cmd_verify(args)
    if args.command == "sweep":
        return _cmd_sweep(args)
    if args.command == "entropy":
        return _cmd_entropy_coding(args)
    raise UsageError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NUMERIC_ERRORS as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
