"""Command-line front end.

Subcommands: ``mean`` (Frechet mean + sandwich covariance of a point file),
``test2`` (two-sample chart test), ``fiber`` (per-site two-sample sweep over
a tensor dataset with BH/Bonferroni), ``simulate`` (Monte Carlo experiment
from a JSON descriptor), ``gen-fiber`` (synthetic tensor dataset).

Exit codes: 0 success, 2 input error, 3 convergence failure, 4 partial
numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import (
    FrechetStatsError,
    InvalidDescriptor,
    InvalidPoint,
    NearSingularCovariance,
    NearSingularHessian,
    NoConvergence,
)
from .estimator import estimate_mean, sandwich_covariance
from .fiber import (
    FiberParseError,
    fiber_site_tests,
    generate_fiber_dataset,
    parse_fiber_csv,
    write_fiber_csv,
    write_site_csv,
)
from .geometry import euclidean_point, openbook_point, spd_point, sphere_point
from .inference import two_sample_test
from .simulate import (
    GaussianDescriptor,
    OpenBookDescriptor,
    Sampler,
    SPDLogGaussianDescriptor,
    SphereCapDescriptor,
    SphereTwoPointDescriptor,
    mc_consistency,
    mc_coverage,
    mc_stickiness,
    mc_type1,
)
from .spaces import EuclideanSpace, OpenBookSpace, SPDSpace, SphereSpace

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOCONVERGENCE = 3
EXIT_PARTIAL = 4

SPD_HEADER = ("a11", "a12", "a13", "a22", "a23", "a33")


class CLIInputError(ValueError):
    pass


def _fail(message, code):
    print(f"error: {message}", file=sys.stderr)
    return code


def _normalize_metric(metric):
    return metric.replace("-", "_") if metric else None


def _upper_to_matrix(values):
    a11, a12, a13, a22, a23, a33 = values
    return np.array([[a11, a12, a13], [a12, a22, a23], [a13, a23, a33]])


def load_points(path, space_kind, metric=None):
    """Read a point file (mandatory header line) into (space, sample)."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    rows = [(i + 1, ln.strip()) for i, ln in enumerate(lines) if ln.strip()]
    if not rows:
        raise CLIInputError(f"{path}: line 1: empty file, header expected")
    header_no, header = rows[0]
    columns = [c.strip() for c in header.split(",")]
    data_rows = rows[1:]
    if not data_rows:
        raise CLIInputError(f"{path}: line {header_no + 1}: no data rows")

    def parse_floats(lineno, parts, expected):
        if len(parts) != expected:
            raise CLIInputError(f"{path}: line {lineno}: expected {expected} columns")
        try:
            return [float(v) for v in parts]
        except ValueError as exc:
            raise CLIInputError(f"{path}: line {lineno}: {exc}") from exc

    sample = []
    if space_kind in ("euclidean", "sphere"):
        dim = len(columns)
        if dim < 1 or (space_kind == "sphere" and dim < 2):
            raise CLIInputError(f"{path}: line {header_no}: too few coordinate columns")
        metric = _normalize_metric(metric) or "intrinsic"
        space = (
            EuclideanSpace(dim)
            if space_kind == "euclidean"
            else SphereSpace(dim, metric)
        )
        make = euclidean_point if space_kind == "euclidean" else sphere_point
        for lineno, line in data_rows:
            values = parse_floats(lineno, [c.strip() for c in line.split(",")], dim)
            try:
                sample.append(make(values))
            except InvalidPoint as exc:
                raise CLIInputError(f"{path}: line {lineno}: {exc}") from exc
    elif space_kind == "spd":
        if tuple(columns) != SPD_HEADER:
            raise CLIInputError(
                f"{path}: line {header_no}: expected header {','.join(SPD_HEADER)!r}"
            )
        space = SPDSpace(3, _normalize_metric(metric) or "log_euclidean")
        for lineno, line in data_rows:
            values = parse_floats(lineno, [c.strip() for c in line.split(",")], 6)
            try:
                sample.append(spd_point(_upper_to_matrix(values)))
            except InvalidPoint as exc:
                raise CLIInputError(f"{path}: line {lineno}: {exc}") from exc
    elif space_kind == "openbook":
        if len(columns) < 2 or columns[0] != "leaf":
            raise CLIInputError(
                f"{path}: line {header_no}: expected header 'leaf,x0[,x1,...]'"
            )
        spine_dim = len(columns) - 2
        max_leaf = 0
        for lineno, line in data_rows:
            parts = [c.strip() for c in line.split(",")]
            values = parse_floats(lineno, parts, len(columns))
            leaf = int(values[0])
            if leaf != values[0]:
                raise CLIInputError(f"{path}: line {lineno}: leaf must be an integer")
            try:
                sample.append(openbook_point(leaf, values[1:]))
            except InvalidPoint as exc:
                raise CLIInputError(f"{path}: line {lineno}: {exc}") from exc
            max_leaf = max(max_leaf, leaf)
        space = OpenBookSpace(max(2, max_leaf), spine_dim)
    else:
        raise CLIInputError(f"unknown space {space_kind!r}")
    return space, sample


def _point_json(point):
    if point.kind == "spd":
        m = point.data
        return [m[0, 0], m[0, 1], m[0, 2], m[1, 1], m[1, 2], m[2, 2]]
    if point.kind == "openbook":
        return {"leaf": point.leaf, "coords": list(point.data)}
    return list(point.data)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):  # before int: bool subclasses int
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def _emit_json(payload, output):
    text = json.dumps(_jsonable(payload), indent=2) + "\n"
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_mean(args):
    try:
        space, sample = load_points(args.input, args.space, args.metric)
    except (CLIInputError, OSError) as exc:
        return _fail(str(exc), EXIT_INPUT)
    try:
        fit = estimate_mean(space, sample)
    except NoConvergence as exc:
        return _fail(f"mean estimation did not converge: {exc}", EXIT_NOCONVERGENCE)
    except FrechetStatsError as exc:
        # degenerate geometry (cut locus, non-unique projection, ...)
        return _fail(f"mean estimation failed: {exc}", EXIT_NOCONVERGENCE)
    code = EXIT_OK
    payload = {
        "space": args.space,
        "metric": getattr(space, "metric", None),
        "n": fit.n,
        "strategy": fit.strategy,
        "iterations": fit.iterations,
        "grad_norm": fit.grad_norm,
        "mean": _point_json(fit.mean),
        "chart_coords": fit.chart_coords,
    }
    try:
        fit = sandwich_covariance(space, sample, fit)
        payload["asym_cov_over_n"] = fit.asym_cov / fit.n
        payload["lambda_cond"] = fit.lambda_cond
        payload["lambda_pd"] = fit.lambda_pd
    except NearSingularHessian as exc:
        payload["asym_cov_over_n"] = None
        payload["covariance_error"] = str(exc)
        code = EXIT_PARTIAL
    _emit_json(payload, args.output)
    return code


def cmd_test2(args):
    try:
        space, sample_x = load_points(args.input_x, args.space, args.metric)
        _, sample_y = load_points(args.input_y, args.space, args.metric)
    except (CLIInputError, OSError) as exc:
        return _fail(str(exc), EXIT_INPUT)
    try:
        res = two_sample_test(space, sample_x, sample_y)
    except NearSingularCovariance as exc:
        return _fail(str(exc), EXIT_PARTIAL)
    except FrechetStatsError as exc:
        return _fail(str(exc), EXIT_NOCONVERGENCE)
    except ValueError as exc:
        return _fail(str(exc), EXIT_INPUT)
    _emit_json(
        {
            "space": args.space,
            "metric": getattr(space, "metric", None),
            "statistic": res.statistic,
            "df": res.df,
            "p_value": res.p_value,
            "n1": res.n1,
            "n2": res.n2,
            "rejected_at_alpha": bool(res.p_value <= args.alpha),
            "alpha": args.alpha,
        },
        args.output,
    )
    return EXIT_OK


def cmd_fiber(args):
    try:
        with open(args.input) as fh:
            dataset = parse_fiber_csv(fh)
    except (FiberParseError, OSError) as exc:
        return _fail(str(exc), EXIT_INPUT)
    for site in range(dataset.n_sites):
        g0, g1 = dataset.site_samples(site)
        if not g0 or not g1:
            return _fail(f"site {site} lacks one of the groups", EXIT_INPUT)
    metric = _normalize_metric(args.metric) or "log_euclidean"
    results, summary = fiber_site_tests(dataset, metric=metric, alpha=args.alpha)
    with open(args.output, "w") as fh:
        write_site_csv(results, fh)
    _emit_json(summary, None)
    return EXIT_PARTIAL if summary["failed_sites"] else EXIT_OK


def _space_from_config(cfg):
    kind = cfg.get("kind")
    if kind == "euclidean":
        return EuclideanSpace(int(cfg["dim"]))
    if kind == "sphere":
        return SphereSpace(int(cfg["ambient_dim"]), _normalize_metric(cfg.get("metric")) or "intrinsic")
    if kind == "spd":
        return SPDSpace(int(cfg["p"]), _normalize_metric(cfg.get("metric")) or "log_euclidean")
    if kind == "openbook":
        return OpenBookSpace(int(cfg["leaves"]), int(cfg["spine_dim"]))
    raise InvalidDescriptor(f"unknown space kind {kind!r}")


def _descriptor_from_config(cfg):
    kind = cfg.get("kind")
    if kind == "gaussian":
        return GaussianDescriptor(mean=tuple(cfg["mean"]), cov=cfg.get("cov", 1.0))
    if kind == "cap_uniform":
        return SphereCapDescriptor(center=tuple(cfg["center"]), radius=float(cfg["radius"]))
    if kind == "two_point":
        return SphereTwoPointDescriptor(a=tuple(cfg["a"]), b=tuple(cfg["b"]))
    if kind == "log_gaussian":
        return SPDLogGaussianDescriptor(
            mean_log=tuple(tuple(row) for row in cfg["mean_log"]),
            scale=float(cfg["scale"]),
        )
    if kind == "openbook":
        return OpenBookDescriptor(
            leaf_probs=tuple(cfg["leaf_probs"]),
            x0=cfg.get("x0", ("exponential", 1.0)),
            spine_mean=tuple(cfg.get("spine_mean", ())),
            spine_sd=float(cfg.get("spine_sd", 1.0)),
        )
    raise InvalidDescriptor(f"unknown distribution kind {kind!r}")


def cmd_simulate(args):
    try:
        with open(args.descriptor) as fh:
            cfg = json.load(fh)
        space = _space_from_config(cfg["space"])
        descriptor = _descriptor_from_config(cfg["distribution"])
        sampler = Sampler(space=space, descriptor=descriptor, seed=args.seed)
        reps = int(cfg.get("reps", 200))
        if args.experiment == "coverage":
            report = mc_coverage(
                sampler,
                n=int(cfg["n"]),
                reps=reps,
                alpha=float(cfg.get("alpha", args.alpha)),
                derivatives=cfg.get("derivatives", "auto"),
            )
        elif args.experiment == "stickiness":
            report = mc_stickiness(sampler, n=int(cfg["n"]), reps=reps)
        elif args.experiment == "type1":
            report = mc_type1(
                space,
                sampler,
                n1=int(cfg["n1"]),
                n2=int(cfg["n2"]),
                reps=reps,
                alpha=float(cfg.get("alpha", args.alpha)),
            )
        else:
            table = mc_consistency(space, sampler, [int(v) for v in cfg["n_grid"]], reps)
            _emit_json(
                {
                    "experiment": "consistency",
                    "reps": reps,
                    "seed": args.seed,
                    "table": [[n, err] for n, err in table],
                },
                args.output,
            )
            return EXIT_OK
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError, InvalidDescriptor) as exc:
        return _fail(f"descriptor error: {exc!r}", EXIT_INPUT)
    except FrechetStatsError as exc:
        # too many failed replications, or numeric degeneracy mid-experiment
        return _fail(str(exc), EXIT_PARTIAL)
    payload = {
        "experiment": report.experiment,
        "reps": report.reps,
        "seed": args.seed,
        "estimate": report.estimate,
        "std_error": report.std_error,
        "failures": report.failures,
    }
    for key in ("fractions", "target", "alpha", "n", "n1", "n2", "df"):
        if key in report.details:
            payload[key] = report.details[key]
    _emit_json(payload, args.output)
    return EXIT_OK


def _parse_site_ranges(text):
    sites = set()
    if not text:
        return sites
    for chunk in text.split(","):
        chunk = chunk.strip()
        if "-" in chunk:
            lo, hi = chunk.split("-", 1)
            sites.update(range(int(lo), int(hi) + 1))
        elif chunk:
            sites.add(int(chunk))
    return sites


def cmd_gen_fiber(args):
    try:
        effect_sites = _parse_site_ranges(args.effect_sites)
        dataset = generate_fiber_dataset(
            n_group1=args.group1_size,
            n_group0=args.group0_size,
            n_sites=args.sites,
            effect_sites=effect_sites,
            effect_size=args.effect_size,
            noise_scale=args.noise_scale,
            seed=args.seed,
        )
    except ValueError as exc:
        return _fail(str(exc), EXIT_INPUT)
    with open(args.output, "w") as fh:
        write_fiber_csv(dataset, fh)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="frechetstats",
        description="Frechet means and nonparametric inference on non-Euclidean spaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mean", help="Frechet mean and sandwich covariance of a point file")
    p.add_argument("input")
    p.add_argument("--space", required=True, choices=["euclidean", "sphere", "spd", "openbook"])
    p.add_argument("--metric", help="sphere: intrinsic|extrinsic; spd: euclidean|log-euclidean")
    p.add_argument("--output")
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("test2", help="two-sample chart test between two point files")
    p.add_argument("input_x")
    p.add_argument("input_y")
    p.add_argument("--space", required=True, choices=["euclidean", "sphere", "spd", "openbook"])
    p.add_argument("--metric")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--output")
    p.set_defaults(func=cmd_test2)

    p = sub.add_parser("fiber", help="per-site two-sample sweep with BH/Bonferroni")
    p.add_argument("input")
    p.add_argument("--metric", default="log-euclidean", choices=["euclidean", "log-euclidean"])
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--output", required=True, help="per-site CSV path")
    p.set_defaults(func=cmd_fiber)

    p = sub.add_parser("simulate", help="Monte Carlo experiment from a JSON descriptor")
    p.add_argument("descriptor")
    p.add_argument(
        "--experiment",
        required=True,
        choices=["coverage", "stickiness", "type1", "consistency"],
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen-fiber", help="generate a synthetic fiber-tract tensor dataset")
    p.add_argument("--group1-size", type=int, default=28)
    p.add_argument("--group0-size", type=int, default=18)
    p.add_argument("--sites", type=int, default=75)
    p.add_argument("--effect-sites", default="", help="e.g. '10-20' or '3,7,12-15'")
    p.add_argument("--effect-size", type=float, default=0.3)
    p.add_argument("--noise-scale", type=float, default=0.15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_gen_fiber)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
