"""Command-line front end: ``lcricci <subcommand> ...``.

Exit codes: 0 when every applicable check passes (or the command simply
produced output), 1 when a check fails or a numerical error occurs, 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import json
import re
import sys

import numpy as np

from . import __version__, quadrature
from .connection import lc_coefficients
from .curvature import chern_curvature, chern_ricci, chern_scalar, lc_curvature, trace_form
from .fielddsl import FieldSyntaxError, parse
from .hodge import dbar_star_omega_lambda, second_order_form, torsion_form
from .metrics import (
    ZOO,
    AnalyticJetUnavailable,
    DomainError,
    MetricSpecError,
    conformal_rescale,
    evaluate_metric,
    parse_metric,
)
from .suite import (
    CHECKS,
    METRIC_SETS,
    SUITES,
    SuiteConfig,
    SuiteError,
    render_table,
    resolve_metrics,
    run_suite,
)


class UsageError(Exception):
    pass


_COMPLEX = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?"
                      r"([+-]((\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)?i)?$|"
                      r"^[+-]?((\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)?i$")


def parse_complex(text: str) -> complex:
    """Parse ``a+bi``, ``a``, ``bi`` or ``-i`` into a complex number."""
    t = text.strip().replace(" ", "")
    if not _COMPLEX.match(t):
        raise UsageError(f"cannot parse complex coordinate {text!r} (expected a+bi)")
    t = re.sub(r"(^|[+-])i$", r"\g<1>1i", t)
    return complex(t.replace("i", "j"))


def parse_point(text: str) -> np.ndarray:
    return np.array([parse_complex(part) for part in text.split(",")], dtype=complex)


def labeled(array, indices: str) -> dict:
    a = np.asarray(array)
    return {"indices": indices, "shape": list(a.shape), "re": np.real(a).tolist(),
            "im": np.imag(a).tolist()}


def tensor_payload(spec, p, mode="analytic", step=None) -> dict:
    m = evaluate_metric(spec, p, mode, step)
    c = lc_coefficients(m)
    ric = chern_ricci(m)
    lc = lc_curvature(m, c)
    return {
        "metric": spec.to_string(),
        "point": labeled(m.z, "[k] = z^k"),
        "mode": mode,
        "g": labeled(m.g, "[i][j] = g_{i jbar}"),
        "g_inv": labeled(m.g_inv, "[i][j] = g^{i jbar}"),
        "det": float(m.det),
        "gamma_hol": labeled(c.gamma_hol, "[k][i][j] = Gamma^k_{ij}"),
        "gamma_mixed": labeled(c.gamma_mixed, "[k][i][j] = Gamma^k_{ibar j}"),
        "chern_full": labeled(chern_curvature(m), "[i][j][k][l] = R_{i jbar k lbar}"),
        "chern_ricci": labeled(ric.coeff, "[i][j] = R_{i jbar} (sqrt(-1) implicit)"),
        "chern_scalar": labeled(chern_scalar(m, ric), "s_C"),
        "lc_11": labeled(lc.lc_11, "[i][j][k][l] = frak r^l_{i jbar k}"),
        "lc_ricci": labeled(lc.lc_ricci.coeff, "[i][j] = frak r_{i jbar} (sqrt(-1) implicit)"),
        "lc_scalar": labeled(lc.lc_scalar, "s_LC"),
        "torsion": labeled(torsion_form(m).coeff, "[k][i][j] = T_{k i, jbar}, d omega = sqrt(-1) "
                                                  "sum_{k<i} T dz^k ^ dz^i ^ dzbar^j"),
        "dbar_star_omega": labeled(dbar_star_omega_lambda(m).coeff, "[i] = a_i, a_i dz^i"),
        "second_order_form": labeled(second_order_form(m).coeff,
                                     "[i][j] = coefficient of (d d^* + dbar dbar^*) omega / 2"),
        "trace_second_order": labeled(trace_form(second_order_form(m), m),
                                      "<(d d^* + dbar dbar^*) omega / 2, omega>"),
    }


def _spec_with_factor(text: str, factor):
    spec = parse_metric(text)
    if factor is not None:
        spec = conformal_rescale(spec, factor)
    return spec


def _emit(args, payload: dict, table: str | None = None):
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    if table is not None and not getattr(args, "json", False):
        print(table)
    else:
        print(text)


def cmd_list_metrics(args) -> int:
    entries = [{"name": name, "description": desc, "min_n": min_n}
               for name, (desc, _, min_n) in ZOO.items()]
    payload = {"metrics": entries, "metric_sets": {k: v for k, v in METRIC_SETS.items()},
               "suites": list(SUITES) + ["all"], "checks": [c.check_id for c in CHECKS]}
    width = max(len(e["name"]) for e in entries)
    lines = [f"{e['name'].ljust(width)}  {e['description']}" for e in entries]
    lines.append("")
    lines.append("metric sets: " + ", ".join(METRIC_SETS))
    lines.append("suites: " + ", ".join(payload["suites"]))
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_tensor(args) -> int:
    if not args.metric or len(args.metric) != 1:
        raise UsageError("tensor needs exactly one --metric")
    if args.at is None:
        raise UsageError("tensor needs --at <z1,z2,...>")
    spec = _spec_with_factor(args.metric[0], args.factor)
    p = parse_point(args.at)
    if p.size != spec.n:
        raise UsageError(f"--at has {p.size} coordinates but {spec.to_string()} has n = {spec.n}")
    try:
        spec.check_domain(p)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    _emit(args, tensor_payload(spec, p, args.deriv, args.step))
    return 0


def _suite_command(args, name: str) -> int:
    metrics = resolve_metrics(args.metric, args.metric_set)
    if not metrics:
        raise UsageError("give --metric and/or --metric-set")
    if args.factor is not None:
        metrics = [_spec_with_factor(m, args.factor).to_string() for m in metrics]
    for m in metrics:
        parse_metric(m)
    config = SuiteConfig(name, tuple(metrics), args.points, args.seed, args.tol, args.deriv,
                         args.step, args.resolution)
    report = run_suite(config)
    _emit(args, report, render_table(report))
    return 0 if report["overall_pass"] else 1


def cmd_check(args) -> int:
    return _suite_command(args, args.name)


def cmd_suite(args) -> int:
    if args.name not in SUITES and args.name != "all":
        raise UsageError(f"unknown suite {args.name!r}; choose from {', '.join(SUITES)}, all")
    return _suite_command(args, args.name)


def cmd_integrate(args) -> int:
    if not args.metric or len(args.metric) != 1:
        raise UsageError("integrate needs exactly one --metric")
    if args.integrand not in quadrature.INTEGRANDS:
        raise UsageError(f"unknown integrand {args.integrand!r}")
    if args.integrand == "ddbar_f" and args.factor is None:
        raise UsageError("integrand ddbar_f needs --factor")
    spec = parse_metric(args.metric[0])
    if args.factor is not None:
        parse(args.factor)
    resolution = args.resolution if args.resolution is not None else 8
    grid = quadrature.IntegrationGrid(spec.n, resolution, args.r_inner, 2 * args.r_inner)
    result = quadrature.integrate_top_form(spec, args.integrand, grid, args.deriv, args.step,
                                           args.factor)
    payload = {"version": __version__, **result.to_json()}
    if args.refine:
        study = quadrature.grid_refine_study(spec, args.integrand, resolution, args.deriv,
                                             args.step, args.factor, args.r_inner)
        payload["refinement"] = study.to_json()
    print(json.dumps(payload, indent=2))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(payload, indent=2) + "\n")
    return 0 if not args.refine or payload["refinement"]["certified"] else 1


def _positive(kind):
    def conv(text):
        try:
            v = kind(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}") from exc
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v

    return conv


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcricci",
        description="Chern and Levi-Civita curvature of Hermitian metrics, with identity checks.")
    parser.add_argument("--version", action="version", version=f"lcricci {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--metric", action="append", help="metric spec string (repeatable)")
    common.add_argument("--factor", help="conformal factor f: use exp(f) times the metric")
    common.add_argument("--step", type=_positive(float), help="finite-difference step")
    common.add_argument("--deriv", choices=("analytic", "fd"), default="analytic",
                        help="derivative jets: closed form or finite differences")
    common.add_argument("--out", help="write the JSON output to this path")
    common.add_argument("--json", action="store_true", help="print JSON instead of a table")

    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument("--metric-set", choices=sorted(METRIC_SETS))
    sweep.add_argument("--points", type=_positive(int), default=20)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--tol", type=_positive(float), help="override every check's tolerance")
    sweep.add_argument("--resolution", type=_positive(int), help="quadrature resolution")

    p = sub.add_parser("list-metrics", help="list built-in metrics, metric sets and suites")
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_list_metrics)

    p = sub.add_parser("tensor", parents=[common], help="print tensors at a point as JSON")
    p.add_argument("--at", help="comma-separated complex coordinates, e.g. 1+0i,0+0i")
    p.set_defaults(func=cmd_tensor)

    p = sub.add_parser("check", parents=[common, sweep], help="run one named check or suite")
    p.add_argument("name", help="suite name or check id")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("suite", parents=[common, sweep], help="run a verification suite")
    p.add_argument("name", help="suite name or 'all'")
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("integrate", parents=[common],
                       help="integrate a top-degree quantity over the Hopf fundamental domain")
    p.add_argument("--integrand", default="scalar", help=", ".join(quadrature.INTEGRANDS))
    p.add_argument("--resolution", type=_positive(int))
    p.add_argument("--r-inner", type=_positive(float), default=0.5,
                   help="inner radius of the shell (outer radius is twice this)")
    p.add_argument("--refine", action="store_true", help="also run R, 2R, 4R refinement")
    p.set_defaults(func=cmd_integrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, MetricSpecError, FieldSyntaxError, SuiteError,
            quadrature.QuadratureError) as exc:
        print(f"lcricci {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except AnalyticJetUnavailable as exc:
        print(f"lcricci {args.command}: error: {exc}; use --deriv fd", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"lcricci {args.command}: numerical error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
