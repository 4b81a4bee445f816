"""Command-line interface.

Exit status: 0 success, 1 checks ran but failed (``reproduce``), 2 invalid
input, 3 solver or resource failure, 4 numeric-integrity violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import platform
import sys
import tempfile
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .diophantine import approximability_profile, expand_cf, parse_constant
from .dimensions import (
    dimension_free_region,
    dimensions_window,
    perturbation_series,
    predict_dimension,
)
from .errors import FlowError, NumericIntegrityError, ResourceError, SolverError, ValidationError
from .explicit import error_scaling_report
from .flow import NAMED_FLOWS, classify_lattice, golden_flow, load_flow, named_flow, solve_dimension
from .orbits import MEMORY_CAP, counting_table, enumerate_orbits
from .zeta import eval_zeta

log = logging.getLogger("ssflow")

EXIT_FAILED, EXIT_INPUT, EXIT_SOLVER, EXIT_INTEGRITY = 1, 2, 3, 4


def _formatter(digits17):
    if digits17:
        return lambda v: f"{v:.17g}"
    return repr


def _flow(source):
    if source in NAMED_FLOWS:
        return named_flow(source)
    return load_flow(source)


def _positive(kind=float):
    def parse(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
        return value

    return parse


def _grid(text):
    """``LO,HI,NUM``: NUM values of log x evenly spaced in [LO, HI]."""
    try:
        lo, hi, num = text.split(",")
        lo, hi, num = float(lo), float(hi), int(num)
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO,HI,NUM") from None
    if not (0 <= lo < hi and num >= 1):
        raise argparse.ArgumentTypeError("need 0 <= LO < HI and NUM >= 1")
    return np.exp(np.linspace(lo, hi, num))


class Output:
    """Writes artifacts under ``--out`` (plus ``manifest.json``) or to stdout."""

    def __init__(self, directory, params):
        self.dir = Path(directory) if directory else None
        self.params = params
        self.files = []
        if self.dir is not None:
            try:
                self.dir.mkdir(parents=True, exist_ok=True)
                with tempfile.NamedTemporaryFile(dir=self.dir):
                    pass
            except OSError as exc:
                raise ValidationError(f"output directory not writable: {exc}", "out") from exc

    def write(self, name, text):
        if self.dir is None:
            sys.stdout.write(text)
            return
        (self.dir / name).write_text(text)
        self.files.append(name)

    def close(self):
        if self.dir is None:
            return
        manifest = {
            "files": self.files,
            "parameters": self.params,
            "versions": {
                "ssflow": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": platform.python_version(),
            },
        }
        (self.dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_dimension(args, out):
    flow = _flow(args.flow)
    pair = solve_dimension(flow)
    lat = classify_lattice(flow, args.max_denominator)
    print(f"flow: {flow.name or args.flow}  N={flow.N}")
    if pair.degenerate:
        print("degenerate flow (N <= 1): no positive dimension")
    else:
        print(f"D  = {pair.D!r}")
        print(f"D0 = {pair.D0!r}  (m = {pair.m})")
    if lat is None:
        print(f"nonlattice at max_denominator={args.max_denominator}")
    else:
        print(f"lattice with w={lat.generator!r}, k={list(lat.multipliers)}")
    if out.dir is not None:
        out.write(
            "dimension.json",
            _json(
                {
                    "D": pair.D,
                    "D0": pair.D0,
                    "m": pair.m,
                    "degenerate": pair.degenerate,
                    "lattice": None
                    if lat is None
                    else {"generator": lat.generator, "multipliers": list(lat.multipliers)},
                    "max_denominator": args.max_denominator,
                }
            ),
        )
    return 0


def cmd_dims_window(args, out):
    flow = _flow(args.flow)
    window = dimensions_window(flow, args.T, args.max_denominator, approx_Q=args.Q)
    out.write("dims.csv", window.to_csv(_formatter(args.digits17)))
    log.info("%d dimensions with |Im| <= %g (%s)", len(window), args.T, window.metadata.get("method"))
    return 0


def cmd_orbits(args, out):
    flow = _flow(args.flow)
    census = enumerate_orbits(flow, args.cutoff, memory_cap=args.max_records, workers=args.workers)
    if len(census) == 0:
        print(f"warning: no orbit has weight <= {args.cutoff} (w_1 = {flow.weights[0]!r})", file=sys.stderr)
    out.write("census.csv", census.to_csv(_formatter(args.digits17)))
    return 0


def cmd_psi(args, out):
    flow = _flow(args.flow)
    xs = args.logx_grid
    census = enumerate_orbits(flow, max(args.cutoff, math.log(xs[-1])), memory_cap=args.max_records, workers=args.workers)
    out.write("counting.csv", counting_table(census, xs, args.jump, _formatter(args.digits17)))
    return 0


def cmd_explicit(args, out):
    flow = _flow(args.flow)
    xs = args.logx_grid
    census = enumerate_orbits(flow, math.log(xs[-1]) * (1 + 1e-12), memory_cap=args.max_records, workers=args.workers)
    window = dimensions_window(flow, args.T, args.max_denominator)
    report = error_scaling_report(flow, window, xs, census)
    out.write("explicit.csv", report.to_csv(_formatter(args.digits17)))
    log.info("fitted envelope constant c = %.6g (exponent %.4g)", report.fitted_c, report.exponent)
    return 0


def cmd_dioph(args, out):
    fmt = _formatter(args.digits17)
    if args.action == "profile":
        flow = _flow(args.flow)
        prof = approximability_profile(flow, args.q_max)
        lines = ["q,max_error,ratio"] + [f"{q},{fmt(e)},{fmt(r)}" for q, e, r in prof.rows()]
        out.write("profile.csv", "\n".join(lines) + "\n")
    else:
        cf = expand_cf(parse_constant(args.flow), args.depth)
        lines = ["k,a,p,q,q_prime"]
        for k, (a, (p, q)) in enumerate(zip(cf.partial_quotients, cf.convergents)):
            lines.append(f"{k},{a},{p},{q},{fmt(cf.q_primes[k])}")
        out.write("cf.csv", "\n".join(lines) + "\n")
        if cf.early_stop:
            print("warning: expansion stopped early (binary64 resolution or 64-bit overflow)", file=sys.stderr)
    return 0


def cmd_zeta(args, out):
    flow = _flow(args.flow)
    try:
        s = complex(args.s.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ValidationError(f"not a complex number: {args.s!r}", "s") from None
    ev = eval_zeta(flow, s)
    out.write("zeta.json", _json(ev.as_dict()))
    return 0


def reproduce_golden(out, fmt):
    from .acceptance import GOLDEN_DIMENSIONS, GOLDEN_SERIES, golden_window

    flow = golden_flow()
    pair = solve_dimension(flow)
    series = perturbation_series(flow, 6)
    window = golden_window(560)
    out.write("golden_dims.csv", window.to_csv(fmt))
    cf = expand_cf(flow.alpha, 30)
    predictions = []
    for q in (2, 3, 5, 8, 13, 21, 34, 55):
        pred = predict_dimension(flow, q, cf)
        near = window.omegas[np.argmin(np.abs(window.omegas - pred.omega))]
        predictions.append({"q": q, "predicted": [float(pred.omega.real), float(pred.omega.imag)], "refined": [float(near.real), float(near.imag)]})
    matches = []
    for dre, im in GOLDEN_DIMENSIONS:
        target = complex(pair.D + dre, im)
        best = window.omegas[np.argmin(np.abs(window.omegas - target))]
        err = max(abs(best.real - target.real), abs(best.imag - target.imag))
        matches.append({"printed": [target.real, target.imag], "computed": [float(best.real), float(best.imag)], "max_abs_diff": float(err), "ok": bool(err <= 2e-3)})
    checks = {
        "D": bool(abs(pair.D - 0.7792119034) < 1e-7),
        "series": bool(max(abs(a - b) for a, b in zip(series.coefficients, GOLDEN_SERIES)) <= 1e-4),
        "dimensions": all(m["ok"] for m in matches),
    }
    region = dimension_free_region(flow, window)
    summary = {
        "D": pair.D,
        "D0": pair.D0,
        "series": list(series.coefficients),
        "series_radius_lower_bound": series.radius_lower_bound,
        "reference_dimensions": matches,
        "predictions": predictions,
        "dimension_free_B": region.B,
        "dimension_free_min_ratio": region.min_ratio,
        "checks": checks,
    }
    out.write("golden_summary.json", _json(summary))
    for name, ok in checks.items():
        print(f"[{'PASS' if ok else 'FAIL'}] {name}", file=sys.stderr)
    for m in matches:
        print(f"  printed {m['printed'][0]:.6f}{m['printed'][1]:+.2f}i  computed {m['computed'][0]:.6f}{m['computed'][1]:+.6f}i  diff {m['max_abs_diff']:.1e}", file=sys.stderr)
    return 0 if all(checks.values()) else EXIT_FAILED


def cmd_reproduce(args, out):
    fmt = _formatter(args.digits17)
    if args.target == "golden-flow":
        return reproduce_golden(out, fmt)
    from .acceptance import run_all

    results = run_all(echo=lambda line: print(line, file=sys.stderr))
    out.write(
        "acceptance.json",
        _json([{"criterion": r.number, "title": r.title, "passed": r.passed, "detail": r.detail, "elapsed": r.elapsed} for r in results]),
    )
    return 0 if all(r.passed for r in results) else EXIT_FAILED


def build_parser():
    parser = argparse.ArgumentParser(prog="ssflow", description=__doc__.splitlines()[0])
    parser.add_argument("--out", help="write artifacts and manifest.json to this directory")
    parser.add_argument("--digits17", action="store_true", help="format floats with 17 significant digits")
    parser.add_argument("--workers", type=_positive(int), default=1, help="worker processes for enumeration")
    parser.add_argument("--max-records", type=_positive(int), default=MEMORY_CAP, help="census size cap")
    parser.add_argument("--max-denominator", type=_positive(int), default=10**6, help="lattice detection resolution")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    flow_help = "flow document (TOML/JSON) or a built-in name: " + ", ".join(NAMED_FLOWS)

    p = sub.add_parser("dimension", help="real dimension D, strip edge D0, lattice verdict")
    p.add_argument("flow", help=flow_help)
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("dims-window", help="complex dimensions with |Im| <= T as CSV")
    p.add_argument("flow", help=flow_help)
    p.add_argument("--T", type=_positive(), default=100.0)
    p.add_argument("--Q", type=_positive(), default=None, help="surrogate approximation quality")
    p.set_defaults(func=cmd_dims_window)

    p = sub.add_parser("orbits", help="primitive orbit census as CSV")
    p.add_argument("flow", help=flow_help)
    p.add_argument("--cutoff", type=_positive(), required=True, help="maximal total weight")
    p.set_defaults(func=cmd_orbits)

    p = sub.add_parser("psi", help="counting functions psi, theta, pi on a grid")
    p.add_argument("flow", help=flow_help)
    p.add_argument("--cutoff", type=_positive(), default=1.0)
    p.add_argument("--logx-grid", type=_grid, required=True, help="LO,HI,NUM values of log x")
    p.add_argument("--jump", choices=("full", "half"), default="full")
    p.set_defaults(func=cmd_psi)

    p = sub.add_parser("explicit", help="explicit formula against the census")
    p.add_argument("action", choices=("compare",))
    p.add_argument("flow", help=flow_help)
    p.add_argument("--T", type=_positive(), default=200.0)
    p.add_argument("--logx-grid", type=_grid, required=True, help="LO,HI,NUM values of log x")
    p.set_defaults(func=cmd_explicit)

    p = sub.add_parser("dioph", help="Diophantine tools")
    p.add_argument("action", choices=("profile", "cf"))
    p.add_argument("flow", help=flow_help + " (for cf: golden, sqrt(d) or a number)")
    p.add_argument("--q-max", type=_positive(int), default=1000)
    p.add_argument("--depth", type=_positive(int), default=20)
    p.set_defaults(func=cmd_dioph)

    p = sub.add_parser("zeta", help="evaluate the zeta function")
    p.add_argument("action", choices=("eval",))
    p.add_argument("flow", help=flow_help)
    p.add_argument("--s", required=True, help="complex argument, e.g. 1+2j")
    p.set_defaults(func=cmd_zeta)

    p = sub.add_parser("reproduce", help="reproduce the golden-flow example or the acceptance suite")
    p.add_argument("target", choices=("golden-flow", "acceptance"))
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    params = {k: v for k, v in vars(args).items() if k != "func" and not isinstance(v, np.ndarray)}
    if isinstance(getattr(args, "logx_grid", None), np.ndarray):
        params["logx_grid"] = np.log(args.logx_grid).tolist()
    try:
        out = Output(args.out, params)
        status = args.func(args, out)
        out.close()
        return status
    except ValidationError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericIntegrityError as exc:
        print(f"error: numeric integrity: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except (SolverError, ResourceError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except FlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
