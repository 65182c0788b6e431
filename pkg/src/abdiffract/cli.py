"""Command-line interface.

Subcommands print JSON (or CSV for time series) to stdout or ``--output``.
An optional ``--config`` file of ``key = value`` lines supplies defaults;
flags given on the command line override it and unknown keys are errors.

Exit codes: 0 success, 1 invalid configuration, 2 excluded domain or
guard violation, 3 numeric budget not met, 4 a check did not pass.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import acceptance
from .diffraction import (LKernelSpec, diffraction_coefficient, kernel_diffraction_coefficient, l_kernel_values)
from .domains import CutoffProfile, commutator_pairing_area, commutator_pairing_contour
from .errors import ABDiffractError, ConfigError, CriterionFailure
from .mode_sum import (Flux, FrequencyWindow, ModeSpec, PolarPoint, abel_diffraction_series,
                       diffraction_series_closed, mode_truncation_bound, reduce_angle)
from .probe import TimeGrid, kernel_time_series, run_probe
from .special_fn import bessel_j, bessel_j_quad


class _Parser(argparse.ArgumentParser):
    """Argument errors are configuration errors (exit 1)."""

    def error(self, message):
        raise ConfigError(message)


def _num(x: float) -> str:
    return "%.17g" % x


class _Encoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, complex):
            return {"re": o.real, "im": o.imag}
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        return super().default(o)


def _dump_json(obj, out) -> None:
    json.dump(obj, out, cls=_Encoder, indent=2, sort_keys=False)
    out.write("\n")


# -- argument groups -------------------------------------------------------

def _add_geometry(p, dtheta_default=None):
    p.add_argument("--alpha", type=float, default=0.5, help="flux in (0, 1)")
    p.add_argument("--r1", type=float, default=1.0)
    p.add_argument("--r2", type=float, default=1.0)
    p.add_argument("--theta1", type=float, default=None)
    p.add_argument("--theta2", type=float, default=None)
    p.add_argument("--dtheta", type=float, default=dtheta_default,
                   help="angle difference; points placed at +-dtheta/2 unless theta1/theta2 are given")


def _add_window(p, center=30.0, halfwidth=5.0):
    p.add_argument("--lambda-center", type=float, default=center)
    p.add_argument("--lambda-halfwidth", type=float, default=halfwidth)
    p.add_argument("--window-shape", choices=("gaussian", "bump"), default="gaussian")


def _add_modes(p):
    p.add_argument("--k-max", default="auto", help="integer or 'auto'")
    p.add_argument("--tail-tol", type=float, default=1e-12)


def _points(args):
    if args.theta1 is not None or args.theta2 is not None:
        if args.dtheta is not None:
            raise ConfigError("give either theta1/theta2 or dtheta, not both")
        th1 = args.theta1 if args.theta1 is not None else 0.0
        th2 = args.theta2 if args.theta2 is not None else 0.0
    else:
        d = 0.0 if args.dtheta is None else args.dtheta
        th1, th2 = d / 2.0, -d / 2.0
    return PolarPoint(args.r1, th1), PolarPoint(args.r2, th2)


def _window(args) -> FrequencyWindow:
    return FrequencyWindow(args.lambda_center, args.lambda_halfwidth, args.window_shape)


def _modes(args):
    if str(args.k_max).strip().lower() == "auto":
        return mode_truncation_bound(_window(args), args.r1, args.r2, args.tail_tol)
    try:
        k = int(args.k_max)
    except ValueError as exc:
        raise ConfigError(f"k_max must be an integer or 'auto', got {args.k_max!r}") from exc
    return ModeSpec(k, args.tail_tol)


# -- commands --------------------------------------------------------------

def cmd_coeff(args, out) -> int:
    a = Flux(args.alpha).alpha
    q1, q2 = _points(args)
    a0 = diffraction_coefficient(a, q1, q2)
    d = reduce_angle(q1.theta - q2.theta)
    closed = diffraction_series_closed(a, d) / (2.0 * math.sqrt(q1.r * q2.r))
    kern = kernel_diffraction_coefficient(a, q1, q2)
    _dump_json({"alpha": a, "r1": q1.r, "r2": q2.r, "theta1": q1.theta, "theta2": q2.theta, "dtheta": d,
                "a0_re": a0.real, "a0_im": a0.imag,
                "closed_dtheta_form_re": closed.real, "closed_dtheta_form_im": closed.imag,
                "forms_abs_diff": abs(a0 - closed),
                "diffracted_wave_coeff_re": kern.real, "diffracted_wave_coeff_im": kern.imag}, out)
    return 0


def _grid(args, q1, q2, g) -> TimeGrid:
    t0 = q1.r + q2.r if args.t0 is None else args.t0
    if args.n is None:
        return TimeGrid.for_window(t0, args.t_half_width, g)
    if args.n < 2:
        raise ConfigError("n must be at least 2")
    return TimeGrid(t0, args.t_half_width, args.n)


def cmd_kernel(args, out) -> int:
    a = Flux(args.alpha).alpha
    q1, q2 = _points(args)
    g = _window(args)
    modes = _modes(args)
    grid = _grid(args, q1, q2, g)
    series = kernel_time_series(q1, q2, a, g, modes, grid, subtract_geometric=args.diffracted_only)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "re", "im", "mode_tail", "quad_err"])
    for s in series:
        w.writerow([_num(s.t), _num(s.value.real), _num(s.value.imag), _num(s.est_mode_tail), _num(s.est_quad_err)])
    out.write(buf.getvalue())
    return 0


def cmd_probe(args, out) -> int:
    a = Flux(args.alpha).alpha
    q1, q2 = _points(args)
    g = _window(args)
    band = (args.band_lo, args.band_hi)
    rep = run_probe(a, q1, q2, g, band, _modes(args), half_width=args.t_half_width,
                    subtract_geometric=not args.keep_geometric, tolerance=args.tolerance)
    _dump_json(rep.to_json_dict(), out)
    return 0 if rep.passed else CriterionFailure.exit_code


def cmd_verify(args, out) -> int:
    results = acceptance.run_suite(args.suite)
    for r in results:
        print(r.line(), file=sys.stderr)
    summary = acceptance.suite_summary(results, include_timing=args.timing)
    summary["suite"] = args.suite
    _dump_json(summary, out)
    return 0 if summary["suite_pass"] else CriterionFailure.exit_code


def cmd_bessel(args, out) -> int:
    val = bessel_j(args.nu, args.x, method=args.method)
    ref, err = bessel_j_quad(args.nu, args.x, full_output=True)
    _dump_json({"nu": args.nu, "x": args.x, "method": args.method, "value": val, "oracle": ref,
                "oracle_err": err, "abs_diff": abs(val - ref)}, out)
    return 0


def cmd_pairing(args, out) -> int:
    a = Flux(args.alpha).alpha
    contour = commutator_pairing_contour(a, args.epsilon, args.n_quad)
    area = commutator_pairing_area(a, CutoffProfile(args.r_on, args.r_off), n_r=args.n_r, n_theta=args.n_theta)
    _dump_json({"alpha": a, "expected": -4.0 * math.pi * a * (1.0 - a), "contour": contour,
                "area": area.value, "area_error": area.error, "area_order": area.order}, out)
    return 0


def cmd_lkernel(args, out) -> int:
    a = Flux(args.alpha).alpha
    g = _window(args)
    spec = LKernelSpec(args.j, args.n_terms, args.representation)
    ts = np.linspace(args.t_min, args.t_max, args.n)
    vals = l_kernel_values(spec, ts, args.r, a, g)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "value"])
    for t, v in zip(ts, vals):
        w.writerow([_num(t), _num(v)])
    out.write(buf.getvalue())
    return 0


def cmd_abel(args, out) -> int:
    a = Flux(args.alpha).alpha
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dtheta", "series_re", "series_im", "closed_re", "closed_im", "abs_err"])
    for d in args.dtheta:
        s = abel_diffraction_series(a, d, args.eps, args.k_max)
        c = diffraction_series_closed(a, d)
        w.writerow([_num(d), _num(s.real), _num(s.imag), _num(c.real), _num(c.imag), _num(abs(s - c))])
    out.write(buf.getvalue())
    return 0


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="abdiffract", description="Wave diffraction by a single flux tube: kernels and checks.")
    common = _Parser(add_help=False)
    common.add_argument("--config", help="file of 'key = value' defaults for the subcommand")
    common.add_argument("--output", "-o", help="write results here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    s = add_parser("coeff", help="closed-form diffraction coefficient")
    _add_geometry(s)
    s.set_defaults(func=cmd_coeff)

    s = add_parser("kernel", help="windowed kernel time series as CSV")
    _add_geometry(s)
    _add_window(s)
    _add_modes(s)
    s.add_argument("--t0", type=float, default=None, help="grid center (default r1 + r2)")
    s.add_argument("--t-half-width", type=float, default=1.0)
    s.add_argument("--n", type=int, default=None, help="samples (default: 8 per period at the top frequency)")
    s.add_argument("--diffracted-only", action="store_true", help="subtract the geometric part")
    s.set_defaults(func=cmd_kernel)

    s = add_parser("probe", help="extract the conormal amplitude at the diffractive front")
    _add_geometry(s, dtheta_default=math.pi / 3)
    _add_window(s)
    _add_modes(s)
    s.add_argument("--band-lo", type=float, default=20.0)
    s.add_argument("--band-hi", type=float, default=40.0)
    s.add_argument("--t-half-width", type=float, default=1.2)
    s.add_argument("--tolerance", type=float, default=0.10)
    s.add_argument("--keep-geometric", action="store_true",
                   help="do not subtract the geometric part; enforces the front-separation guard")
    s.set_defaults(func=cmd_probe)

    s = add_parser("verify", help="run an acceptance suite")
    s.add_argument("--suite", choices=tuple(acceptance.SUITES), default="fast")
    s.add_argument("--timing", action="store_true", help="include wall-clock fields (not deterministic)")
    s.set_defaults(func=cmd_verify)

    s = add_parser("bessel", help="J_nu(x) with the quadrature oracle alongside")
    s.add_argument("--nu", type=float, required=True)
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--method", choices=("auto", "series", "hankel", "library", "quad"), default="auto")
    s.set_defaults(func=cmd_bessel)

    s = add_parser("pairing", help="commutator pairing by contour and area quadrature")
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--epsilon", type=float, default=1e-3)
    s.add_argument("--n-quad", type=int, default=64)
    s.add_argument("--r-on", type=float, default=0.5)
    s.add_argument("--r-off", type=float, default=1.0)
    s.add_argument("--n-r", type=int, default=24)
    s.add_argument("--n-theta", type=int, default=32)
    s.set_defaults(func=cmd_pairing)

    s = add_parser("lkernel", help="windowed l-kernel as CSV")
    s.add_argument("--j", type=int, choices=(0, -1), default=0)
    s.add_argument("--n-terms", type=int, default=3)
    s.add_argument("--representation", choices=("exact-bessel-limit", "conormal-symbol"),
                   default="exact-bessel-limit")
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--r", type=float, default=1.0)
    s.add_argument("--t-min", type=float, default=0.0)
    s.add_argument("--t-max", type=float, default=2.0)
    s.add_argument("--n", type=int, default=101)
    _add_window(s, 40.0, 20.0 / 6.0)
    s.set_defaults(func=cmd_lkernel)

    s = add_parser("abel", help="Abel-regularized diffraction series against the closed form")
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--eps", type=float, default=1.0 - 1e-4)
    s.add_argument("--k-max", type=int, default=10 ** 6)
    s.add_argument("--dtheta", type=float, nargs="+", default=[0.0, 0.5, 1.0, 2.0, 3.0])
    s.set_defaults(func=cmd_abel)
    return p


def read_config(path: str) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        key, val = (x.strip() for x in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _config_path(argv: list):
    for i, tok in enumerate(argv):
        if tok == "--config":
            if i + 1 >= len(argv):
                raise ConfigError("--config needs a path")
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _apply_config(parser: argparse.ArgumentParser, argv: list, cfg: dict) -> None:
    """Install config values as subcommand defaults so command-line flags win."""
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((tok for tok in argv if tok in sub_action.choices), None)
    if command is None:
        raise ConfigError("no subcommand given")
    subparser = sub_action.choices[command]
    actions = {a.dest: a for a in subparser._actions if a.dest not in ("help", "func", "config", "output")}
    defaults = {}
    for key, raw in cfg.items():
        if key not in actions:
            raise ConfigError(f"unknown config key {key!r} for '{command}'")
        act = actions[key]
        if isinstance(act, argparse._StoreTrueAction):
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ConfigError(f"config key {key!r} expects a boolean")
            val = low in ("true", "1", "yes")
        elif act.nargs in ("+", "*"):
            val = [act.type(x) if act.type else x for x in raw.replace(",", " ").split()]
        else:
            try:
                val = act.type(raw) if act.type else raw
            except ValueError as exc:
                raise ConfigError(f"config key {key!r}: {exc}") from exc
            if act.choices is not None and val not in act.choices:
                raise ConfigError(f"config key {key!r} must be one of {list(act.choices)}")
        defaults[key] = val
        act.required = False
    subparser.set_defaults(**defaults)


def main(argv: list | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        path = _config_path(argv)
        if path:
            _apply_config(parser, argv, read_config(path))
        args = parser.parse_args(argv)
        buf = io.StringIO()
        code = args.func(args, buf)
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
        else:
            sys.stdout.write(buf.getvalue())
        return code
    except ABDiffractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
