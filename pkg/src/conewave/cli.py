"""Command-line entry point: kernel sweeps, scattering tables, composition
checks, trace runs, singularity predictions, and the acceptance suite.

Outputs are reproducible byte for byte: floats are written with their
shortest round-trip representation and all randomized suites take a seed.
Exit codes: 0 success, 1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import diffraction, friedlander, kernels, verification, wave_trace
from .errors import ConewaveError, GeometricDirection, WindowContaminated
from .geometry import ConeChain, ConePoint, PlanarPoint
from .special import Mollifier
from .two_diffraction import (CompositionPoint, oscillatory_oracle,
                              principal_symbol_lambda0,
                              stationary_eliminate, stationary_phase_value)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT_ERROR = 2


class InputError(Exception):
    pass


def _fmt(x) -> str:
    """Shortest round-trip decimal representation."""
    return repr(float(x))


def _parse_range(text: str) -> np.ndarray:
    """'start:step:stop' inclusive sweep."""
    try:
        start, step, stop = (float(p) for p in text.split(":"))
    except ValueError as exc:
        raise InputError(f"bad range {text!r}, expected start:step:stop") from exc
    if step <= 0 or stop < start:
        raise InputError(f"bad range {text!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def _load_json(path: str) -> dict:
    try:
        with open(path) as handle:
            return json.load(handle)
    except FileNotFoundError as exc:
        raise InputError(f"input file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(
            f"malformed JSON in {path} at line {exc.lineno}, column {exc.colno}:"
            f" {exc.msg}") from exc


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as handle:
            handle.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


def _csv(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            _fmt(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def _json_dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _require(args, *names) -> None:
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise InputError("missing required argument(s): "
                         + ", ".join("--" + n.replace("_", "-")
                                     for n in missing))


def cmd_kernel(args) -> int:
    from .kernels import KernelQuery

    _require(args, "alpha", "r1", "theta1", "r2", "theta2", "ts")
    alpha = args.alpha
    ts = _parse_range(args.ts)
    rows = []
    rep = args.representation
    fg = friedlander.build_friedlander(alpha) if rep == "friedlander" else None
    for t in ts:
        q = KernelQuery(float(t), ConePoint(args.r1, args.theta1),
                        ConePoint(args.r2, args.theta2), args.h)
        if rep == "closed4pi":
            value = kernels.sine_kernel_4pi_closed(q)
        elif rep == "cheeger":
            value = kernels.sine_kernel_cheeger_series(alpha, q)
        elif rep == "moving":
            value = kernels.sine_kernel_moving_point(q)
        else:
            value = friedlander.sine_kernel_friedlander(fg, q)
        val = complex(value.value)
        rows.append([float(t), args.r1, args.theta1, args.r2, args.theta2,
                     alpha, rep, val.real, val.imag, value.region])
    _write_text(args.out, _csv(
        ["t", "r1", "theta1", "r2", "theta2", "alpha", "representation",
         "value_re", "value_im", "region"], rows))
    return EXIT_OK


def cmd_scatter(args) -> int:
    _require(args, "alpha", "thetas")
    thetas = _parse_range(args.thetas)
    rows = []
    for theta in thetas:
        ev = diffraction.scattering_matrix(args.alpha, float(theta))
        four = diffraction.scattering_matrix_fourier(
            args.alpha, float(theta), args.fourier_n)
        rows.append([args.alpha, float(theta),
                     ev.value if not ev.is_pole else math.nan,
                     four.real, four.imag, ev.is_pole])
    _write_text(args.out, _csv(
        ["alpha", "theta", "S_closed", "S_fourier_re", "S_fourier_im",
         "is_pole"], rows))
    return EXIT_OK


def cmd_compose(args) -> int:
    _require(args, "chain", "t", "q1", "q2", "omega")
    chain = ConeChain.from_dict(_load_json(args.chain))
    q1 = PlanarPoint(*(float(v) for v in args.q1.split(",")))
    q2 = PlanarPoint(*(float(v) for v in args.q2.split(",")))
    cp = CompositionPoint(chain, q1, q2, 0.0, 0.0, args.omega, args.t)
    sd = stationary_eliminate(cp)
    theta1 = -math.atan2(q1.y, q1.x - chain.b)
    theta2 = -math.atan2(q2.y, q2.x)
    theta2 = theta2 if theta2 >= 0 else theta2 + 2.0 * math.pi
    report = {
        "stationary": {
            "q_c": [sd.q_c.x, sd.q_c.y],
            "A": sd.A, "B": sd.B, "C": sd.C,
            "hessian_det": sd.hessian_det,
            "signature": sd.signature,
        },
    }
    try:
        symbol = principal_symbol_lambda0(chain, theta1, theta2, args.omega)
        report["symbol_lambda0"] = [symbol.value.real, symbol.value.imag]
        report["half_density"] = symbol.half_density
    except GeometricDirection:
        # endpoints exactly on the axis sit at the S_alpha pole; the
        # regularized amplitude is finite but the bare symbol is not
        report["symbol_lambda0"] = None
        report["note"] = "endpoints at a geometric direction of S_alpha"
    if args.omega >= 50.0:
        oracle = oscillatory_oracle(chain, args.t, q1, q2, args.omega)
        sp = stationary_phase_value(chain, args.t, q1, q2, args.omega)
        report["oracle"] = [oracle.real, oracle.imag]
        report["stationary_phase"] = [sp.real, sp.imag]
        report["rel_err"] = abs(oracle - sp) / abs(sp)
    else:
        report["oracle"] = None
        report["rel_err"] = None
    _write_text(args.out, _json_dump(report))
    return EXIT_OK


def cmd_trace(args) -> int:
    if args.surface is not None:
        data = _load_json(args.surface)
        if data.get("type") != "pillowcase":
            raise InputError("surface JSON must have type 'pillowcase'")
        surf = wave_trace.PillowcaseSurface(float(data["a"]), float(data["b"]))
    else:
        surf = wave_trace.PillowcaseSurface(args.a, args.b)
    moll = Mollifier(args.h)
    spec = wave_trace.pillowcase_spectrum(surf, args.lambda_max)
    ts = _parse_range(args.t_range)
    trace = wave_trace.mollified_trace(spec, ts, moll)
    rows = [[float(t), v.real, v.imag] for t, v in zip(ts, trace)]
    _write_text(args.out, _csv(["t", "re", "im"], rows))

    peaks = wave_trace.detect_trace_peaks(ts, trace)
    lengths = sorted({2.0 * math.hypot(m * surf.a_rect, n * surf.b_rect)
                      for m in range(8) for n in range(8) if (m, n) != (0, 0)})
    peak_report = []
    for p in peaks:
        nearest = min(lengths, key=lambda ell: abs(ell - p)) if lengths else None
        entry = {"t_peak": float(p), "nearest_length": nearest}
        try:
            fit = wave_trace.extract_singularity_coefficient(ts, trace,
                                                             float(p), moll)
            entry.update({"fitted_coefficient_re": fit.coefficient.real,
                          "fitted_coefficient_im": fit.coefficient.imag,
                          "residual_ratio": fit.residual_ratio,
                          "valid": fit.valid})
        except (WindowContaminated, ValueError) as exc:
            entry.update({"fitted_coefficient_re": None,
                          "fitted_coefficient_im": None,
                          "valid": False, "note": str(exc)})
        peak_report.append(entry)
    _write_text(args.report, _json_dump({"peaks": peak_report}))
    return EXIT_OK


def cmd_predict(args) -> int:
    _require(args, "L", "b")
    pred = wave_trace.predict_two_diffraction_singularity(args.L, args.b)
    _write_text(args.out, _json_dump({
        "L": pred.L, "b": pred.b, "order": pred.order,
        "coefficient_re": pred.coefficient.real,
        "coefficient_im": pred.coefficient.imag,
        "coefficient_abs": abs(pred.coefficient),
    }))
    return EXIT_OK


def _parse_tol_overrides(pairs) -> dict:
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise InputError(f"bad --tol override {pair!r}, expected KEY=VAL")
        key, val = pair.split("=", 1)
        try:
            out[key] = float(val)
        except ValueError as exc:
            raise InputError(f"bad --tol value in {pair!r}") from exc
    return out


def cmd_verify(args) -> int:
    reports = verification.run_all(args.seed,
                                   tol_overrides=_parse_tol_overrides(args.tol))
    print(verification.format_table(reports))
    if args.out:
        payload = [{
            "at_id": r.at_id, "passed": bool(r.passed),
            "info_only": bool(r.info_only), "summary": r.summary,
            "runtime_s": float(r.runtime_s),
        } for r in reports]
        _write_text(args.out, _json_dump(payload))
    failed = [r for r in reports if not r.passed]
    if failed:
        print(f"{len(failed)} criteria FAILED")
        return EXIT_VERIFY_FAILED
    print("all acceptance criteria PASS")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conewave",
        description="Wave kernels and trace singularities on flat cones")
    sub = parser.add_subparsers(dest="command", required=True)

    p_kernel = sub.add_parser("kernel", help="sine-kernel sweep as CSV")
    p_kernel.add_argument("--alpha", type=float, default=None)
    p_kernel.add_argument("--representation", default="cheeger",
                          choices=["closed4pi", "cheeger", "friedlander",
                                   "moving"])
    p_kernel.add_argument("--r1", type=float, default=None)
    p_kernel.add_argument("--theta1", type=float, default=None)
    p_kernel.add_argument("--r2", type=float, default=None)
    p_kernel.add_argument("--theta2", type=float, default=None)
    p_kernel.add_argument("--ts", default=None, help="t sweep start:step:stop")
    p_kernel.add_argument("--h", type=float, default=0.05)
    p_kernel.add_argument("--out", default=None)
    p_kernel.set_defaults(func=cmd_kernel)

    p_scatter = sub.add_parser("scatter", help="scattering-matrix table")
    p_scatter.add_argument("--alpha", type=float, default=None)
    p_scatter.add_argument("--thetas", default=None,
                           help="theta sweep start:step:stop")
    p_scatter.add_argument("--fourier-n", type=int, default=500)
    p_scatter.add_argument("--out", default=None)
    p_scatter.set_defaults(func=cmd_scatter)

    p_compose = sub.add_parser("compose", help="two-diffraction composition")
    p_compose.add_argument("--chain", default=None,
                           help="chain JSON {a,b,c,alpha1,alpha2,eps1,eps2}")
    p_compose.add_argument("--t", type=float, default=None)
    p_compose.add_argument("--q1", default=None, help="x,y in chain frame")
    p_compose.add_argument("--q2", default=None, help="x,y in chain frame")
    p_compose.add_argument("--omega", type=float, default=None)
    p_compose.add_argument("--out", default=None)
    p_compose.set_defaults(func=cmd_compose)

    p_trace = sub.add_parser("trace", help="pillowcase trace run")
    p_trace.add_argument("--surface", default=None,
                         help="JSON {type:'pillowcase', a, b}")
    p_trace.add_argument("--a", type=float, default=1.0)
    p_trace.add_argument("--b", type=float, default=1.0)
    p_trace.add_argument("--h", type=float, default=0.02)
    p_trace.add_argument("--lambda-max", type=float, default=400.0)
    p_trace.add_argument("--t-range", default="0.5:0.001:5.0")
    p_trace.add_argument("--out", default=None, help="CSV output path")
    p_trace.add_argument("--report", default=None, help="peak report JSON path")
    p_trace.set_defaults(func=cmd_trace)

    p_predict = sub.add_parser("predict", help="two-diffraction singularity")
    p_predict.add_argument("--L", type=float, default=None)
    p_predict.add_argument("--b", type=float, default=None)
    p_predict.add_argument("--out", default=None)
    p_predict.set_defaults(func=cmd_predict)

    p_verify = sub.add_parser("verify", help="run the acceptance suite")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--out", default=None, help="JSON report path")
    p_verify.add_argument("--tol", action="append", default=None,
                          metavar="KEY=VAL",
                          help="tolerance override, e.g. at1=1e-9 (repeatable)")
    p_verify.set_defaults(func=cmd_verify)

    for sub_parser in (p_kernel, p_scatter, p_compose, p_trace, p_predict,
                       p_verify):
        sub_parser.add_argument("--config", default=None,
                                help="JSON file with argument defaults")
    parser._subcommand_parsers = {
        "kernel": p_kernel, "scatter": p_scatter, "compose": p_compose,
        "trace": p_trace, "predict": p_predict, "verify": p_verify}
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            defaults = _load_json(args.config)
            subparser = parser._subcommand_parsers[args.command]
            subparser.set_defaults(**{k.replace("-", "_"): v
                                      for k, v in defaults.items()})
            args = parser.parse_args(argv)
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ConewaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
