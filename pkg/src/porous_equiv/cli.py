"""Command-line front end.

Subcommands wire the library into file-based workflows: ``validate``,
``mrmt``, ``minc``, ``reduce``, ``compare``, ``tf``, ``nyquist``, and
``simulate``.  Model files are JSON network descriptions
(``{"volumes": [..], "flow": Q, "edges": [{"i":..,"j":..,"d":..}, ..]}``,
1-based indices, zone 1 mobile); commands also accept a previously emitted
realization file, in which case its recovered parameters are used.

Exit codes: 0 success, 1 I/O or parse trouble, 2 not controllable,
3 network assumptions violated, 4 numerical failure (including a failed
equivalence check in ``compare``).  Errors are reported as JSON on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import _jsonio, realization, reduction, sim, transforms
from .errors import (
    EXIT_ASSUMPTIONS,
    EXIT_NUMERICAL,
    EXIT_PARSE,
    ModelError,
    SpecFormatError,
)
from .network import (
    NetworkSpec,
    StateSpace,
    build_state_space,
    check_assumptions,
    parse_network_spec,
)

DEFAULT_COMPARE_TOL = 1e-6
TOL_ENV_VAR = "POROUS_EQUIV_TOL"


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the parse status (1)."""

    def error(self, message):
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _load_params(path: str) -> NetworkSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecFormatError(f"invalid JSON in {path}: {exc}") from exc
    if isinstance(data, dict) and "realization" in data:
        data = data["realization"]
    if isinstance(data, dict) and "params" in data:
        data = data["params"]
    return parse_network_spec(data)


def _build(path: str) -> StateSpace:
    ss, _ = build_state_space(_load_params(path))
    return ss


def _write(args, text: str) -> None:
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, payload: dict) -> None:
    _write(args, _jsonio.dumps(payload))


def cmd_validate(args) -> int:
    ss, dec = build_state_space(_load_params(args.model))
    report = check_assumptions(ss.a)
    payload = report.to_dict()
    payload["normalization"] = {
        "time_scale": dec.time_scale,
        "volume_scale": dec.volume_scale,
    }
    _emit_json(args, payload)
    return 0 if report.passed else EXIT_ASSUMPTIONS


def cmd_mrmt(args) -> int:
    eq = transforms.to_mrmt(_build(args.model), rank_tol=args.rank_tol)
    _emit_json(args, eq.to_dict())
    return 0


def cmd_minc(args) -> int:
    eq = transforms.to_minc(_build(args.model), rank_tol=args.rank_tol)
    _emit_json(args, eq.to_dict())
    return 0


def cmd_reduce(args) -> int:
    ss = _build(args.model)
    if args.mode == "minimal":
        eq = reduction.minimal_mrmt(ss)
        report = {
            "mode": "minimal",
            "input_dimension": ss.n,
            "output_dimension": eq.system.n,
            "markov_deviation": eq.residuals["markov"],
            "volume_conservation": eq.residuals["volume_conservation"],
        }
        _emit_json(args, {"realization": eq.to_dict(), "report": report})
        return 0
    criteria = [args.volume_floor, args.rate_floor, args.keep]
    if sum(c is not None for c in criteria) != 1:
        raise SpecFormatError(
            "truncate mode needs exactly one of --volume-floor, --rate-floor, --keep"
        )
    base = (
        transforms.to_minc(ss, rank_tol=args.rank_tol)
        if args.structure == "minc"
        else transforms.to_mrmt(ss, rank_tol=args.rank_tol)
    )
    reduced, rep = reduction.truncate(
        base,
        volume_floor=args.volume_floor,
        rate_floor=args.rate_floor,
        keep=args.keep,
    )
    _emit_json(args, {"realization": reduced.to_dict(), "report": rep.to_dict()})
    return 0


def cmd_compare(args) -> int:
    tol = args.tol
    if tol is None:
        tol = float(os.environ.get(TOL_ENV_VAR, DEFAULT_COMPARE_TOL))
    report = transforms.verify_equivalence(_build(args.model_a), _build(args.model_b))
    payload = report.to_dict()
    payload["tolerance"] = tol
    payload["equivalent"] = report.equivalent(tol)
    _emit_json(args, payload)
    return 0 if report.equivalent(tol) else EXIT_NUMERICAL


def cmd_tf(args) -> int:
    tf = realization.transfer_function(_build(args.model), gcd_tol=args.gcd_tol)
    _emit_json(args, tf.to_dict())
    return 0


def cmd_nyquist(args) -> int:
    tf = realization.transfer_function(_build(args.model), gcd_tol=args.gcd_tol)
    omegas = np.geomspace(args.omega_min, args.omega_max, args.points)
    response = realization.frequency_response(tf, omegas)
    lines = ["omega,re,im"]
    for w, value in zip(omegas, response):
        lines.append(
            f"{format(w, '.17g')},{format(value.real, '.17g')},"
            f"{format(value.imag, '.17g')}"
        )
    _write(args, "\n".join(lines) + "\n")
    return 0


def cmd_simulate(args) -> int:
    ss = _build(args.model)
    if args.input == "pulse":
        if args.duration is None:
            raise SpecFormatError("--duration is required for a pulse input")
        signal = sim.PiecewiseConstant.pulse(args.amplitude, args.duration)
    else:
        signal = sim.PiecewiseConstant.step(args.amplitude)
    t_end = args.t_end if args.t_end is not None else sim.default_horizon(ss)
    grid = np.linspace(0.0, t_end, args.points)
    result = sim.simulate(ss, signal, np.zeros(ss.n), grid)
    _write(args, result.to_csv(include_states=args.states))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="porous-equiv",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=handler)
        p.add_argument("-o", "--output", help="write to file instead of stdout")
        return p

    p = add("validate", cmd_validate,
            "check the structural network properties of a model file")
    p.add_argument("model")

    for name, handler, text in (
        ("mrmt", cmd_mrmt, "construct the equivalent star realization"),
        ("minc", cmd_minc, "construct the equivalent chain realization"),
    ):
        p = add(name, handler, text)
        p.add_argument("model")
        p.add_argument("--rank-tol", type=float, default=None,
                       help="override the controllability rank threshold "
                            "(default: max(n,n)*eps*sigma_max)")

    p = add("reduce", cmd_reduce, "reduce a model exactly or by truncation")
    p.add_argument("model")
    p.add_argument("--mode", choices=("minimal", "truncate"), required=True)
    p.add_argument("--structure", choices=("mrmt", "minc"), default="mrmt",
                   help="form to truncate (truncate mode; default mrmt)")
    p.add_argument("--volume-floor", type=float, default=None,
                   help="keep zones with volume >= floor")
    p.add_argument("--rate-floor", type=float, default=None,
                   help="keep zones with exchange rate >= floor")
    p.add_argument("--keep", type=int, default=None,
                   help="keep this many compartments in total")
    p.add_argument("--rank-tol", type=float, default=None)

    p = add("compare", cmd_compare,
            "check two models for input-output equivalence")
    p.add_argument("model_a")
    p.add_argument("model_b")
    p.add_argument("--tol", type=float, default=None,
                   help=f"Markov deviation tolerance (default {DEFAULT_COMPARE_TOL}, "
                        f"or ${TOL_ENV_VAR} when set)")

    p = add("tf", cmd_tf, "emit the coprime transfer function")
    p.add_argument("model")
    p.add_argument("--gcd-tol", type=float, default=realization.GCD_TOL,
                   help="relative tolerance for pole/zero cancellation "
                        f"(default {realization.GCD_TOL})")

    p = add("nyquist", cmd_nyquist, "frequency response CSV (omega,re,im)")
    p.add_argument("model")
    p.add_argument("--omega-min", type=float, default=1e-2)
    p.add_argument("--omega-max", type=float, default=1e2)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--gcd-tol", type=float, default=realization.GCD_TOL)

    p = add("simulate", cmd_simulate, "trajectory CSV for a step or pulse input")
    p.add_argument("model")
    p.add_argument("--input", choices=("step", "pulse"), required=True)
    p.add_argument("--amplitude", type=float, required=True)
    p.add_argument("--duration", type=float, default=None,
                   help="pulse length (pulse input only)")
    p.add_argument("--t-end", type=float, default=None,
                   help="horizon (default: 50 / slowest exchange rate)")
    p.add_argument("--points", type=int, default=500)
    p.add_argument("--states", action="store_true",
                   help="include state columns x1..xn in the CSV")

    return parser


def _emit_error(exc: ModelError) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    payload.update(exc.payload())
    sys.stderr.write(_jsonio.dumps(payload))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except ModelError as exc:
        _emit_error(exc)
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(
            _jsonio.dumps({"error": "io_error", "message": str(exc)})
        )
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
