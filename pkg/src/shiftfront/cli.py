"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error (including violated
preconditions), 2 solver failure, 3 failed check in ``verify``.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import bvp, classify, forced, semiwave, stefan, verify
from .config import ConfigError, RunConfig, format_number
from .errors import PreconditionError, SolverError

log = logging.getLogger("shiftfront")

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_CHECK = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", required=True, help="run configuration file (see docs/config.md)")
    common.add_argument("--out-dir", help="output directory (overrides [output] out_dir)")
    common.add_argument("--seedless", action="store_true", help="assert that no random numbers are used (always true)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="shiftfront", description="Free boundary spreading under a shifting climate.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("critical-speed", parents=[common], help="critical speed c0 of the favourable semi-wave")
    p = sub.add_parser("semiwave", parents=[common], help="semi-wave profile q_c")
    p.add_argument("--c", type=float, help="wave speed (default: c0)")
    p = sub.add_parser("forced-semiwave", parents=[common], help="forced semi-wave v_L for the config speed")
    p.add_argument("--L", type=float, required=True, help="position of the free end")
    sub.add_parser("l0", parents=[common], help="critical shift L0 for the config speed")
    p = sub.add_parser("simulate", parents=[common], help="run the free boundary problem to t_max")
    p.add_argument("--t-max", type=float)
    p = sub.add_parser("classify", parents=[common], help="spreading/vanishing verdict")
    p.add_argument("--t-max", type=float)
    p = sub.add_parser("threshold", parents=[common], help="bracket the amplitude threshold sigma*")
    p.add_argument("--t-max", type=float)
    p.add_argument("--audit", type=int, default=0, help="also audit verdict monotonicity on N amplitudes")
    p = sub.add_parser("sweep", parents=[common], help="phase table over (c, sigma) or (c, h0)")
    p.add_argument("--speeds", type=_float_list, required=True)
    p.add_argument("--values", type=_float_list, required=True)
    p.add_argument("--axis", choices=("sigma", "h0"), default="sigma")
    p.add_argument("--t-max", type=float)
    sub.add_parser("verify", parents=[common], help="oracle cross-checks; writes a pass/fail manifest")
    return parser


def _out_dir(args, config: RunConfig) -> Path:
    path = Path(args.out_dir or config.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _emit(line: str) -> None:
    sys.stdout.write(line + "\n")


def _critical(config: RunConfig) -> semiwave.CriticalSpeed:
    return semiwave.critical_speed(config.params, config.mu, tol=config.speed_tol, spacing=config.bvp_spacing)


def cmd_critical_speed(args, config):
    cs = _critical(config)
    out = _out_dir(args, config)
    record = {"config_hash": config.hash, "c0": cs.c0, "residual": cs.residual, "iterations": cs.iterations, "X": cs.X}
    (out / "critical_speed.json").write_text(json.dumps(classify._round(record), sort_keys=True) + "\n")
    path = bvp.write_profile_csv(
        out / "semiwave_c0.csv", cs.wave.profile,
        {"config_hash": config.hash, "c": format_number(cs.c0), "slope0": format_number(cs.wave.slope0)},
    )
    _emit(f"c0 = {format_number(cs.c0)}")
    _emit(f"residual = {format_number(cs.residual)}")
    _emit(f"truncation_radius = {format_number(cs.X)}")
    _emit(f"profile = {path}")


def cmd_semiwave(args, config):
    c = args.c if args.c is not None else _critical(config).c0
    wave = semiwave.solve_semiwave(c, config.params, tol=config.bvp_tol, spacing=config.bvp_spacing)
    path = bvp.write_profile_csv(
        _out_dir(args, config) / "semiwave.csv", wave.profile,
        {"config_hash": config.hash, "c": format_number(c), "slope0": format_number(wave.slope0)},
    )
    _emit(f"c = {format_number(c)}")
    _emit(f"slope0 = {format_number(wave.slope0)}")
    _emit(f"profile = {path}")


def cmd_forced(args, config):
    cs = _critical(config)
    wave = forced.solve_forced_semiwave(
        args.L, config.params, config.climate_profile, config.c, tol=config.bvp_tol, c0=cs.c0, spacing=config.bvp_spacing
    )
    path = bvp.write_profile_csv(
        _out_dir(args, config) / "forced_semiwave.csv", wave.profile,
        {"config_hash": config.hash, "L": format_number(args.L), "c": format_number(config.c),
         "slopeL": format_number(wave.slopeL)},
    )
    _emit(f"L = {format_number(args.L)}")
    _emit(f"slopeL = {format_number(wave.slopeL)}")
    _emit(f"profile = {path}")


def cmd_l0(args, config):
    cs = _critical(config)
    res = forced.find_L0(
        config.params, config.climate_profile, config.mu, config.c, tol=config.shift_tol, c0=cs.c0,
        spacing=config.bvp_spacing,
    )
    record = {"config_hash": config.hash, "c": config.c, "c0": cs.c0, "L0": res.L0, "residual": res.residual}
    out = _out_dir(args, config)
    (out / "l0.json").write_text(json.dumps(classify._round(record), sort_keys=True) + "\n")
    path = bvp.write_profile_csv(
        out / "forced_semiwave_L0.csv", res.wave.profile,
        {"config_hash": config.hash, "L": format_number(res.L0), "c": format_number(config.c)},
    )
    _emit(f"L0 = {format_number(res.L0)}")
    _emit(f"residual = {format_number(res.residual)}")
    _emit(f"c0 = {format_number(cs.c0)}")
    _emit(f"profile = {path}")


def cmd_simulate(args, config):
    config.validate()
    t_max = args.t_max or config.t_max
    c0 = _critical(config).c0 if config.b > 0 and config.a > 0 else math.nan
    traj = stefan.simulate(config.problem, config.numerics, t_max, c0=c0, lineage=config.hash)
    out = _out_dir(args, config)
    traj.to_csv(out / "trajectory.csv")
    if traj.snapshots:
        traj.write_snapshots(out / "snapshots")
    inv = traj.invariants()
    _emit(f"t = {format_number(traj.t[-1])}")
    _emit(f"h = {format_number(traj.h[-1])}")
    _emit(f"sup_u = {format_number(traj.sup_u[-1])}")
    _emit(f"invariants_ok = {str(inv['positive'] and inv['bounded'] and inv['front_monotone']).lower()}")


def cmd_classify(args, config):
    config.validate()
    res = classify.classify_run(config, args.t_max)
    line = res.json_line()
    (_out_dir(args, config) / "classify.jsonl").write_text(line + "\n")
    _emit(line)


def cmd_threshold(args, config):
    config.validate()
    res = classify.find_sigma_star(config, t_max=args.t_max)
    record = {"config_hash": config.hash, **res.record()}
    if args.audit and res.status == "ok":
        ok, rows = classify.monotonicity_audit(config, classify.audit_grid(res, args.audit), args.t_max)
        record["audit"] = {"monotone": ok, "verdicts": [[s, v] for s, v in rows]}
    (_out_dir(args, config) / "threshold.json").write_text(json.dumps(classify._round(record), sort_keys=True) + "\n")
    _emit(f"status = {res.status}")
    _emit(f"sigma_lo = {format_number(res.sigma_lo)}")
    _emit(f"sigma_hi = {format_number(res.sigma_hi)}")
    if "audit" in record:
        _emit(f"audit_monotone = {str(record['audit']['monotone']).lower()}")


def cmd_sweep(args, config):
    table = classify.phase_sweep(config, args.speeds, args.values, args.axis, max(1, args.threads), args.t_max)
    out = _out_dir(args, config)
    table.to_csv(out / "sweep.csv", config.hash)
    (out / "sweep.jsonl").write_text("\n".join(table.json_lines()) + "\n")
    for cell in table.cells:
        _emit(f"c={format_number(cell.c)} {args.axis}={format_number(cell.value)} {cell.verdict}")


def cmd_verify(args, config):
    config.validate()
    manifest = verify.run_suite(config, log=lambda msg: print(msg, file=sys.stderr))
    manifest.write(_out_dir(args, config) / "manifest.json")
    _emit(f"passed = {str(manifest.passed).lower()}")
    return EXIT_OK if manifest.passed else EXIT_CHECK


COMMANDS = {
    "critical-speed": cmd_critical_speed,
    "semiwave": cmd_semiwave,
    "forced-semiwave": cmd_forced,
    "l0": cmd_l0,
    "simulate": cmd_simulate,
    "classify": cmd_classify,
    "threshold": cmd_threshold,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        config = RunConfig.from_file(args.config)
        return COMMANDS[args.command](args, config) or EXIT_OK
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
