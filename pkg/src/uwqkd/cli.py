"""Command-line front end writing CSV tables.

Every table starts with ``#`` comment lines describing the run (command,
version, timestamp, resolved parameters); the rows after them depend only on
the inputs and the seed.

Exit codes: 0 ok, 2 usage, 3 domain error, 4 validation failure,
5 no threshold crossing.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import asdict, replace
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .analysis import (
    PROTOCOLS,
    SOURCE_FRACTIONS,
    correlation_curve,
    max_secure_distance,
    qber_curve,
    source_position_sweep,
    validation_grid,
)
from .channel_model import correction_factor
from .config import load_config
from .errors import DomainError, NoCrossingError, UwqkdError
from .montecarlo import McConfig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_VALIDATION = 4
EXIT_NO_CROSSING = 5


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "pass" if value else "fail"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{value:.9g}" if math.isfinite(value) else ""
    return str(value)


class _Table:
    def __init__(self, header: list[str]):
        self.header = header
        self.rows: list[list[str]] = []

    def add(self, *values) -> None:
        self.rows.append([_fmt(v) for v in values])

    def render(self, manifest: list[str]) -> str:
        buf = io.StringIO()
        for line in manifest:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        writer.writerows(self.rows)
        return buf.getvalue()


def _resolve(args):
    """Configuration, water profile and system parameters from the flags."""
    cfg = load_config(args.config)
    sys_cfg = cfg.with_scenario(args.scenario)
    changes = {}
    if args.pupil is not None:
        changes["d1"] = changes["d2"] = args.pupil / 100
    if args.d1 is not None:
        changes["d1"] = args.d1 / 100
    if args.d2 is not None:
        changes["d2"] = args.d2 / 100
    if args.T_corr is not None:
        changes["t_corr"] = args.T_corr
    elif "d1" in changes:
        changes["t_corr"] = correction_factor(changes["d1"])
    return cfg.water(args.water), replace(sys_cfg, **changes)


def _manifest(args, argv: list[str], water, sys_cfg) -> list[str]:
    lines = [
        f"uwqkd {__version__}",
        "command: uwqkd " + " ".join(argv),
        "created: " + datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        f"scenario: {args.scenario}",
        f"water: {water.name} alpha_per_m={water.alpha:.9g} gamma_dep_per_m={water.gamma_dep:.9g}",
        "system: " + " ".join(f"{k}={v:.9g}" for k, v in asdict(sys_cfg).items()),
    ]
    if getattr(args, "seed", None) is not None:
        lines.append(f"seed: {args.seed}")
    return lines


def _mc_config(args) -> McConfig:
    return McConfig(n_packets=args.packets, photons_per_packet=args.photons, seed=args.seed,
                    workers=args.workers)


def _grid(args) -> np.ndarray:
    if args.points < 1:
        raise DomainError(f"--points must be at least 1, got {args.points}")
    if not 0 <= args.L_min < args.L_max:
        raise DomainError("need 0 <= --L-min < --L-max")
    return np.linspace(args.L_min, args.L_max, args.points)


def cmd_qber_curve(args, water, sys_cfg) -> tuple[_Table, int]:
    mc = _mc_config(args) if args.with_mc else None
    points = qber_curve(args.protocol, water, None, sys_cfg, args.x_fraction, _grid(args),
                        mc=mc, approx=args.first_order)
    table = _Table(["L_m", "qber_analytic", "gain", "corr_xx", "qber_mc", "mc_stderr"])
    step = 2 if mc else 1
    for i in range(0, len(points), step):
        p = points[i]
        m = points[i + 1] if mc else None
        table.add(p.x_value, p.qber, p.gain, p.corr_xx,
                  m.qber if m else None, m.std_err if m else None)
    return table, EXIT_OK


def cmd_max_distance(args, water, sys_cfg) -> tuple[_Table, int]:
    res = max_secure_distance(args.protocol, water, None, sys_cfg, args.x_fraction,
                              args.threshold, approx=args.first_order, L_hi=args.L_max)
    table = _Table(["protocol", "x_fraction", "threshold", "L_max_m", "qber_at_L_max",
                    "iterations", "bracket_lo_m", "bracket_hi_m"])
    table.add(args.protocol, res.x_fraction, res.threshold, res.L_max, res.qber,
              res.iterations, *res.bracket)
    return table, EXIT_OK


def cmd_source_sweep(args, water, sys_cfg) -> tuple[_Table, int]:
    results = source_position_sweep(water, None, sys_cfg, args.fractions,
                                    approx=args.first_order, threshold=args.threshold)
    table = _Table(["x_fraction", "L_max_m", "qber_at_L_max", "iterations"])
    for res in results:
        table.add(res.x_fraction, res.L_max, res.qber, res.iterations)
    return table, EXIT_OK


def cmd_correlation(args, water, sys_cfg) -> tuple[_Table, int]:
    table = _Table(["L_m", "corr_xx"])
    for p in correlation_curve(water, args.x_fraction, _grid(args), sys_cfg):
        table.add(p.x_value, p.corr_xx)
    return table, EXIT_OK


def cmd_validate(args, water, sys_cfg) -> tuple[_Table, int]:
    cfg = load_config(args.config)
    waters = {name: cfg.water(name) for name in args.waters}
    cells = validation_grid(sys_cfg, _mc_config(args), protocols=args.protocols,
                            waters=waters, scenarios=args.scenarios,
                            x_fraction=args.x_fraction)
    table = _Table(["protocol", "water", "scenario", "L_m", "qber_analytic", "qber_mc",
                    "mc_stderr", "tolerance", "corr_xx", "corr_xx_mc", "status"])
    for c in cells:
        table.add(c.protocol, c.water, c.scenario, c.L, c.qber_analytic, c.qber_hat,
                  c.std_err, c.tolerance, c.corr_xx, c.corr_xx_hat, c.passed)
    ok = all(c.passed for c in cells)
    return table, EXIT_OK if ok else EXIT_VALIDATION


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _csv_words(choices):
    def parse(text: str) -> list[str]:
        words = text.split(",")
        bad = [w for w in words if w not in choices]
        if bad:
            raise argparse.ArgumentTypeError(f"invalid choice(s) {bad}; choose from {choices}")
        return words
    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uwqkd", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"uwqkd {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file overriding built-in parameters")
    common.add_argument("--water", default="clear", choices=("clear", "coastal", "turbid"))
    common.add_argument("--scenario", type=int, default=1, choices=range(1, 6))
    common.add_argument("--pupil", type=float,
                        help="set both pupil diameters in cm (--d1/--d2 take precedence)")
    common.add_argument("--d1", type=float, help="transmitter pupil diameter in cm")
    common.add_argument("--d2", type=float, help="receiver pupil diameter in cm")
    common.add_argument("--T-corr", dest="T_corr", type=float,
                        help="aperture correction exponent (required for untabulated pupils)")
    common.add_argument("--x-fraction", type=float, default=0.5,
                        help="source position x/L for bbm92 (default 0.5)")
    common.add_argument("--first-order", action="store_true",
                        help="use the first-order click probability eta*mu for bbm92")
    common.add_argument("--out", help="write CSV here instead of standard output")

    protocol = argparse.ArgumentParser(add_help=False)
    protocol.add_argument("--protocol", default="bb84", choices=PROTOCOLS)

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--L-min", type=float, default=0.0, help="first distance in m")
    grid.add_argument("--L-max", type=float, default=200.0, help="last distance in m")
    grid.add_argument("--points", type=int, default=101)

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--packets", type=int, default=10_000)
    mc.add_argument("--photons", type=int, default=1_000, help="pulses per packet")
    mc.add_argument("--workers", type=int, default=1)

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qber-curve", parents=[common, protocol, grid, mc],
                       help="QBER versus distance")
    p.add_argument("--with-mc", action="store_true", help="add Monte Carlo columns")
    p.set_defaults(func=cmd_qber_curve)

    p = sub.add_parser("max-distance", parents=[common, protocol],
                       help="maximum secure distance")
    p.add_argument("--threshold", type=float, help="QBER limit (default: protocol limit)")
    p.add_argument("--L-max", type=float, default=500.0, help="upper search bound in m")
    p.set_defaults(func=cmd_max_distance)

    p = sub.add_parser("source-sweep", parents=[common],
                       help="bbm92-kraus maximum distance versus source position")
    p.add_argument("--threshold", type=float)
    p.add_argument("--fractions", type=_csv_floats, default=list(SOURCE_FRACTIONS))
    p.set_defaults(func=cmd_source_sweep)

    p = sub.add_parser("correlation", parents=[common, grid],
                       help="<sigma_x sigma_x> of the channel output versus distance")
    p.set_defaults(func=cmd_correlation, L_max=100.0)

    p = sub.add_parser("validate", parents=[common, mc],
                       help="Monte Carlo versus analytic QBER on a grid")
    p.add_argument("--protocols", type=_csv_words(PROTOCOLS),
                   default=["bb84", "sarg04", "bbm92-kraus"])
    p.add_argument("--waters", type=_csv_words(("clear", "coastal", "turbid")),
                   default=["clear", "coastal", "turbid"])
    p.add_argument("--scenarios", type=_csv_ints, default=[1, 5])
    p.set_defaults(func=cmd_validate, packets=1_000, photons=10_000)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        water, sys_cfg = _resolve(args)
        table, code = args.func(args, water, sys_cfg)
        text = table.render(_manifest(args, argv, water, sys_cfg))
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return code
    except NoCrossingError as exc:
        print(f"uwqkd: no crossing: {exc}", file=sys.stderr)
        return EXIT_NO_CROSSING
    except (UwqkdError, OSError) as exc:
        print(f"uwqkd: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
