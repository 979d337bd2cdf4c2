"""Command-line entry point: ``wpcn solve|oracle|sweep|figures``.

Exit codes: 0 success, 1 configuration error (bad file, key, value or
flag), 2 a result did not converge and ``--strict`` was given.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ALL_KEYS, ConfigError, build_config, read_config
from .experiments import FIGURES, SweepKind, run_sweep, worker_count, write_csv
from .oracle import oracle_grid
from .rates import Direction, Scheme
from .solver import SolveResult, solve

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOT_CONVERGED = 2


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting on bad flags."""

    def error(self, message):
        raise ConfigError(message)


def _flag(key: str) -> str:
    return "--" + key.replace("_", "-")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--strict", action="store_true",
                        help="exit with status 2 if any result did not converge")
    keys = parser.add_argument_group("configuration overrides")
    for key in ALL_KEYS:
        keys.add_argument(_flag(key), dest=f"key_{key}", metavar="VALUE",
                          help=argparse.SUPPRESS)


def _add_scheme(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scheme", required=True, choices=[s.value for s in Scheme])
    parser.add_argument("--direction", choices=[d.value for d in Direction],
                        help="relay direction (default: the better one)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wpcn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance for one scheme")
    _add_common(p)
    _add_scheme(p)

    p = sub.add_parser("oracle", help="brute-force grid maximum for one scheme")
    _add_common(p)
    _add_scheme(p)

    p = sub.add_parser("sweep", help="run the sweep described by the config, write CSV")
    _add_common(p)
    p.add_argument("--out", help="CSV file (default: stdout)")
    p.add_argument("--workers", type=int, help="worker processes (default: WPCN_THREADS or 1)")

    p = sub.add_parser("figures", help="run the four built-in sweeps into a directory")
    _add_common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, help="worker processes (default: WPCN_THREADS or 1)")
    return parser


def _load(args):
    values = read_config(args.config) if args.config else {}
    for key in ALL_KEYS:
        override = getattr(args, f"key_{key}")
        if override is not None:
            values[key] = override
    return build_config(values)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def format_result(result: SolveResult) -> str:
    a = result.allocation
    lines = [
        ("scheme", result.scheme.value),
        ("direction", result.direction.value if result.direction else "none"),
        ("common", result.common),
        ("t1", a.t1), ("t2", a.t2), ("t3", a.t3), ("t4a", a.t4a), ("t4b", a.t4b),
        ("r_x", result.rates.r_x), ("r_y", result.rates.r_y),
        ("converged", result.converged),
        ("achievable", result.achievable),
        ("iterations", result.iterations),
    ]
    lines += [(f"phase_{k}", float(v)) for k, v in result.rates.phases.items()]
    lines += [(f"residual_{k}", float(v)) for k, v in result.residuals.items()]
    return "".join(f"{k}={_fmt(v)}\n" for k, v in lines)


def _run_single(args, config, use_oracle: bool) -> int:
    direction = Direction(args.direction) if args.direction else None
    scheme = Scheme(args.scheme)
    channels = config.channels()
    if use_oracle:
        result = oracle_grid(scheme, config.params, channels,
                             grid_step=config.solver.oracle_grid_step, direction=direction)
    else:
        result = solve(scheme, config.params, channels, config.solver, direction)
    sys.stdout.write(format_result(result))
    if args.strict and not result.converged:
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _run_sweep(args, config) -> int:
    spec = config.sweep_spec()
    rows = run_sweep(spec, config.solver, worker_count(args.workers))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    if args.strict and not all(r.converged for r in rows):
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _run_figures(args, config) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    workers = worker_count(args.workers)
    all_converged = True
    for name, kind in FIGURES.items():
        spec = config.sweep_spec(SweepKind(kind))
        rows = run_sweep(spec, config.solver, workers)
        path = out / f"{name}.csv"
        with open(path, "w", newline="") as fh:
            write_csv(rows, fh)
        all_converged &= all(r.converged for r in rows)
        print(path)
    if args.strict and not all_converged:
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
        config = _load(args)
        if args.command == "figures":
            fixed = sorted({"sweep_kind", "start", "stop"} & config.sweep.keys())
            if fixed:
                raise ConfigError(f"'{fixed[0]}' does not apply to figures")
        if args.command == "solve":
            return _run_single(args, config, use_oracle=False)
        if args.command == "oracle":
            return _run_single(args, config, use_oracle=True)
        if args.command == "sweep":
            return _run_sweep(args, config)
        return _run_figures(args, config)
    except ValueError as exc:  # ConfigError and invalid parameter values
        print(f"wpcn: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


def main() -> None:
    sys.exit(cli_main())
