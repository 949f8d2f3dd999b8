"""Command-line front end.

Subcommands::

    boundaryboot table --name table1 --scale desk --seed 42 [--format csv]
    boundaryboot custom experiment.cfg
    boundaryboot asymptotic --case boundary --draws 10000 --seed 7
    boundaryboot location-demo --n 400 --reps 10000 --kappa 0.5 --seed 3

Every command takes ``--seed`` and is fully deterministic given it.  Exit
codes: 0 on success, 2 on usage/configuration errors, 3 on I/O failures.
``--threads`` falls back to the ``BOUNDARYBOOT_THREADS`` environment
variable, then to the CPU count.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import os
import sys
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from . import asymptotics, location_model, montecarlo, tables
from .config import ConfigError, parse_plan_text
from .rng import derive_stream
from .wild_bootstrap import SchemeSpec

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3

_FLOAT_FMT = "{:.17g}"


@dataclass(frozen=True)
class OutputSpec:
    """Where and how a command writes its table."""

    format: str = "csv"  # csv | markdown
    path: str = "-"  # "-" means standard output
    include_se: bool = True


@contextlib.contextmanager
def _open_output(spec: OutputSpec):
    if spec.path == "-":
        yield sys.stdout
        return
    with open(spec.path, "w", encoding="utf-8", newline="") as fh:
        yield fh


def _env_threads() -> int | None:
    raw = os.environ.get("BOUNDARYBOOT_THREADS")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(None, f"BOUNDARYBOOT_THREADS must be an integer, got {raw!r}")


def _resolve_threads(arg: int | None) -> int | None:
    return arg if arg is not None else _env_threads()


def _output_spec(args: argparse.Namespace) -> OutputSpec:
    return OutputSpec(
        format=args.format, path=args.output, include_se=not args.no_se
    )


def _emit_table(table, spec: OutputSpec) -> None:
    with _open_output(spec) as fh:
        if spec.format == "csv":
            tables.write_csv(table, fh)
        else:
            tables.write_markdown(table, fh, include_se=spec.include_se)


def cmd_table(args: argparse.Namespace) -> int:
    plan = montecarlo.preset(
        args.name, args.scale, master_seed=args.seed,
        threads=_resolve_threads(args.threads),
    )
    table = montecarlo.run_experiment(plan)
    _emit_table(table, _output_spec(args))
    return EXIT_OK


def cmd_custom(args: argparse.Namespace) -> int:
    try:
        text = open(args.config, "r", encoding="utf-8").read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    plan = parse_plan_text(text, threads=_resolve_threads(args.threads))
    table = montecarlo.run_experiment(plan)
    _emit_table(table, _output_spec(args))
    return EXIT_OK


def _write_rows(spec: OutputSpec, header, rows) -> None:
    with _open_output(spec) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [_FLOAT_FMT.format(v) if isinstance(v, float) else str(v) for v in row]
            )


def cmd_asymptotic(args: argparse.Namespace) -> int:
    if args.draws < 1:
        raise ConfigError(None, "need --draws >= 1")
    omega = np.array(
        [[args.omega[0], args.omega[1]], [args.omega[1], args.omega[2]]]
    )
    limit = (
        asymptotics.OrnsteinUhlenbeck(args.ou_c)
        if args.ou_c is not None
        else asymptotics.BrownianMotion()
    )
    config = asymptotics.LimitConfig(
        omega=omega,
        g_dot=np.array(args.g_dot),
        g_star_dot=np.array(args.g_star_dot) if args.g_star_dot else None,
        grid=args.grid,
        regressor_limit=limit,
    )
    rng = derive_stream(args.seed)
    case = args.case
    with_star = case in ("interior", "boundary", "standard-at-boundary")
    header = ["m11", "m12", "m22", "xi1", "xi2", "ell1", "ell2", "g_dot_ell"]
    if with_star:
        header += ["ell_star1", "ell_star2", "g_dot_ell_star"]
    rows = []
    for _ in range(args.draws):
        if case == "drift":
            draw = asymptotics.draw_original_limit(
                config,
                boundary=False,
                rng=rng,
                drift=(np.array(args.vartheta), args.drift_c),
            )
        else:
            draw = asymptotics.draw_original_limit(
                config, boundary=case != "interior", rng=rng
            )
        row = [
            float(draw.m[0, 0]),
            float(draw.m[0, 1]),
            float(draw.m[1, 1]),
            float(draw.xi[0]),
            float(draw.xi[1]),
            float(draw.ell[0]),
            float(draw.ell[1]),
            float(config.g_dot @ draw.ell),
        ]
        if with_star:
            star_case = {
                "interior": asymptotics.CASE_INTERIOR,
                "boundary": asymptotics.CASE_BOUNDARY,
                "standard-at-boundary": asymptotics.CASE_STANDARD_AT_BOUNDARY,
            }[case]
            ell_star = asymptotics.draw_bootstrap_limit(
                config, draw.m, draw.ell, star_case, rng
            )
            row += [
                float(ell_star[0]),
                float(ell_star[1]),
                float(config.g_dot @ ell_star),
            ]
        rows.append(row)
    _write_rows(_output_spec(args), header, rows)
    return EXIT_OK


def cmd_location_demo(args: argparse.Namespace) -> int:
    levels = tuple(args.levels)
    if not all(0.0 < q < 1.0 for q in levels):
        raise ConfigError(None, "levels must lie strictly inside (0, 1)")
    if args.theta0 < 0.0:
        raise ConfigError(None, "theta0 must be nonnegative")
    header = ["level", "target"]
    analytic_only = args.reps == 0
    if not analytic_only:
        header += ["reject_standard", "se_standard", "reject_corrected", "se_corrected"]
    rejections = np.zeros((2, len(levels)), dtype=np.int64)
    if not analytic_only:
        rng = derive_stream(args.seed)
        schemes = (
            SchemeSpec.standard(),
            SchemeSpec.power_corrected(args.kappa),
        )
        for _ in range(args.reps):
            sample = location_model.LocSample(
                y=args.theta0 + rng.standard_normal(args.n), theta0=args.theta0
            )
            for si, scheme in enumerate(schemes):
                p = location_model.loc_one_sided_p(sample, scheme)
                for li, q in enumerate(levels):
                    rejections[si, li] += (1.0 - p) <= q
    rows = []
    for li, q in enumerate(levels):
        # asymptotic rejection rate of the one-sided test: q below 1/2 (the
        # p-value is uniform there), 1 above (the atom at the boundary)
        target = q if (args.theta0 > 0.0 or q < 0.5) else 1.0
        row: list = [float(q), float(target)]
        if not analytic_only:
            for si in range(2):
                erp = rejections[si, li] / args.reps
                row += [float(erp), float(np.sqrt(erp * (1.0 - erp) / args.reps))]
        rows.append(row)
    _write_rows(_output_spec(args), header, rows)
    return EXIT_OK


def _add_output_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("csv", "markdown"), default="csv")
    parser.add_argument("--output", default="-", help="output path, '-' for stdout")
    parser.add_argument(
        "--no-se", action="store_true", help="omit standard errors from markdown output"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boundaryboot",
        description="Bootstrap inference for predictive regressions with a "
        "constrained parameter space",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_table = sub.add_parser("table", help="reproduce a published table grid")
    p_table.add_argument("--name", required=True, choices=montecarlo.PRESET_NAMES)
    p_table.add_argument("--scale", choices=montecarlo.SCALES, default="desk")
    p_table.add_argument("--seed", type=int, required=True)
    p_table.add_argument("--threads", type=int, default=None)
    _add_output_args(p_table)
    p_table.set_defaults(func=cmd_table)

    p_custom = sub.add_parser("custom", help="run an experiment from a config file")
    p_custom.add_argument("config")
    p_custom.add_argument("--threads", type=int, default=None)
    _add_output_args(p_custom)
    p_custom.set_defaults(func=cmd_custom)

    p_asym = sub.add_parser("asymptotic", help="sample the limit laws")
    p_asym.add_argument(
        "--case",
        required=True,
        choices=("interior", "boundary", "standard-at-boundary", "drift"),
    )
    p_asym.add_argument("--draws", type=int, required=True)
    p_asym.add_argument("--grid", type=int, default=2000)
    p_asym.add_argument("--seed", type=int, required=True)
    p_asym.add_argument(
        "--omega", type=float, nargs=3, default=(1.0, 0.5, 1.0),
        metavar=("XX", "XZ", "ZZ"),
    )
    p_asym.add_argument("--g-dot", type=float, nargs=2, default=(0.0, 1.0))
    p_asym.add_argument("--g-star-dot", type=float, nargs=2, default=None)
    p_asym.add_argument("--ou-c", type=float, default=None)
    p_asym.add_argument("--vartheta", type=float, nargs=2, default=(0.0, 0.0))
    p_asym.add_argument("--drift-c", type=float, default=0.0)
    _add_output_args(p_asym)
    p_asym.set_defaults(func=cmd_asymptotic)

    p_loc = sub.add_parser(
        "location-demo", help="analytic vs simulated location-model p-values"
    )
    p_loc.add_argument("--n", type=int, default=400)
    p_loc.add_argument("--reps", type=int, default=10_000)
    p_loc.add_argument("--kappa", type=float, default=0.5)
    p_loc.add_argument("--seed", type=int, required=True)
    p_loc.add_argument("--theta0", type=float, default=0.0)
    p_loc.add_argument(
        "--levels", type=float, nargs="+", default=(0.01, 0.05, 0.10, 0.25, 0.40)
    )
    _add_output_args(p_loc)
    p_loc.set_defaults(func=cmd_location_demo)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
