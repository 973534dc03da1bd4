# Licensed under the Apache License: http://www.apache.org/licenses/LICENSE-2.0
# For details: see the NOTICE file at the repository root

import argparse
import logging
import math
import sys
from contextlib import contextmanager
from dataclasses import replace
from typing import Callable, Dict, Iterator, List, Optional, Sequence, TextIO, Tuple, Type

from .config import NetworkConfig, load_config
from .errors import ConfigError, TwrnError
from .metrics import evaluate_point
from .mode import Mode
from .optimizer import (
    DEFAULT_MC_SIZE,
    DEFAULT_RATE_MAX,
    DEFAULT_RATE_MIN,
    DEFAULT_STEPS,
    DEFAULT_TOL,
    EbVariant,
    MetricSource,
    Objective,
    SweepRow,
    SweepSpec,
    crossing_rate,
    evaluate_row,
    optimal_rate,
)
from .output.abstract import Writer
from .output.csv import CsvWriter
from .output.json import JsonWriter
from .output.record import OutputRecord
from .simulator import replication_pool, run_replications
from .validation import DEFAULT_RATES, DEFAULT_SNR_DB, validate

logger = logging.getLogger(__name__)

PROG = "twrn-py"

EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

WRITERS: Dict[str, Type[Writer]] = {
    "csv": CsvWriter,
    "json": JsonWriter,
}


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not math.isfinite(value) or value <= 0:
        raise argparse.ArgumentTypeError(f"must be a finite number > 0, got {text}")
    return value


def float_list(text: str) -> Tuple[float, ...]:
    """
    Parses a comma-separated list such as "0,10,20"
    """
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")
    if not values or not all(math.isfinite(v) for v in values):
        raise argparse.ArgumentTypeError(f"expected a non-empty list of finite numbers, got {text!r}")
    return values


def snr_range(text: str) -> Tuple[float, ...]:
    """
    Parses MIN:MAX:STEP into an inclusive, evenly stepped list
    """
    try:
        lo, hi, step = (float(part) for part in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MIN:MAX:STEP, got {text!r}")
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"need STEP > 0 and MAX >= MIN, got {text!r}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(round(lo + i * step, 10) for i in range(count))


def _shared_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="JSON network configuration (defaults to the 10 dB reference setup)")
    shared.add_argument("--seed", type=int, help="override the configured master seed")
    shared.add_argument("--snr-db", type=float_list, help="comma-separated per-node SNRs in dB")
    shared.add_argument("--snr-range", type=snr_range, metavar="MIN:MAX:STEP", help="inclusive SNR range in dB")
    shared.add_argument("--noise-is-psd", action="store_true",
                        help="read noise_power as a spectral density and multiply it by the bandwidth")
    shared.add_argument("--paper-units", action="store_true", help="leave the bandwidth out of bit energies")
    shared.add_argument("--format", choices=sorted(WRITERS), default="csv")
    shared.add_argument("--output", help="write to this file instead of standard output")
    shared.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    return shared


def _add_mode(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", choices=("af", "df", "both"), default="af")


def _add_grid(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rates", type=float_list, help="explicit comma-separated rate list (bps/Hz)")
    parser.add_argument("--rate-min", type=positive_float, default=DEFAULT_RATE_MIN)
    parser.add_argument("--rate-max", type=positive_float, default=DEFAULT_RATE_MAX)
    parser.add_argument("--rate-steps", type=positive_int, default=DEFAULT_STEPS)
    parser.add_argument("--linear", action="store_true", help="linearly spaced rate grid instead of log-spaced")
    parser.add_argument("--source", choices=[s.value for s in MetricSource], default=MetricSource.ANALYTIC.value)
    parser.add_argument("--eb-variant", choices=[v.value for v in EbVariant], default=EbVariant.RENEWAL.value)


def _add_budget(parser: argparse.ArgumentParser, default_size: int) -> None:
    parser.add_argument("--rounds", type=positive_int, default=default_size, help="AF rounds per replication")
    parser.add_argument("--slots", type=positive_int, default=default_size, help="DF slots per replication")
    parser.add_argument("--reps", type=positive_int, default=1, help="independent replications")
    parser.add_argument("--workers", type=positive_int, default=1, help="worker processes for replications")


def build_parser() -> argparse.ArgumentParser:
    """
    Builds the command-line parser: one sub-command per operation
    :return: the parser
    """
    shared = _shared_parser()
    parser = argparse.ArgumentParser(prog=PROG, description="Two-way relay ARQ performance toolkit")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    analyze = commands.add_parser("analyze", parents=[shared], help="analytic metrics at one rate")
    _add_mode(analyze)
    analyze.add_argument("--rate", type=positive_float, required=True)

    simulate = commands.add_parser("simulate", parents=[shared], help="Monte Carlo run at one rate")
    _add_mode(simulate)
    simulate.add_argument("--rate", type=positive_float, required=True)
    _add_budget(simulate, 1_000_000)
    simulate.add_argument("--track-codewords", action="store_true",
                          help="record the number of AF rounds every delivered codeword needed")

    sweep = commands.add_parser("sweep", parents=[shared], help="metrics over a rate grid and SNR list")
    _add_mode(sweep)
    _add_grid(sweep)
    _add_budget(sweep, DEFAULT_MC_SIZE)

    optimize = commands.add_parser("optimize", parents=[shared], help="rate maximising goodput or minimising Eb")
    _add_mode(optimize)
    _add_grid(optimize)
    _add_budget(optimize, DEFAULT_MC_SIZE)
    optimize.add_argument("--objective", choices=[o.value for o in Objective], default=Objective.MAX_GOODPUT.value)
    optimize.add_argument("--tol", type=positive_float, default=DEFAULT_TOL)

    check = commands.add_parser("validate", parents=[shared], help="cross-check analytics against simulation")
    check.add_argument("--rates", type=float_list, default=DEFAULT_RATES)
    _add_budget(check, 1_000_000)
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")


def resolve_config(args: argparse.Namespace) -> NetworkConfig:
    """
    Loads the configuration and applies the command-line overrides; the noise
    reading is applied before any SNR so the SNR stays P / effective noise
    """
    cfg = load_config(args.config) if args.config else NetworkConfig.default()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.noise_is_psd:
        cfg = cfg.with_noise_psd()
    logger.info("configuration: %s", cfg.to_dict())
    return cfg


def snr_list(args: argparse.Namespace, default: Tuple[Optional[float], ...] = (None,)) -> Tuple[Optional[float], ...]:
    """
    None stands for "keep the configured powers"
    """
    if args.snr_db is not None and args.snr_range is not None:
        raise ValueError("--snr-db and --snr-range are mutually exclusive")
    if args.snr_db is not None:
        return args.snr_db
    if args.snr_range is not None:
        return args.snr_range
    return default


def modes(text: str) -> Tuple[Mode, ...]:
    if text == "both":
        return Mode.AF, Mode.DF
    return (Mode.from_str(text),)


def _spec(args: argparse.Namespace, mode: Mode, snrs: Tuple[Optional[float], ...]) -> SweepSpec:
    return SweepSpec(
        mode=mode,
        rate_min=args.rate_min,
        rate_max=args.rate_max,
        steps=args.rate_steps,
        snr_db=snrs,
        source=MetricSource.from_str(args.source),
        eb_variant=EbVariant.from_str(args.eb_variant),
        tol=getattr(args, "tol", DEFAULT_TOL),
        log_spaced=not args.linear,
        rates=args.rates,
        mc_size=args.rounds if mode is Mode.AF else args.slots,
        mc_reps=args.reps,
        workers=args.workers,
        paper_units=args.paper_units,
    )


@contextmanager
def open_output(path: Optional[str]) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        yield f


def run_analyze(args: argparse.Namespace, cfg: NetworkConfig, writer: Writer) -> int:
    rows = []
    for snr in snr_list(args):
        point_cfg = cfg if snr is None else cfg.with_snr_db(snr)
        snr_value = point_cfg.snr_db[0] if snr is None else snr
        for mode in modes(args.mode):
            rows.append(SweepRow(snr_value, evaluate_point(point_cfg, mode, args.rate, args.paper_units)))
    writer.write_records([OutputRecord.from_row(r) for r in rows])
    return EXIT_OK


def run_simulate(args: argparse.Namespace, cfg: NetworkConfig, writer: Writer) -> int:
    rows = []
    with replication_pool(args.workers) as pool:
        for snr in snr_list(args):
            point_cfg = cfg if snr is None else cfg.with_snr_db(snr)
            snr_value = point_cfg.snr_db[0] if snr is None else snr
            for mode in modes(args.mode):
                point = evaluate_point(point_cfg, mode, args.rate, args.paper_units)
                size = args.rounds if mode is Mode.AF else args.slots
                sim = run_replications(point_cfg, mode, args.rate, size, args.reps, cfg.seed, args.workers,
                                       track_codewords=args.track_codewords and mode is Mode.AF,
                                       paper_units=args.paper_units, pool=pool)
                rows.append(SweepRow(snr_value, point, sim))
    if args.format == "csv":
        writer.write_records([OutputRecord.from_row(r) for r in rows])
    else:
        writer.write_document([
            {
                "record": dict(zip(OutputRecord.header(), OutputRecord.from_row(r).values())),
                "simulation": r.sim.to_dict(),
            }
            for r in rows
        ])
    return EXIT_OK


def run_sweep(args: argparse.Namespace, cfg: NetworkConfig, writer: Writer) -> int:
    snrs = snr_list(args)
    specs = [_spec(args, mode, snrs) for mode in modes(args.mode)]
    grid = specs[0].grid
    # snr-major, rate, then mode
    with replication_pool(args.workers) as pool:
        rows = [evaluate_row(cfg, spec, snr, rate, pool) for snr in snrs for rate in grid for spec in specs]
    writer.write_records([OutputRecord.from_row(r) for r in rows])
    return EXIT_OK


def run_optimize(args: argparse.Namespace, cfg: NetworkConfig, writer: Writer) -> int:
    snrs = snr_list(args)
    objective = Objective.from_str(args.objective)
    both = args.mode == "both"
    reports = []
    with replication_pool(args.workers) as pool:
        for snr in snrs:
            crossing = None
            if both:
                spec = _spec(args, Mode.AF, snrs)
                crossing = crossing_rate(cfg, snr, spec.rate_min, spec.rate_max, spec.steps, spec.tol)
            for mode in modes(args.mode):
                report = optimal_rate(cfg, _spec(args, mode, snrs), objective, snr, pool)
                if both:
                    report = replace(report, crossing_rate=crossing)
                reports.append(report)
    writer.write_document(reports[0] if len(reports) == 1 else reports)
    return EXIT_OK


def run_validate(args: argparse.Namespace, cfg: NetworkConfig, writer: Writer) -> int:
    report = validate(
        cfg,
        snr_db=snr_list(args, DEFAULT_SNR_DB),
        rates=args.rates,
        rounds=args.rounds,
        slots=args.slots,
        reps=args.reps,
        workers=args.workers,
    )
    writer.write_document(report)
    return EXIT_OK if report.passed else EXIT_VALIDATION_FAILED


COMMANDS: Dict[str, Callable[[argparse.Namespace, NetworkConfig, Writer], int]] = {
    "analyze": run_analyze,
    "simulate": run_simulate,
    "sweep": run_sweep,
    "optimize": run_optimize,
    "validate": run_validate,
}


def _fail(message: str, code: int) -> int:
    print(f"{PROG}: error: {message}", file=sys.stderr)
    return code


def run(argv: Optional[List[str]] = None) -> int:
    """
    Runs one command and maps failures onto exit codes
    :param argv: arguments without the program name (defaults to sys.argv)
    :return: 0 ok, 1 failed validation, 2 usage or configuration, 3 numerical
    """
    args = parse_args(argv)
    configure_logging(args.verbose)
    try:
        cfg = resolve_config(args)
        with open_output(args.output) as out:
            return COMMANDS[args.command](args, cfg, WRITERS[args.format](out))
    except ConfigError as e:
        return _fail(str(e), EXIT_USAGE)
    except TwrnError as e:
        return _fail(str(e), EXIT_NUMERICAL)
    except ValueError as e:
        return _fail(str(e), EXIT_USAGE)
