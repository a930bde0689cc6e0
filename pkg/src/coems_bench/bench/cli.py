import argparse
import json
import logging
import pathlib
import sys
import typing

import pydantic

from coems_bench.artifacts.run_directory import RunDirectory
from coems_bench.bench.analyze import DEFAULT_BATH_TEMPERATURE_K
from coems_bench.bench.config_loader import config_schema, load_bench_config, parse_float_list, parse_mode_guesses
from coems_bench.bench.commands import CONFIG_COMMANDS, CommandResult, execute_command
from coems_bench.bench.cooling_sweep import SweepRunError
from coems_bench.bench.design import DesignParameters
from coems_bench.bench.drive_sweep import MissingDriveError
from coems_bench.bench.replay import ReplayCommand, ReplayMismatchError
from coems_bench.models.bench_models import BenchConfig, RunStatus
from coems_bench.models.simulation_models import MAX_SEED
from coems_bench.physics.feedback_theory import InfiniteSnrError
from coems_bench.simulation.propagator import UnstableSimulationError
from coems_bench.spectral.calibration import ReferenceToneNotFoundError
from coems_bench.spectral.fitting import FitConvergenceError
from coems_bench.spectral.psd_io import PsdParseError
from coems_bench.spectral.welch import SeriesTooShortError
from coems_bench.utils.config_validator import InvalidConfigurationError
from coems_bench.utils.env_vars import get_default_jobs, get_log_level
from coems_bench.utils.error_codes import EXIT_SUCCESS, ErrorCode, create_error_report, format_error_report

_LOGGER = logging.getLogger(__name__)

DEFAULT_OUT = pathlib.Path("runs")
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class UsageError(ValueError):
    pass


class BenchArgumentParser(argparse.ArgumentParser):
    """Raises instead of exiting so usage errors go through the same error report as everything else."""

    def error(self, message: str) -> typing.NoReturn:
        raise UsageError(message)


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value <= MAX_SEED:
        raise ValueError(f"Seed must be in [0, {MAX_SEED}], got {value}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError(f"Expected a positive integer, got {value}")
    return value


def build_parser() -> BenchArgumentParser:
    parser = BenchArgumentParser(prog="coems_bench", description="Feedback cooling bench for mechanical modes")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def run_parser(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--out", type=pathlib.Path, default=DEFAULT_OUT, help="Root directory for run directories")
        sub.add_argument("--jobs", type=_positive_int, default=None, help="Parallel runs (default COEMS_BENCH_JOBS or 1)")
        return sub

    defaults = DesignParameters()
    design = run_parser("design", "Closed-form cooling curve and optimum gain")
    design.add_argument("--bath-temperature-k", type=float, default=defaults.bath_temperature)
    design.add_argument("--snr", type=float, default=defaults.snr)
    design.add_argument("--g-max", type=float, default=defaults.g_max)
    design.add_argument("--n-points", type=int, default=defaults.n_points)
    design.add_argument("--resonance-hz", type=float, default=defaults.resonance_hz)

    cooling = run_parser("cooling-sweep", "Simulate a gain sweep and infer in-loop and out-of-loop temperatures")
    cooling.add_argument("--config", type=pathlib.Path, required=True)
    cooling.add_argument("--seed", type=_seed, default=None)
    cooling.add_argument("--gains", type=parse_float_list, default=None, help="Comma list, e.g. 0,1,2,4,8")
    cooling.add_argument("--seeds-per-gain", type=_positive_int, default=None)
    cooling.add_argument(
        "--save-records", action="store_true", help="Also write the first replicate of each gain as a time series"
    )

    drive = run_parser("drive-sweep", "Simulate resonant drives and infer the gradient force")
    drive.add_argument("--config", type=pathlib.Path, required=True)
    drive.add_argument("--seed", type=_seed, default=None)
    drive.add_argument("--voltages", type=parse_float_list, default=None, help="Comma list of V_rms")

    analyze = run_parser("analyze", "Fit a displacement spectrum at a known bath temperature")
    analyze.add_argument("--psd", type=pathlib.Path, required=True)
    analyze.add_argument("--n-modes", type=_positive_int, default=None)
    analyze.add_argument("--guesses", type=str, default=None, help="JSON list of mode entries, inline or a file")
    analyze.add_argument("--bath-temperature-k", type=float, default=DEFAULT_BATH_TEMPERATURE_K)

    replay = run_parser("replay", "Re-run a recorded invocation and compare its CSV artifacts")
    replay.add_argument("--manifest", type=pathlib.Path, required=True)

    subparsers.add_parser("schema", help="Print the config JSON Schema")
    return parser


def resolve_arguments(
    args: argparse.Namespace, config: typing.Optional[BenchConfig]
) -> tuple[dict[str, typing.Any], typing.Optional[int]]:
    """
    Fills defaults from the config so the returned dict (recorded in the manifest) fully determines
    the run.

    :return: (arguments, seed)
    """
    if args.command == "design":
        arguments = {
            "bath_temperature_k": args.bath_temperature_k,
            "snr": args.snr,
            "g_max": args.g_max,
            "n_points": args.n_points,
            "resonance_hz": args.resonance_hz,
        }
        return arguments, None

    if args.command == "analyze":
        guesses = parse_mode_guesses(args.guesses) if args.guesses is not None else None
        n_modes = args.n_modes if args.n_modes is not None else (len(guesses) if guesses else 1)
        arguments = {
            "psd": str(args.psd.resolve()),
            "n_modes": n_modes,
            "guesses": [g.model_dump() for g in guesses] if guesses is not None else None,
            "bath_temperature_k": args.bath_temperature_k,
        }
        return arguments, None

    assert config is not None
    seed = args.seed if args.seed is not None else config.simulation.seed
    if args.command == "cooling-sweep":
        arguments = {
            "gains": args.gains if args.gains is not None else config.sweep.gains,
            "seeds_per_gain": (
                args.seeds_per_gain if args.seeds_per_gain is not None else config.analysis.seeds_per_gain
            ),
            "seed": seed,
            "save_records": args.save_records,
        }
    else:
        arguments = {"voltages": args.voltages if args.voltages is not None else config.sweep.voltages_vrms, "seed": seed}
    return arguments, seed


def error_code_for(error: BaseException) -> ErrorCode:
    if isinstance(error, SweepRunError):
        return error_code_for(error.cause)
    if isinstance(error, ReplayMismatchError):
        return ErrorCode.REPLAY_MISMATCH
    if isinstance(error, UnstableSimulationError):
        return ErrorCode.SIMULATION_UNSTABLE
    if isinstance(error, (FitConvergenceError, ReferenceToneNotFoundError)):
        return ErrorCode.NON_CONVERGENCE
    if isinstance(error, (json.JSONDecodeError, PsdParseError)):
        return ErrorCode.PARSE_ERROR
    if isinstance(
        error,
        (pydantic.ValidationError, InvalidConfigurationError, MissingDriveError, InfiniteSnrError, SeriesTooShortError),
    ):
        return ErrorCode.CONFIG_INVALID
    if isinstance(error, OSError):
        return ErrorCode.IO_ERROR
    if isinstance(error, ValueError):
        return ErrorCode.USAGE_ERROR
    return ErrorCode.INTERNAL_ERROR


def report_error(error_code: ErrorCode, message: typing.Optional[str] = None, details: typing.Any = None) -> int:
    print(format_error_report(create_error_report(error_code, message, details=details)), file=sys.stderr)
    return error_code.exit_code


def print_document(document: typing.Any) -> None:
    print(json.dumps(document, indent=2, sort_keys=True, default=str))


class BenchCli:
    def __init__(self, jobs: int = 1):
        self.jobs = jobs
        self.run_dir: typing.Optional[RunDirectory] = None

    def _run(self, args: argparse.Namespace) -> CommandResult:
        if args.command == "replay":
            replay = ReplayCommand(args.manifest, args.out, self.jobs)
            self.run_dir = replay.create_run_directory()
            result = replay.run(self.run_dir)
            return result._replace(document=replay.summary(result))

        config = load_bench_config(args.config) if args.command in CONFIG_COMMANDS else None
        arguments, seed = resolve_arguments(args, config)
        self.run_dir = RunDirectory(
            args.out,
            args.command,
            arguments,
            config=config.model_dump(mode="json") if config is not None else None,
            seed=seed,
        )
        return execute_command(args.command, arguments, config, self.run_dir, self.jobs)

    def handle(self, args: argparse.Namespace) -> int:
        _LOGGER.info(f"Command {args.command} invoked")
        if args.command == "schema":
            print_document(config_schema())
            return EXIT_SUCCESS

        self.run_dir = None
        try:
            result = self._run(args)
        except Exception as e:
            error_code = error_code_for(e)
            if error_code == ErrorCode.INTERNAL_ERROR:
                _LOGGER.error(f"Unexpected error in {args.command}: {str(e)}", exc_info=True)
            else:
                _LOGGER.warning(f"{args.command} failed ({error_code.code}): {str(e)}")
            self._finalize_failure(e)
            details = e.errors() if isinstance(e, pydantic.ValidationError) else None
            return report_error(error_code, str(e), details)

        assert self.run_dir is not None
        print_document(result.document)
        if result.error_code is not None:
            self.run_dir.finalize("failed", result.message)
            return report_error(result.error_code, result.message)
        self.run_dir.finalize("complete")
        return EXIT_SUCCESS

    def _finalize_failure(self, error: Exception) -> None:
        if self.run_dir is None:
            return
        status: RunStatus = "partial" if isinstance(error, SweepRunError) and error.partial_points else "failed"
        try:
            self.run_dir.finalize(status, str(error))
        except OSError as e:
            _LOGGER.error(f"Could not write the manifest for a failed run: {str(e)}", exc_info=True)


def main(raw_args: typing.Optional[typing.Sequence[str]] = None) -> int:
    try:
        log_level = get_log_level()
    except ValueError as e:
        return report_error(ErrorCode.USAGE_ERROR, str(e))
    logging.basicConfig(level=log_level, format=LOG_FORMAT, stream=sys.stderr)

    try:
        args = build_parser().parse_args(raw_args)
        jobs = args.jobs if getattr(args, "jobs", None) is not None else get_default_jobs()
    except ValueError as e:
        return report_error(ErrorCode.USAGE_ERROR, str(e))
    return BenchCli(jobs).handle(args)
