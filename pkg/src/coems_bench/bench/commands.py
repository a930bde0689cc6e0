"""
Command execution shared by the command line and replay. A command runs from its resolved
arguments, exactly the dict recorded in the manifest, so a replay needs nothing but the manifest.
"""

import logging
import pathlib
import typing

from coems_bench.artifacts.run_directory import RunDirectory
from coems_bench.bench.analyze import AnalyzeCommand
from coems_bench.bench.cooling_sweep import CoolingSweep
from coems_bench.bench.design import DesignCommand, DesignParameters
from coems_bench.bench.drive_sweep import DriveSweep
from coems_bench.models.bench_models import BenchConfig, ModeEntry
from coems_bench.utils.error_codes import ErrorCode

_LOGGER = logging.getLogger(__name__)

CONFIG_COMMANDS = ("cooling-sweep", "drive-sweep")
RUN_COMMANDS = ("design",) + CONFIG_COMMANDS + ("analyze",)


class CommandResult(typing.NamedTuple):
    document: typing.Any
    """JSON-ready result printed on stdout"""
    error_code: typing.Optional[ErrorCode] = None
    message: typing.Optional[str] = None


def execute_command(
    command: str,
    arguments: dict[str, typing.Any],
    config: typing.Optional[BenchConfig],
    run_dir: RunDirectory,
    jobs: int = 1,
) -> CommandResult:
    """
    Runs one command into run_dir. jobs changes scheduling only, never the artifacts.

    :raises ValueError: On an unknown command or a config-less sweep
    """
    if command in CONFIG_COMMANDS and config is None:
        raise ValueError(f"{command} needs a config")

    if command == "design":
        params = DesignParameters(
            bath_temperature=arguments["bath_temperature_k"],
            snr=arguments["snr"],
            g_max=arguments["g_max"],
            n_points=arguments["n_points"],
            resonance_hz=arguments["resonance_hz"],
        )
        return CommandResult(DesignCommand(params).run(run_dir))

    elif command == "cooling-sweep":
        assert config is not None
        points = CoolingSweep(config, jobs).run(
            arguments["gains"],
            run_dir,
            seeds_per_gain=arguments["seeds_per_gain"],
            seed=arguments["seed"],
            save_records=arguments.get("save_records", False),
        )
        return CommandResult([point.model_dump() for point in points])

    elif command == "drive-sweep":
        assert config is not None
        return CommandResult(DriveSweep(config, jobs).run(arguments["voltages"], run_dir, seed=arguments["seed"]))

    elif command == "analyze":
        raw_guesses = arguments.get("guesses")
        guesses = [ModeEntry.model_validate(g) for g in raw_guesses] if raw_guesses is not None else None
        fit = AnalyzeCommand(
            pathlib.Path(arguments["psd"]), arguments["n_modes"], guesses, arguments["bath_temperature_k"]
        ).run(run_dir)
        if fit.converged:
            return CommandResult(fit.report())
        return CommandResult(fit.report(), ErrorCode.NON_CONVERGENCE, fit.message)

    raise ValueError(f"Unknown command: {command}")
