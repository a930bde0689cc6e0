import enum
import json
import logging
import typing

_LOGGER = logging.getLogger(__name__)


class ErrorCode(enum.Enum):
    """
    Bench error codes with associated process exit codes and default messages.

    Each error code is defined as a tuple: (code_string, exit_code, default_message)
    """

    USAGE_ERROR = ("USAGE_ERROR", 1, "Invalid command-line arguments")
    CONFIG_INVALID = ("CONFIG_INVALID", 1, "Configuration failed validation")
    IO_ERROR = ("IO_ERROR", 1, "Could not read or write a file")
    PARSE_ERROR = ("PARSE_ERROR", 1, "Input file could not be parsed")
    SIMULATION_UNSTABLE = ("SIMULATION_UNSTABLE", 1, "Simulation configuration is unstable")
    NON_CONVERGENCE = ("NON_CONVERGENCE", 2, "Analysis did not converge")
    REPLAY_MISMATCH = ("REPLAY_MISMATCH", 1, "Replayed artifacts differ from the manifest")
    INTERNAL_ERROR = ("INTERNAL_ERROR", 1, "Internal error")

    def __init__(self, code: str, exit_code: int, default_message: str):
        self.code = code
        self.exit_code = exit_code
        self.default_message = default_message


EXIT_SUCCESS = 0


def create_error_report(
    error_code: ErrorCode,
    message: typing.Optional[str] = None,
    *,
    details: typing.Optional[typing.Any] = None,
) -> dict[str, typing.Any]:
    """
    Creates the standardized error document printed by the CLI on failure.
    """
    report: dict[str, typing.Any] = {
        "message": message or error_code.default_message,
        "errorCode": error_code.code,
        "exitCode": error_code.exit_code,
    }

    if details is not None:
        report["details"] = details

    return report


def format_error_report(report: dict[str, typing.Any]) -> str:
    # default=str keeps pydantic error contexts (which may hold exceptions) printable
    return json.dumps(report, indent=2, sort_keys=True, default=str)
