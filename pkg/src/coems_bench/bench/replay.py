import logging
import pathlib
import typing

from coems_bench.artifacts.run_directory import RunDirectory, load_manifest, verify_artifacts
from coems_bench.bench.commands import RUN_COMMANDS, CommandResult, execute_command
from coems_bench.models.bench_models import BenchConfig, RunManifest

_LOGGER = logging.getLogger(__name__)


class ReplayMismatchError(RuntimeError):
    def __init__(self, mismatched: list[str]) -> None:
        self.mismatched = mismatched
        super().__init__(f"{len(mismatched)} artifact(s) differ from the manifest: {', '.join(mismatched)}")


class ReplayCommand:
    """
    Re-runs the invocation recorded in a manifest into a fresh run directory under out_root and
    checks every CSV artifact against the recorded digest.
    """

    def __init__(self, manifest_path: pathlib.Path, out_root: pathlib.Path, jobs: int = 1):
        self.manifest_path = manifest_path
        self.manifest: RunManifest = load_manifest(manifest_path)
        if self.manifest.command not in RUN_COMMANDS:
            raise ValueError(f"Manifest command {self.manifest.command} cannot be replayed")
        self.config = BenchConfig.model_validate(self.manifest.config) if self.manifest.config is not None else None
        self.out_root = out_root
        self.jobs = jobs

    def create_run_directory(self) -> RunDirectory:
        return RunDirectory(
            self.out_root,
            self.manifest.command,
            self.manifest.arguments,
            config=self.manifest.config,
            seed=self.manifest.seed,
        )

    def run(self, run_dir: RunDirectory) -> CommandResult:
        """
        :raises ReplayMismatchError: If any recorded CSV is missing or differs
        """
        _LOGGER.info(f"Replaying {self.manifest.command} from {self.manifest_path}")
        result = execute_command(self.manifest.command, self.manifest.arguments, self.config, run_dir, self.jobs)
        mismatched = verify_artifacts(self.manifest, run_dir.path)
        if mismatched:
            raise ReplayMismatchError(mismatched)
        _LOGGER.info(f"Replay matched {len(self.manifest.artifacts)} recorded artifacts")
        return result

    def summary(self, result: CommandResult) -> dict[str, typing.Any]:
        return {"replayed": str(self.manifest_path), "command": self.manifest.command, "result": result.document}
