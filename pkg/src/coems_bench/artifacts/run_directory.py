import hashlib
import json
import logging
import pathlib
import typing
from datetime import datetime, timezone

import numpy as np

import coems_bench
from coems_bench.models.bench_models import ArtifactEntry, RunManifest, RunStatus
from coems_bench.models.spectrum_models import Psd
from coems_bench.spectral.psd_io import write_psd
from coems_bench.utils.base_types import IsoTimestamp

_LOGGER = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
CSV_FORMAT = "%.17g"


def _now() -> IsoTimestamp:
    return IsoTimestamp(datetime.now(timezone.utc).isoformat())


def file_digest(path: pathlib.Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class RunDirectory:
    """
    One directory per invocation, named <UTC timestamp>_seed<seed>, holding CSV/JSON artifacts and a
    manifest.json written last by the single orchestrating process.

    Layout:
      - manifest.json: command, arguments, config echo, seed, tool version, timestamps, status
      - every other file: an artifact listed in the manifest with its sha256 digest
    """

    def __init__(
        self,
        root: pathlib.Path,
        command: str,
        arguments: dict[str, typing.Any],
        *,
        config: typing.Optional[dict[str, typing.Any]] = None,
        seed: typing.Optional[int] = None,
    ):
        started = datetime.now(timezone.utc)
        name = f"{started.strftime('%Y%m%dT%H%M%S_%fZ')}_seed{seed if seed is not None else 'none'}"
        self.path = root / name
        self.path.mkdir(parents=True, exist_ok=False)
        self.manifest = RunManifest(
            command=command,
            arguments=arguments,
            config=config,
            seed=seed,
            tool_version=coems_bench.__version__,
            started_at=IsoTimestamp(started.isoformat()),
        )
        self._artifacts: list[pathlib.Path] = []
        _LOGGER.info(f"Run directory created: {self.path}")

    def register(self, paths: typing.Iterable[pathlib.Path]) -> None:
        """Lists files already written inside the directory, e.g. by a worker process."""
        for path in paths:
            if path not in self._artifacts:
                self._artifacts.append(path)

    def write_table(self, name: str, columns: typing.Sequence[str], rows: np.ndarray) -> pathlib.Path:
        """CSV with a header row of column names; rows is 2-D with one column per name."""
        data = np.atleast_2d(np.asarray(rows, dtype=float))
        if data.shape[1] != len(columns):
            raise ValueError(f"{name}: {data.shape[1]} columns of data for {len(columns)} names")
        path = self.path / name
        np.savetxt(path, data, delimiter=",", header=",".join(columns), comments="", fmt=CSV_FORMAT)
        self.register([path])
        return path

    def write_json(self, name: str, document: typing.Any) -> pathlib.Path:
        path = self.path / name
        path.write_text(json.dumps(document, indent=2, sort_keys=True, default=str) + "\n")
        self.register([path])
        return path

    def write_psd(self, name: str, psd: Psd) -> pathlib.Path:
        paths = write_psd(psd, self.path / name)
        self.register(paths)
        return paths[0]

    @property
    def artifacts(self) -> list[pathlib.Path]:
        return list(self._artifacts)

    def finalize(self, status: RunStatus = "complete", error: typing.Optional[str] = None) -> pathlib.Path:
        """
        Writes manifest.json listing every artifact written so far with its digest.
        A failed or aborted run still gets a manifest, with status partial or failed.
        """
        self.manifest = self.manifest.model_copy(
            update={
                "finished_at": _now(),
                "status": status,
                "error": error,
                "artifacts": [
                    ArtifactEntry(path=str(path.relative_to(self.path)), sha256=file_digest(path))
                    for path in self._artifacts
                ],
            }
        )
        manifest_path = self.path / MANIFEST_NAME
        manifest_path.write_text(self.manifest.model_dump_json(indent=2) + "\n")
        _LOGGER.info(f"Manifest written ({status}, {len(self._artifacts)} artifacts): {manifest_path}")
        return manifest_path


def load_manifest(path: pathlib.Path) -> RunManifest:
    """
    :raises ValueError: If the file is not a valid manifest (pydantic.ValidationError)
    """
    return RunManifest.model_validate_json(path.read_text())


def verify_artifacts(manifest: RunManifest, directory: pathlib.Path) -> list[str]:
    """
    :return: relative paths of CSV artifacts whose digest in directory differs from the manifest
    """
    mismatched = []
    for entry in manifest.artifacts:
        if not entry.path.endswith(".csv"):
            continue
        candidate = directory / entry.path
        if not candidate.exists() or file_digest(candidate) != entry.sha256:
            mismatched.append(entry.path)
    return mismatched
