import csv
import json
import logging
import uuid
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from ..core.config import get_settings
from ..core.exceptions import RunDirectoryError
from ..schemas.grid import GridSpec
from ..schemas.series import NormSeries
from ..utils.transforms import SpatialField

logger = logging.getLogger(__name__)
settings = get_settings()

META_FILE = "meta.json"
SERIES_FILE = "series.csv"
VERDICTS_FILE = "verdicts.json"
REPORT_FILE = "report.md"
PLOTS_FILE = "plots.gp"

PathLike = Union[str, Path]


def _dumps(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


class RunRepository:
    """Run directories on the local filesystem: one directory per command invocation."""

    def __init__(self, root: Optional[PathLike] = None) -> None:
        self.root = Path(root or settings.output_root)

    def create_run_dir(self, command: str, out: Optional[PathLike] = None) -> Path:
        run_dir = Path(out) if out else self.root / f"{command}-{uuid.uuid4().hex[:8]}"
        try:
            run_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise RunDirectoryError(f"cannot create run directory {run_dir}: {exc}") from exc
        logger.info("Run directory: %s", run_dir)
        return run_dir

    def _write(self, run_dir: Path, name: str, text: str) -> Path:
        path = Path(run_dir) / name
        try:
            # newline="" keeps the CRLF row endings the csv module writes
            with open(path, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
        except OSError as exc:
            raise RunDirectoryError(f"cannot write {path}: {exc}") from exc
        return path

    def _read(self, run_dir: Path, name: str) -> str:
        path = Path(run_dir) / name
        try:
            with open(path, "r", encoding="utf-8", newline="") as handle:
                return handle.read()
        except OSError as exc:
            raise RunDirectoryError(f"cannot read {path}: {exc}") from exc

    def write_meta(self, run_dir: Path, meta: Dict[str, Any]) -> Path:
        return self._write(run_dir, META_FILE, _dumps(meta))

    def read_meta(self, run_dir: Path) -> Dict[str, Any]:
        return self._load_json(run_dir, META_FILE)

    def write_verdicts(self, run_dir: Path, verdicts: Dict[str, Any]) -> Path:
        return self._write(run_dir, VERDICTS_FILE, _dumps(verdicts))

    def read_verdicts(self, run_dir: Path) -> Dict[str, Any]:
        return self._load_json(run_dir, VERDICTS_FILE)

    def _load_json(self, run_dir: Path, name: str) -> Dict[str, Any]:
        text = self._read(run_dir, name)
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise RunDirectoryError(f"{Path(run_dir) / name}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc

    def write_text(self, run_dir: Path, name: str, text: str) -> Path:
        return self._write(run_dir, name, text)

    def write_series(self, run_dir: Path, series: NormSeries, name: str = SERIES_FILE) -> Path:
        """Header "t" plus one column per norm; floats written with repr so they read back exactly."""
        path = Path(run_dir) / name
        columns = series.column_names
        try:
            with open(path, "w", encoding="utf-8", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(["t", *columns])
                for i, t in enumerate(series.times):
                    writer.writerow([repr(float(t)), *(repr(float(series.columns[c][i])) for c in columns)])
        except OSError as exc:
            raise RunDirectoryError(f"cannot write {path}: {exc}") from exc
        logger.info("Wrote %d rows x %d columns to %s", len(series), len(columns), path)
        return path

    def read_series(self, run_dir: Path, name: str = SERIES_FILE) -> NormSeries:
        path = Path(run_dir) / name
        if not path.exists():
            return NormSeries()
        rows = list(csv.reader(self._read(run_dir, name).splitlines()))
        if not rows:
            return NormSeries()
        header, body = rows[0], rows[1:]
        if not header or header[0] != "t":
            raise RunDirectoryError(f"{path}: first column must be 't' (got {header[:1]})")
        try:
            times = [float(row[0]) for row in body]
            columns = {name: [float(row[i + 1]) for row in body] for i, name in enumerate(header[1:])}
            return NormSeries.from_columns(times, columns)
        except (ValueError, IndexError) as exc:
            raise RunDirectoryError(f"{path}: malformed series: {exc}") from exc

    def write_snapshot(self, run_dir: Path, name: str, field: SpatialField, t: float) -> Path:
        """Raw little-endian float64 values in <name>.bin with a JSON sidecar describing the grid."""
        values = np.ascontiguousarray(field.values, dtype="<f8")
        sidecar = {
            "dtype": "<f8",
            "shape": list(values.shape),
            "grid": field.spec.model_dump(mode="json"),
            "t": float(t),
        }
        path = Path(run_dir) / f"{name}.bin"
        try:
            path.write_bytes(values.tobytes())
        except OSError as exc:
            raise RunDirectoryError(f"cannot write {path}: {exc}") from exc
        self._write(run_dir, f"{name}.json", _dumps(sidecar))
        return path

    def read_snapshot(self, run_dir: Path, name: str) -> SpatialField:
        sidecar = self._load_json(run_dir, f"{name}.json")
        path = Path(run_dir) / f"{name}.bin"
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise RunDirectoryError(f"cannot read {path}: {exc}") from exc
        values = np.frombuffer(raw, dtype=sidecar["dtype"]).reshape(sidecar["shape"])
        return SpatialField(GridSpec(**sidecar["grid"]), values.astype(float))
