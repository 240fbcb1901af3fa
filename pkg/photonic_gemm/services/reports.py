import hashlib
import json
import logging
from pathlib import Path
from typing import Any, List, Union

import pandas as pd

from photonic_gemm.exceptions import ArtifactIOError
from photonic_gemm.models.run import Manifest, ManifestEntry

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"
MANIFEST_NAME = "manifest.json"


def sha256_file(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def read_report_csv(path: Union[str, Path]) -> pd.DataFrame:
    """Read a CSV written by ArtifactWriter, skipping its dataset line"""
    try:
        return pd.read_csv(path, comment="#")
    except FileNotFoundError:
        raise ArtifactIOError(f"Report not found: {path}", path=str(path))


class ArtifactWriter:
    """Writes run artifacts into one directory and keeps the manifest"""

    def __init__(self, output_dir: Union[str, Path]):
        self.output_dir = Path(output_dir)
        self.written: List[Path] = []
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.error(f"Error creating output directory {self.output_dir}: {e}")
            raise ArtifactIOError(f"Cannot create {self.output_dir}: {e}", path=str(self.output_dir))

    def _write_text(self, name: str, text: str) -> Path:
        path = self.output_dir / name
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
        except OSError as e:
            logger.error(f"Error writing {path}: {e}")
            raise ArtifactIOError(f"Cannot write {path}: {e}", path=str(path))
        if path not in self.written:
            self.written.append(path)
        logger.info(f"✓ Wrote {path}")
        return path

    def write_csv(self, frame: pd.DataFrame, name: str, dataset: str) -> Path:
        body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return self._write_text(name, f"# dataset: {dataset}\n{body}")

    def write_json(self, data: Any, name: str) -> Path:
        return self._write_text(name, json.dumps(data, indent=2, sort_keys=True) + "\n")

    def manifest(self, command: str, seed: int) -> Manifest:
        entries = [
            ManifestEntry(
                path=path.name,
                sha256=sha256_file(path),
                bytes=path.stat().st_size,
            )
            for path in self.written
            if path.name != MANIFEST_NAME
        ]
        return Manifest(command=command, seed=seed, files=sorted(entries, key=lambda e: e.path))

    def write_manifest(self, command: str, seed: int) -> Path:
        return self.write_json(self.manifest(command, seed).model_dump(mode="json"), MANIFEST_NAME)
