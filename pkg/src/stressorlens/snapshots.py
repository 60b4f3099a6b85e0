"""Append-only snapshot store for pipeline artifacts.

Each snapshot is a numbered directory under <run_dir>/snapshots holding
artifact files plus a manifest with per-file SHA-256 hashes and a parent
link. A snapshot is staged in a temp directory and published with a single
rename, so readers only ever see complete snapshots.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable

from .errors import IntegrityError, MissingArtifactError

_MANIFEST = "manifest.json"


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass(frozen=True)
class SnapshotInfo:
    snapshot_id: int
    parent_snapshot_id: int | None
    created_utc: str
    config_hash: str
    files: dict[str, str]  # relative path -> sha256


class Snapshot:
    """Read handle over one published snapshot; reads verify integrity."""

    def __init__(self, path: Path, info: SnapshotInfo):
        self.path = path
        self.info = info

    @property
    def snapshot_id(self) -> int:
        return self.info.snapshot_id

    def has(self, name: str) -> bool:
        return name in self.info.files

    def file_path(self, name: str, hint: str = "") -> Path:
        if name not in self.info.files:
            raise MissingArtifactError(name, hint)
        path = self.path / name
        if not path.exists():
            raise IntegrityError(f"snapshot {self.snapshot_id}: {name} listed but absent")
        actual = _sha256_file(path)
        if actual != self.info.files[name]:
            raise IntegrityError(
                f"snapshot {self.snapshot_id}: {name} hash mismatch "
                f"(manifest {self.info.files[name][:12]}…, file {actual[:12]}…)"
            )
        return path

    def read_bytes(self, name: str, hint: str = "") -> bytes:
        return self.file_path(name, hint).read_bytes()

    def dir_path(self, prefix: str, hint: str = "") -> Path:
        """Verify and return a subdirectory containing manifest-listed files."""
        members = [n for n in self.info.files if n.startswith(prefix.rstrip("/") + "/")]
        if not members:
            raise MissingArtifactError(prefix, hint)
        for name in members:
            self.file_path(name)
        return self.path / prefix


class SnapshotStore:
    """Monotonic, atomic, hash-verified snapshot directory manager."""

    def __init__(self, run_dir: str | Path):
        self.run_dir = Path(run_dir)
        self.snapshots_dir = self.run_dir / "snapshots"
        self.snapshots_dir.mkdir(parents=True, exist_ok=True)

    def list_ids(self) -> list[int]:
        ids = []
        for entry in self.snapshots_dir.iterdir():
            if entry.is_dir() and entry.name.isdigit() and (entry / _MANIFEST).exists():
                ids.append(int(entry.name))
        return sorted(ids)

    def latest_id(self) -> int | None:
        ids = self.list_ids()
        return ids[-1] if ids else None

    def open(self, snapshot_id: int | None = None) -> Snapshot:
        if snapshot_id is None:
            snapshot_id = self.latest_id()
            if snapshot_id is None:
                raise MissingArtifactError("snapshot", "run 'ingest' first")
        path = self.snapshots_dir / f"{snapshot_id:04d}"
        manifest_path = path / _MANIFEST
        if not manifest_path.exists():
            raise MissingArtifactError(f"snapshot {snapshot_id}")
        data = json.loads(manifest_path.read_text("utf-8"))
        info = SnapshotInfo(
            snapshot_id=int(data["snapshot_id"]),
            parent_snapshot_id=data.get("parent_snapshot_id"),
            created_utc=data["created_utc"],
            config_hash=data["config_hash"],
            files=dict(data["files"]),
        )
        return Snapshot(path, info)

    def write(
        self,
        populate: Callable[[Path], None],
        config_hash: str,
        parent: Snapshot | None = None,
        carry: Iterable[str] = (),
    ) -> Snapshot:
        """Stage, hash, and atomically publish a new snapshot.

        `populate` fills the staging directory; `carry` names parent files
        (or whole prefixes ending in /) copied in before populate runs.
        """
        stage = Path(tempfile.mkdtemp(prefix=".stage-", dir=self.snapshots_dir))
        try:
            if parent is not None:
                for name in self._expand_carry(parent, carry):
                    src = parent.file_path(name)
                    dst = stage / name
                    dst.parent.mkdir(parents=True, exist_ok=True)
                    shutil.copyfile(src, dst)
            populate(stage)

            files = {}
            for path in sorted(stage.rglob("*")):
                if path.is_file():
                    files[path.relative_to(stage).as_posix()] = _sha256_file(path)

            new_id = (self.latest_id() or 0) + 1
            manifest = {
                "snapshot_id": new_id,
                "parent_snapshot_id": parent.snapshot_id if parent else None,
                "created_utc": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
                "config_hash": config_hash,
                "files": files,
            }
            manifest_bytes = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
            (stage / _MANIFEST).write_text(manifest_bytes, encoding="utf-8")

            final = self.snapshots_dir / f"{new_id:04d}"
            os.replace(stage, final)
            return self.open(new_id)
        except Exception:
            shutil.rmtree(stage, ignore_errors=True)
            raise

    @staticmethod
    def _expand_carry(parent: Snapshot, carry: Iterable[str]) -> list[str]:
        names: list[str] = []
        for item in carry:
            if item.endswith("/"):
                names.extend(n for n in parent.info.files if n.startswith(item))
            elif item in parent.info.files:
                names.append(item)
        return names
