"""File-backed artifact store: day-partitioned JSONL datasets under a
documented layout with a digest manifest.

Layout: ``<root>/data/<dataset>/<YYYY-MM-DD>.jsonl`` plus ``<root>/manifest.json``.
Writes are atomic (temp file + rename) and serialized by lock files: one
writer per key, manifest updates behind a store-wide lock. Files are plain
UTF-8 JSONL so journalists' standard tools can read them directly.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from typing import Iterator

from filelock import FileLock

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

DATASETS = ("posts", "classified", "topics", "graph", "factcheck")

_REQUIRED_KEYS = {
    "posts": {"id", "platform", "author", "url", "published_at", "text"},
    "classified": {"post", "sentiment", "hate"},
    "topics": {"day", "topic_id", "size", "terms"},
    "graph": {"nodes", "edges"},
    "factcheck": {"claim", "query", "evidence_summaries", "grounding_context", "verdict", "channel"},
}


class StoreError(RuntimeError):
    pass


class NotFoundError(StoreError):
    """The requested key has no stored data."""


class CorruptionError(StoreError):
    """Stored bytes no longer match the manifest digest."""


@dataclass(frozen=True)
class DayPartitionKey:
    dataset: str
    day: date

    def __post_init__(self) -> None:
        if self.dataset not in DATASETS:
            raise ValueError(f"unknown dataset: {self.dataset!r}")
        if not isinstance(self.day, date):
            raise ValueError("day must be a date")


def _serialize(records: list[dict]) -> bytes:
    lines = []
    for rec in records:
        if not isinstance(rec, dict):
            raise StoreError(f"records must be JSON objects, got {type(rec).__name__}")
        try:
            lines.append(json.dumps(rec, ensure_ascii=False, sort_keys=True,
                                    separators=(",", ":")))
        except (TypeError, ValueError) as exc:
            raise StoreError(f"record not JSON-serializable: {exc}") from exc
    return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")


class Store:
    """Day-partitioned JSONL persistence with digest verification."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.data_dir = self.root / "data"
        self.manifest_path = self.root / "manifest.json"
        self._locks_dir = self.root / "locks"

    def initialize(self) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self.data_dir.mkdir(exist_ok=True)
        self._locks_dir.mkdir(exist_ok=True)
        if not self.manifest_path.exists():
            self._write_manifest({"schema_version": SCHEMA_VERSION, "datasets": {}})

    def exists(self) -> bool:
        return self.manifest_path.exists()

    # -- manifest ------------------------------------------------------

    def read_manifest(self) -> dict:
        if not self.manifest_path.exists():
            raise NotFoundError(f"no manifest at {self.manifest_path}")
        return json.loads(self.manifest_path.read_text("utf-8"))

    def _write_manifest(self, manifest: dict) -> None:
        _atomic_write(self.manifest_path,
                      (json.dumps(manifest, ensure_ascii=False, sort_keys=True, indent=2)
                       + "\n").encode("utf-8"))

    def _store_lock(self) -> FileLock:
        self._locks_dir.mkdir(parents=True, exist_ok=True)
        return FileLock(self._locks_dir / "manifest.lock")

    def _key_lock(self, key: DayPartitionKey) -> FileLock:
        self._locks_dir.mkdir(parents=True, exist_ok=True)
        return FileLock(self._locks_dir / f"{key.dataset}-{key.day.isoformat()}.lock")

    def _path_for(self, key: DayPartitionKey) -> Path:
        return self.data_dir / key.dataset / f"{key.day.isoformat()}.jsonl"

    # -- operations ----------------------------------------------------

    def put(self, key: DayPartitionKey, records: list[dict]) -> str:
        """Atomically replace the key's records; returns the content digest.

        Serialization happens before any file is touched, so a failing
        record leaves previous data intact.
        """
        required = _REQUIRED_KEYS[key.dataset]
        for rec in records:
            if not isinstance(rec, dict):
                raise StoreError(f"records must be JSON objects, got {type(rec).__name__}")
            missing = required - rec.keys()
            if missing:
                raise StoreError(f"{key.dataset} record missing fields: {sorted(missing)}")
        payload = _serialize(records)
        digest = hashlib.sha256(payload).hexdigest()

        path = self._path_for(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        with self._key_lock(key):
            _atomic_write(path, payload)
        with self._store_lock():
            self.initialize()
            manifest = self.read_manifest()
            days = manifest["datasets"].setdefault(key.dataset, {})
            days[key.day.isoformat()] = {"digest": digest, "count": len(records)}
            self._write_manifest(manifest)
        return digest

    def get(self, key: DayPartitionKey) -> list[dict]:
        """Records in stored order; digest-verified against the manifest."""
        manifest = self.read_manifest()
        entry = manifest["datasets"].get(key.dataset, {}).get(key.day.isoformat())
        path = self._path_for(key)
        if entry is None or not path.exists():
            raise NotFoundError(f"no data for {key.dataset}/{key.day.isoformat()}")
        payload = path.read_bytes()
        digest = hashlib.sha256(payload).hexdigest()
        if digest != entry["digest"]:
            raise CorruptionError(
                f"digest mismatch for {key.dataset}/{key.day.isoformat()}: "
                f"stored {entry['digest'][:12]}, found {digest[:12]}")
        return [json.loads(line) for line in payload.decode("utf-8").splitlines() if line]

    def days(self, dataset: str) -> list[date]:
        """Days with data for the dataset, ascending."""
        if dataset not in DATASETS:
            raise ValueError(f"unknown dataset: {dataset!r}")
        manifest = self.read_manifest()
        return sorted(date.fromisoformat(d) for d in manifest["datasets"].get(dataset, {}))

    def query_range(self, dataset: str, from_day: date, to_day: date) -> Iterator[dict]:
        """All records from from_day..to_day inclusive, in day order.

        Missing days are skipped silently.
        """
        if from_day > to_day:
            raise ValueError("from_day must be <= to_day")
        present = set(self.days(dataset))
        day = from_day
        while day <= to_day:
            if day in present:
                yield from self.get(DayPartitionKey(dataset, day))
            day += timedelta(days=1)

    def schema_version(self) -> int:
        return int(self.read_manifest()["schema_version"])


def _atomic_write(path: Path, payload: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    tmp.replace(path)
