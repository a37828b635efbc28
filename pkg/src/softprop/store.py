"""Directory-backed persistence: content-addressed documents plus mutable
run and session records and an append-only run index.

Immutable documents (trees, snapshots) are stored under the sha256 of
their canonical bytes, which gives deduplication for free and lets reads
verify integrity. Run and session records change over a run's life and
are keyed by their ids instead.
"""

from __future__ import annotations

import hashlib
import os
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .canonical import canonical_bytes, canonical_loads
from .errors import IntegrityError, NotFound

RUN_STATUSES = ("queued", "analyzing", "grounding", "synthesizing", "done",
                "failed")


def new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:12]}"


class Store:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        for sub in ("objects", "runs", "sessions"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._index = self.root / "index.jsonl"

    # -- content-addressed documents ---------------------------------------

    def put_doc(self, doc) -> str:
        data = canonical_bytes(doc)
        ref = hashlib.sha256(data).hexdigest()
        path = self.root / "objects" / ref[:2] / f"{ref}.json"
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(data)
            os.replace(tmp, path)
        return ref

    def get_doc(self, ref: str):
        path = self.root / "objects" / ref[:2] / f"{ref}.json"
        if not path.exists():
            raise NotFound(f"no document {ref!r}")
        data = path.read_bytes()
        if hashlib.sha256(data).hexdigest() != ref:
            raise IntegrityError(f"document {ref!r} does not match its hash")
        return canonical_loads(data)

    def has_doc(self, ref: str) -> bool:
        return (self.root / "objects" / ref[:2] / f"{ref}.json").exists()

    # -- mutable records ----------------------------------------------------

    def _record_path(self, kind: str, record_id: str) -> Path:
        return self.root / kind / f"{record_id}.json"

    def put_run(self, record: dict) -> None:
        path = self._record_path("runs", record["run_id"])
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(canonical_bytes(record))
        os.replace(tmp, path)

    def get_run(self, run_id: str) -> dict:
        path = self._record_path("runs", run_id)
        if not path.exists():
            raise NotFound(f"no run {run_id!r}")
        return canonical_loads(path.read_bytes())

    def put_session(self, record: dict) -> None:
        path = self._record_path("sessions", record["session_id"])
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(canonical_bytes(record))
        os.replace(tmp, path)

    def get_session(self, session_id: str) -> dict:
        path = self._record_path("sessions", session_id)
        if not path.exists():
            raise NotFound(f"no session {session_id!r}")
        return canonical_loads(path.read_bytes())

    # -- append-only run index ----------------------------------------------

    def append_index(self, entry: dict) -> None:
        with open(self._index, "a", encoding="utf-8") as fh:
            fh.write(canonical_bytes(entry).decode("utf-8") + "\n")

    def list_runs(self) -> list[dict]:
        if not self._index.exists():
            return []
        out = []
        with open(self._index, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    out.append(canonical_loads(line))
        return out
