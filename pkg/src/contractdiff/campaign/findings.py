"""Inconsistency records: one JSON file per finding plus a sorted index."""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from ..harness.metrics import Classification, DiffReport
from ..vm.interpreter import ExecutionRecord

FORMAT_VERSION = 1
INDEX = "index.json"


class InvalidFinding(Exception):
    """The file is not a storable finding (e.g. every backend agreed)."""


def source_hash(source: str) -> str:
    return hashlib.sha256(source.encode()).hexdigest()


def is_finding(report: DiffReport) -> bool:
    return report.out_vul or report.classification is Classification.CRASH_ASYMMETRY


@dataclass(frozen=True)
class InconsistencyRecord:
    source: str  # canonical pretty-printed source
    function: str
    calldata: bytes
    records: Tuple[ExecutionRecord, ...]
    report: DiffReport
    iteration: int
    lineage: str
    backends: Tuple[dict, ...]
    limits: dict

    def __post_init__(self):
        if not is_finding(self.report):
            raise InvalidFinding("only output inconsistencies and crash asymmetries are stored")

    @property
    def classification(self) -> Classification:
        return self.report.classification

    @property
    def key(self) -> Tuple[str, str]:
        return (self.classification.value, source_hash(self.source))

    @property
    def finding_id(self) -> str:
        return f"{self.classification.value}-{source_hash(self.source)[:16]}"

    def to_dict(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "id": self.finding_id,
            "classification": self.classification.value,
            "iteration": self.iteration,
            "lineage": self.lineage,
            "function": self.function,
            "source": self.source,
            "source_sha256": source_hash(self.source),
            "calldata": self.calldata.hex(),
            "backends": list(self.backends),
            "limits": self.limits,
            "records": [r.to_dict() for r in self.records],
            "report": self.report.to_dict(),
        }


def load_finding(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise InvalidFinding(f"cannot read {path}: {exc}") from None
    if not isinstance(data, dict) or data.get("version") != FORMAT_VERSION:
        raise InvalidFinding(f"{path} is not a version-{FORMAT_VERSION} finding")
    if data.get("classification") == Classification.ALL_AGREE.value:
        raise InvalidFinding(f"{path} records an AllAgree run; only findings are stored")
    return data


class FindingStore:
    """Deduplicates by (classification, source hash) and writes to ``directory``."""

    def __init__(self, directory: Optional[str]):
        self.directory = directory
        self.seen: Dict[Tuple[str, str], InconsistencyRecord] = {}
        self.raw_count = 0

    def add(self, rec: InconsistencyRecord) -> bool:
        self.raw_count += 1
        if rec.key in self.seen:
            return False
        self.seen[rec.key] = rec
        if self.directory:
            os.makedirs(self.directory, exist_ok=True)
            _write_json(os.path.join(self.directory, rec.finding_id + ".json"), rec.to_dict())
        return True

    def index(self) -> List[dict]:
        rows = [
            {
                "id": r.finding_id,
                "file": r.finding_id + ".json",
                "classification": r.classification.value,
                "iteration": r.iteration,
                "lineage": r.lineage,
                "source_sha256": source_hash(r.source),
                "aggregate_diff": r.report.aggregate_diff,
                "out_vul": r.report.out_vul,
                "statuses": [rec.status.value for rec in r.records],
            }
            for r in self.seen.values()
        ]
        return sorted(rows, key=lambda row: (row["iteration"], row["id"]))

    def write_index(self) -> Optional[str]:
        if not self.directory:
            return None
        os.makedirs(self.directory, exist_ok=True)
        path = os.path.join(self.directory, INDEX)
        _write_json(path, {"version": FORMAT_VERSION, "findings": self.index()})
        return path

    def __len__(self) -> int:
        return len(self.seen)


def _write_json(path: str, data) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def read_index(directory: str) -> List[dict]:
    path = os.path.join(directory, INDEX)
    if not os.path.exists(path):
        return []
    with open(path) as fh:
        return json.load(fh)["findings"]


def summarize(records: Sequence[ExecutionRecord]) -> str:
    return ", ".join(f"{r.backend_id}={r.status.value}" for r in records)
