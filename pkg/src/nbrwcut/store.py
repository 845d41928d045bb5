"""Append-only JSON-lines result store and CSV exports."""
import csv
import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

log = logging.getLogger(__name__)


class ResultConflict(Exception):
    """Two records claim the same cell and seeds but disagree."""


def jsonable(obj):
    """Convert numpy scalars/arrays (recursively) into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if math.isnan(x) else x
    return obj


def cell_hash(kind, cell, seeds, options):
    blob = json.dumps(
        jsonable({"kind": kind, "cell": cell, "seeds": seeds, "options": options}),
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class ResultRecord:
    """Outcome of one plan cell.

    ``spec_hash`` fingerprints the cell definition, its seeds and the plan
    options, so the record can be re-executed. ``runtime`` is wall-clock and
    is left out of :meth:`canonical`.
    """

    cell_id: str
    kind: str
    cell: dict
    seeds: list
    options: dict
    spec_hash: str
    status: str
    regime: str = None
    c: float = None
    replicates: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    theory: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    version: str = __version__
    runtime: float = 0.0

    def canonical(self):
        d = jsonable(asdict(self))
        d.pop("runtime")
        return d

    def to_json(self):
        return json.dumps(jsonable(asdict(self)), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def expected_hash(self):
        return cell_hash(self.kind, self.cell, self.seeds, self.options)


def append_records(path, records):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


@dataclass
class LoadReport:
    records: list
    diagnostics: list


def load_records(path, strict_version=False):
    """Read a JSON-lines store, skipping unreadable lines with a diagnostic.

    Records whose stored hash does not match their content are dropped; a
    version different from the running package is reported (and dropped
    when ``strict_version``).
    """
    records, diags = [], []
    with Path(path).open() as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = ResultRecord.from_dict(json.loads(line))
            except (json.JSONDecodeError, TypeError) as exc:
                diags.append(f"line {lineno}: unreadable record skipped ({exc.__class__.__name__})")
                continue
            if rec.spec_hash != rec.expected_hash():
                diags.append(f"line {lineno}: hash mismatch for {rec.cell_id}, record skipped")
                continue
            if rec.version != __version__:
                diags.append(f"line {lineno}: version {rec.version} != {__version__}")
                if strict_version:
                    continue
            records.append(rec)
    for msg in diags:
        log.warning(msg)
    return LoadReport(records, diags)


def merge_records(existing, incoming):
    """Union of two record lists keyed by ``(cell_id, spec_hash)``.

    Raises ResultConflict when the same cell id carries a different hash or
    the same hash carries different results.
    """
    merged = {r.cell_id: r for r in existing}
    for rec in incoming:
        old = merged.get(rec.cell_id)
        if old is None:
            merged[rec.cell_id] = rec
        elif old.spec_hash != rec.spec_hash:
            raise ResultConflict(f"{rec.cell_id}: hash {old.spec_hash} vs {rec.spec_hash}")
        elif old.canonical() != rec.canonical():
            raise ResultConflict(f"{rec.cell_id}: same hash, different results")
    return list(merged.values())


PROFILE_FIELDS = ["cell", "lambda", "mean_tv", "std_tv", "phibar"]
TMIX_FIELDS = ["cell", "eps", "tmix", "alpha", "N"]


def export_csv(records, out_dir):
    """Write ``profile.csv`` and ``tmix.csv`` for plotting."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "profile.csv").open("w", newline="") as fh:
        w = csv.DictWriter(fh, PROFILE_FIELDS)
        w.writeheader()
        for rec in records:
            for row in rec.summary.get("profile", []):
                w.writerow({
                    "cell": rec.cell_id, "lambda": row["lambda"], "mean_tv": row["mean_tv"],
                    "std_tv": row["std_tv"], "phibar": row["phibar"],
                })
    with (out_dir / "tmix.csv").open("w", newline="") as fh:
        w = csv.DictWriter(fh, TMIX_FIELDS)
        w.writeheader()
        for rec in records:
            for rep in rec.replicates:
                for eps, t in rep.get("tmix", {}).items():
                    w.writerow({
                        "cell": rec.cell_id, "eps": eps, "tmix": t,
                        "alpha": rep.get("alpha"), "N": rep.get("N"),
                    })
