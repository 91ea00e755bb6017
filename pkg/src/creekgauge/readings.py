"""Reading-record serialization and directory batch processing."""
from __future__ import annotations

import csv
import json
import logging
import re
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime
from pathlib import Path

from .ensemble import ReadingRecord, Status, run_pipeline
from .imagefile import read_color

log = logging.getLogger(__name__)

CSV_COLUMNS = ["timestamp", "status", "pixel_row", "delta_h_cm", "height_cm",
               "match_score", "detector_gap_px", "identifier"]
IMAGE_SUFFIXES = {".png", ".pgm", ".ppm", ".jpg", ".jpeg"}

_STAMP_PATTERNS = [
    (re.compile(r"(\d{8}T\d{6})"), "%Y%m%dT%H%M%S"),
    (re.compile(r"(\d{8}_\d{6})"), "%Y%m%d_%H%M%S"),
    (re.compile(r"(\d{4}-\d{2}-\d{2}[T_ ]\d{2}[-:]\d{2}[-:]\d{2})"), None),
    (re.compile(r"(?<!\d)(\d{14})(?!\d)"), "%Y%m%d%H%M%S"),
]


def timestamp_from_name(name: str) -> datetime | None:
    for pattern, fmt in _STAMP_PATTERNS:
        m = pattern.search(name)
        if not m:
            continue
        text = m.group(1)
        try:
            if fmt is None:
                text = text[:10] + "T" + text[11:].replace("-", ":")
                return datetime.fromisoformat(text)
            return datetime.strptime(text, fmt)
        except ValueError:
            continue
    return None


def _fmt(value) -> str:
    return "" if value is None else repr(float(value))


def record_row(rec: ReadingRecord) -> list[str]:
    return [rec.timestamp, rec.status.value, _fmt(rec.pixel_row), _fmt(rec.delta_h_cm),
            _fmt(rec.height_cm), _fmt(rec.match_score), _fmt(rec.detector_gap_px),
            rec.identifier]


def write_records(records, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(record_row(rec))


def read_records(path) -> list[ReadingRecord]:
    def num(text):
        return float(text) if text not in ("", None) else None

    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(ReadingRecord(
                timestamp=row["timestamp"], status=Status(row["status"]),
                identifier=row.get("identifier", "") or "",
                pixel_row=num(row["pixel_row"]), delta_h_cm=num(row["delta_h_cm"]),
                height_cm=num(row["height_cm"]), match_score=num(row["match_score"]),
                detector_gap_px=num(row["detector_gap_px"])))
    return out


def debug_line(rec: ReadingRecord) -> str:
    payload = {"identifier": rec.identifier, "timestamp": rec.timestamp,
               "status": rec.status.value, "diagnostics": rec.diagnostics}
    return json.dumps(payload, sort_keys=True, default=float)


def list_images(image_dir) -> list[tuple[Path, str]]:
    """Image files in timestamp order as ``(path, iso timestamp)`` pairs.

    Files without a timestamp in their name sort after stamped ones, by name.
    """
    paths = [p for p in Path(image_dir).iterdir()
             if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES and not p.stem.endswith("_edges")]
    keyed = []
    for p in paths:
        stamp = timestamp_from_name(p.name)
        keyed.append((stamp is None, stamp or datetime.min, p.name, p,
                      stamp.isoformat() if stamp else ""))
    keyed.sort(key=lambda k: k[:3])
    return [(k[3], k[4]) for k in keyed]


def process_image(path, timestamp: str, tmpl, cal, cfg) -> ReadingRecord | str:
    """Run one file; decode problems come back as an error string, not a reading."""
    path = Path(path)
    try:
        img = read_color(path)
        edge_path = cfg.edge.external_path(path, timestamp) if cfg.edge.kind.value == "external" else None
        return run_pipeline(img, tmpl, cal, cfg, timestamp=timestamp, identifier=path.name,
                            edge_path=edge_path)
    except Exception as exc:  # noqa: BLE001 - batch keeps going, the error is reported
        return f"{path.name}: {exc}"


def _process_job(args):
    return process_image(*args)


def process_directory(image_dir, tmpl, cal, cfg, jobs: int = 1):
    """Run every image of a directory in timestamp order.

    Returns ``(records, errors)``; output order never depends on ``jobs``.
    """
    items = list_images(image_dir)
    work = [(p, ts, tmpl, cal, cfg) for p, ts in items]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_process_job, work, chunksize=max(1, len(work) // (4 * jobs))))
    else:
        results = [_process_job(w) for w in work]
    records, errors = [], []
    for res in results:
        if isinstance(res, str):
            log.error(res)
            errors.append(res)
        else:
            records.append(res)
    return records, errors
