"""Evaluation against manually annotated water lines.

Formulas, with p the predictions and t the ground truth:

* MAE  = mean |p - t|
* MAPE = 100 * mean(|p - t| / |t|), per-sample ratios
* R^2  = 1 - sum (p - t)^2 / sum (t - mean t)^2

Note on MAPE: the commonly printed form with a single division outside the sum
is not dimensionally consistent when t varies, so the per-sample form is used.
R^2 takes the truth series as reference, which is the conventional reading even
though some write-ups label the predicted and real series the other way round.
"""
from __future__ import annotations

import csv
import xml.etree.ElementTree as ET
from bisect import bisect_left
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .core import GaugeError

ALIGN_WINDOW = timedelta(minutes=7.5)


class MetricInputError(GaugeError, ValueError):
    pass


def _pair(pred, truth, min_len=1):
    p = np.asarray(pred, dtype=np.float64).ravel()
    t = np.asarray(truth, dtype=np.float64).ravel()
    if p.shape != t.shape:
        raise MetricInputError(f"length mismatch: {p.size} predictions vs {t.size} truths")
    if p.size < min_len:
        raise MetricInputError(f"need at least {min_len} samples, got {p.size}")
    return p, t


def mae(pred, truth) -> float:
    p, t = _pair(pred, truth)
    return float(np.mean(np.abs(p - t)))


def mape(pred, truth) -> float:
    p, t = _pair(pred, truth)
    zero = np.flatnonzero(t == 0)
    if zero.size:
        raise MetricInputError(f"truth is zero at index {int(zero[0])}; MAPE undefined")
    return float(100.0 * np.mean(np.abs(p - t) / np.abs(t)))


def r_squared(pred, truth) -> float:
    p, t = _pair(pred, truth, min_len=2)
    tss = np.sum((t - t.mean()) ** 2)
    if tss == 0:
        raise MetricInputError("truth series has zero variance")
    return float(1.0 - np.sum((p - t) ** 2) / tss)


def cross_series_r2(a, b) -> float:
    """Squared Pearson correlation of two already aligned series."""
    x, y = _pair(a, b, min_len=2)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = np.sum(dx * dx), np.sum(dy * dy)
    if sxx == 0 or syy == 0:
        raise MetricInputError("cross-series R^2 undefined for a constant series")
    return float(np.sum(dx * dy) ** 2 / (sxx * syy))


def align_series(times_a, values_a, times_b, values_b, window: timedelta = ALIGN_WINDOW):
    """Nearest-neighbour join of series b onto series a within ``window``.

    Returns two equal-length arrays; samples of a without a b neighbour are dropped.
    ``times_b`` must be sorted.
    """
    times_b = list(times_b)
    out_a, out_b = [], []
    for ta, va in zip(times_a, values_a):
        i = bisect_left(times_b, ta)
        best = None
        for j in (i - 1, i):
            if 0 <= j < len(times_b):
                gap = abs(times_b[j] - ta)
                if gap <= window and (best is None or gap < best[0]):
                    best = (gap, j)
        if best is not None:
            out_a.append(va)
            out_b.append(values_b[best[1]])
    return np.asarray(out_a, dtype=np.float64), np.asarray(out_b, dtype=np.float64)


# -- ground truth -----------------------------------------------------------


@dataclass
class GroundTruthSet:
    entries: dict[str, float] = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, key):
        return self.entries[key]

    def __contains__(self, key):
        return key in self.entries

    @classmethod
    def from_csv(cls, path) -> "GroundTruthSet":
        """Read ``identifier,row`` lines (a header row is optional)."""
        entries = {}
        with open(path, newline="") as fh:
            for n, rec in enumerate(csv.reader(fh)):
                if not rec or rec[0].startswith("#"):
                    continue
                if n == 0 and rec[0].strip().lower() == "identifier":
                    continue
                ident, row = rec[0].strip(), float(rec[1])
                if ident in entries:
                    raise MetricInputError(f"duplicate identifier {ident!r} in {path}")
                entries[ident] = row
        return cls(entries)

    @classmethod
    def from_labelimg(cls, paths) -> "GroundTruthSet":
        """Read Pascal-VOC XML files; each image's row is the mean of its box centres."""
        entries = {}
        for path in paths:
            ident, row = read_labelimg_row(path)
            if ident in entries:
                raise MetricInputError(f"duplicate identifier {ident!r}")
            entries[ident] = row
        return cls(entries)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["identifier", "row"])
            for ident, row in self.entries.items():
                writer.writerow([ident, repr(float(row))])


def read_labelimg_row(path) -> tuple[str, float]:
    root = ET.parse(path).getroot()
    name = root.findtext("filename") or Path(path).with_suffix("").name
    height = root.findtext("size/height")
    centres = []
    for box in root.iter("bndbox"):
        ymin = float(box.findtext("ymin"))
        ymax = float(box.findtext("ymax"))
        centres.append((ymin + ymax) / 2.0)
    if not centres:
        raise MetricInputError(f"{path}: no bounding boxes")
    row = float(np.mean(centres))
    if height is not None and not 0 <= row < float(height):
        raise MetricInputError(f"{path}: annotated row {row} outside image height {height}")
    return name, row


# -- evaluation -------------------------------------------------------------


@dataclass
class EvalReport:
    n: int
    mae: float
    mape: float
    r2: float | None
    response_rate: float
    per_day_errors: list[tuple[str, list[float]]]
    total: int = 0

    def write_summary(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "total", "mae", "mape", "r2", "response_rate"])
            writer.writerow([self.n, self.total, repr(self.mae), repr(self.mape),
                             "" if self.r2 is None else repr(self.r2), repr(self.response_rate)])

    def write_per_day(self, path) -> None:
        """One row per signed error: ``day,error`` (plot-ready, one box per day)."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["day", "error_px"])
            for day, errors in self.per_day_errors:
                for e in errors:
                    writer.writerow([day, repr(e)])


def _day(timestamp: str) -> str:
    try:
        return datetime.fromisoformat(timestamp).date().isoformat()
    except (TypeError, ValueError):
        return "unknown"


def evaluate(records, gt: GroundTruthSet) -> EvalReport:
    """Pair ok records with ground truth by identifier and score the pixel rows.

    ``records`` are ReadingRecord objects (or anything with identifier, timestamp,
    status and pixel_row attributes).
    """
    records = list(records)
    total = len(records)
    ok = [r for r in records if _status(r) == "ok"]
    pairs = [(r, gt[r.identifier]) for r in ok if r.identifier in gt]
    if not pairs:
        raise MetricInputError("no ok record has a matching ground-truth entry")
    pred = np.array([r.pixel_row for r, _ in pairs], dtype=np.float64)
    truth = np.array([t for _, t in pairs], dtype=np.float64)
    by_day = defaultdict(list)
    for (r, t), p in zip(pairs, pred):
        by_day[_day(r.timestamp)].append(float(p - t))
    r2 = r_squared(pred, truth) if len(pairs) >= 2 and np.ptp(truth) > 0 else None
    return EvalReport(
        n=len(pairs),
        mae=mae(pred, truth),
        mape=mape(pred, truth),
        r2=r2,
        response_rate=len(ok) / total,
        per_day_errors=sorted(by_day.items()),
        total=total,
    )


def _status(record) -> str:
    status = record.status
    return getattr(status, "value", status)
