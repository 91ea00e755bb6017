"""Final reading: combine the two detectors, convert to physical height, or report
why no reading was produced."""
from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import ConfigError, crop, to_gray
from .detectors import (DetectorError, WaterLineEstimate, detect_water_coordinates,
                        detect_waterline_ssd, fit_waterline_regression)
from .edgemap import make_edge_map
from .matcher import Template, match_template
from .preprocess import Verdict, box_filter, screen_brightness

DEFAULT_TOL_PX = 3.0


@dataclass(frozen=True)
class CalibrationModel:
    h_r: float  # physical water height in the reference image, cm
    reference_row: float  # reference water-line row in the matched-region frame
    cm_per_pixel: float = 1.0

    def __post_init__(self):
        if not self.cm_per_pixel > 0:
            raise ConfigError("cm_per_pixel must be > 0")
        if not self.h_r > 0:
            raise ConfigError("h_r must be > 0")


class Status(str, Enum):
    OK = "ok"
    REJECTED_DARK = "rejected_dark"
    NO_MATCH = "no_match"
    DETECTOR_FAILURE = "detector_failure"
    NON_CONVERGENT = "non_convergent"


@dataclass(frozen=True, eq=False)
class ReadingRecord:
    timestamp: str
    status: Status
    identifier: str = ""
    pixel_row: float | None = None  # full-image frame
    delta_h_cm: float | None = None
    height_cm: float | None = None
    match_score: float | None = None
    detector_gap_px: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        heights = (self.pixel_row, self.delta_h_cm, self.height_cm)
        if self.status is Status.OK and any(v is None for v in heights):
            raise ValueError("ok records need pixel_row, delta_h_cm and height_cm")
        if self.status is not Status.OK and any(v is not None for v in heights):
            raise ValueError(f"{self.status.value} records carry no height fields")

    @property
    def ok(self) -> bool:
        return self.status is Status.OK


def combine(reg: WaterLineEstimate, ssd: WaterLineEstimate, tol_px: float = DEFAULT_TOL_PX):
    """Mean of the two rows if they lie within ``tol_px`` (inclusive), else None."""
    a, b = reg.row_at_center, ssd.row_at_center
    if abs(a - b) <= tol_px:
        return (a + b) / 2.0
    return None


def calibrate_height(pixel_row: float, cal: CalibrationModel) -> tuple[float, float]:
    """Return ``(delta_h_cm, height_cm)``; a smaller row (higher water) gives a positive delta.

    The delta is snapped to the float grid of ``h_r`` (a ~1e-16 relative nudge) so
    that ``height - delta == h_r`` holds exactly in floating point whenever the
    height stays below twice the reference height's binade.
    """
    raw = (cal.reference_row - pixel_row) * cal.cm_per_pixel
    grid = np.spacing(abs(cal.h_r))
    delta = np.round(raw / grid) * grid
    height = cal.h_r + delta
    if height - delta != cal.h_r:
        delta = height - cal.h_r
    return float(delta), float(height)


def _screening_rng(seed: int, identifier: str) -> np.random.Generator:
    key = zlib.crc32(identifier.encode("utf-8"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, key])))


def run_pipeline(img, tmpl: Template, cal: CalibrationModel, cfg, timestamp: str = "",
                 identifier: str = "", edge_path=None) -> ReadingRecord:
    """crop -> screen -> smooth -> edge map -> match -> both detectors -> combine -> calibrate.

    ``cfg`` is a PipelineConfig. ``edge_path`` locates the external edge map
    when the external provider is configured. Decode and configuration problems
    raise; every other outcome is a ReadingRecord.
    """
    diag: dict = {}

    def record(status, **kw):
        return ReadingRecord(timestamp, status, identifier, diagnostics=diag, **kw)

    roi_img = crop(img, cfg.roi)
    outcome, roi_img = screen_brightness(
        roi_img, cfg.screening, _screening_rng(cfg.screening.rng_seed, identifier or timestamp))
    diag["screening"] = {"verdict": outcome.verdict.value, "mean_rgb": list(outcome.mean_rgb)}
    if outcome.verdict is Verdict.REJECTED_DARK:
        return record(Status.REJECTED_DARK)

    smooth = box_filter(to_gray(roi_img), cfg.smoothing_radius)
    edges = make_edge_map(smooth, cfg.edge, edge_path)
    match = match_template(tmpl, edges, cfg.match_threshold)
    diag["match"] = {"score": match.score, "location": list(match.location.as_tuple())}
    if not match.accepted:
        return record(Status.NO_MATCH, match_score=match.score)

    region = crop(edges, match.location)
    ssd_region = region if cfg.ssd_source == "edge" else crop(smooth, match.location)
    ssd_cfg = cfg.ssd_config(tmpl)
    try:
        reg = fit_waterline_regression(detect_water_coordinates(region), tmpl)
        ssd = detect_waterline_ssd(ssd_region, ssd_cfg)
    except DetectorError as exc:
        diag["detector_error"] = str(exc)
        return record(Status.DETECTOR_FAILURE, match_score=match.score)
    gap = abs(reg.row_at_center - ssd.row_at_center)
    diag["regression"] = {"row": reg.row_at_center, **reg.diagnostics}
    diag["ssd"] = {"row": ssd.row_at_center, **ssd.diagnostics}

    row = combine(reg, ssd, cfg.ensemble_tol_px)
    if row is None:
        return record(Status.NON_CONVERGENT, match_score=match.score, detector_gap_px=gap)
    delta, height = calibrate_height(row, cal)
    diag["region_row"] = row
    # Express the reading in image rows: the reference's annotated row plus the
    # measured displacement, shifted by where the template landed this time.
    image_row = (cfg.roi.y + match.location.y + tmpl.waterline_row_offset
                 + (row - cal.reference_row))
    return record(Status.OK, pixel_row=float(image_row), delta_h_cm=delta, height_cm=height,
                  match_score=match.score, detector_gap_px=gap)
