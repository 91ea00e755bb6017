"""Build the reference template and calibration from one annotated image."""
from __future__ import annotations

from dataclasses import asdict

import numpy as np

from .core import BoundsError, GaugeError, Rect, crop, to_gray
from .detectors import (DetectorError, detect_water_coordinates, detect_waterline_ssd,
                        fit_waterline_regression, fit_windows)
from .edgemap import make_edge_map
from .ensemble import CalibrationModel, _screening_rng, combine
from .matcher import Template, save_template
from .preprocess import Verdict, box_filter, screen_brightness

DEFAULT_TEMPLATE_SIZE = (280, 320)  # width, height
WATERLINE_FRACTION = 0.7  # where the annotated row sits inside the template, from the top


class CalibrationError(GaugeError):
    pass


def template_rect(roi: Rect, row_in_roi: int, size=DEFAULT_TEMPLATE_SIZE,
                  center_x: float | None = None) -> Rect:
    """Place a template of ``size`` inside the ROI with the water line 70% of the way down."""
    tw, th = size
    if tw >= roi.width or th >= roi.height:
        raise CalibrationError(f"template {tw}x{th} must be smaller than the ROI")
    cx = (roi.width - 1) / 2.0 if center_x is None else center_x
    x = int(round(cx - (tw - 1) / 2.0))
    y = int(round(row_in_roi - WATERLINE_FRACTION * th))
    x = min(max(x, 0), roi.width - tw)
    y = min(max(y, 0), roi.height - th)
    return Rect(x, y, tw, th)


def calibrate(reference_img, annotated_row: float, h_r: float, cfg, cm_per_pixel: float = 1.0,
              size=DEFAULT_TEMPLATE_SIZE, center_x: float | None = None):
    """Cut the template around the annotated water line and measure the reference.

    ``annotated_row`` and ``center_x`` are full-image coordinates. Returns
    ``(template, calibration)``. The calibration's reference_row is the detectors'
    own reading on the reference, so their systematic offsets cancel later on.
    """
    roi = cfg.roi
    row_in_roi = int(round(annotated_row)) - roi.y
    if not 0 <= row_in_roi < roi.height:
        raise BoundsError(f"annotated row {annotated_row} outside ROI rows [{roi.y}, {roi.bottom})")
    roi_img = crop(reference_img, roi)
    outcome, roi_img = screen_brightness(roi_img, cfg.screening,
                                         _screening_rng(cfg.screening.rng_seed, "reference"))
    if outcome.verdict is Verdict.REJECTED_DARK:
        raise CalibrationError("reference image rejected as too dark (rejected_dark)")
    smooth = box_filter(to_gray(roi_img), cfg.smoothing_radius)
    edges = make_edge_map(smooth, cfg.edge)

    local_cx = None if center_x is None else center_x - roi.x
    rect = template_rect(roi, row_in_roi, size, local_cx)
    patch = crop(edges, rect)
    try:
        lines = fit_windows(detect_water_coordinates(patch))
    except DetectorError as exc:
        raise CalibrationError(f"degenerate reference fit: {exc}") from exc
    slope = float(np.median([line.slope for line in lines]))
    tmpl = Template(patch, rect, row_in_roi - rect.y, slope)

    ssd_region = patch if cfg.ssd_source == "edge" else crop(smooth, rect)
    try:
        reg = fit_waterline_regression(detect_water_coordinates(patch), tmpl)
        ssd = detect_waterline_ssd(ssd_region, cfg.ssd_config(tmpl))
    except DetectorError as exc:
        raise CalibrationError(f"detectors failed on the reference: {exc}") from exc
    row = combine(reg, ssd, cfg.ensemble_tol_px)
    if row is None:
        raise CalibrationError(
            f"detectors disagree on the reference ({reg.row_at_center:.1f} vs {ssd.row_at_center:.1f})")
    return tmpl, CalibrationModel(float(h_r), float(row), float(cm_per_pixel))


def save_reference(tmpl: Template, cal: CalibrationModel, path):
    """Write the template patch and a sidecar carrying the calibration fields."""
    return save_template(tmpl, path, {"calibration": asdict(cal)})


def calibration_from_sidecar(meta: dict) -> CalibrationModel:
    if "calibration" not in meta:
        raise CalibrationError("template sidecar has no calibration section")
    return CalibrationModel(**meta["calibration"])
