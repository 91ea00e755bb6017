"""Template matching with (non mean-subtracted) normalized cross-correlation.

Score of template T placed with its top-left corner at column x, row y of I::

    C(x, y) = sum T(x', y') I(x + x', y + y') / sqrt(sum T^2 * sum_window I^2)

Edge maps are non-negative, so C lies in [0, 1]. A window (or template) with
zero energy scores 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .core import BoundsError, EdgeMap, Provenance, Rect, SizeError, as_gray
from .imagefile import read_edge_map, write_gray

DEFAULT_THRESHOLD = 0.8


@dataclass(frozen=True, eq=False)
class Template:
    patch: EdgeMap
    origin_in_reference: Rect
    waterline_row_offset: int
    reference_slope: float = 0.0

    def __post_init__(self):
        if not 0 <= self.waterline_row_offset < self.patch.height:
            raise BoundsError(
                f"waterline_row_offset {self.waterline_row_offset} outside patch rows "
                f"[0, {self.patch.height})")
        if (self.origin_in_reference.width, self.origin_in_reference.height) != (
                self.patch.width, self.patch.height):
            raise SizeError("origin_in_reference size must equal the patch size")

    @property
    def height(self) -> int:
        return self.patch.height

    @property
    def width(self) -> int:
        return self.patch.width


@dataclass(frozen=True)
class MatchResult:
    score: float
    location: Rect
    accepted: bool


def _template_array(tmpl) -> np.ndarray:
    if isinstance(tmpl, Template):
        return tmpl.patch.data
    return as_gray(tmpl)


def ncc_score(tmpl, img, x: int, y: int) -> float:
    """Direct evaluation of the score at one placement (column x, row y)."""
    t = _template_array(tmpl)
    arr = as_gray(img)
    th, tw = t.shape
    Rect(x, y, tw, th).check_inside(arr.shape[1], arr.shape[0])
    window = arr[y:y + th, x:x + tw]
    t_energy = float(np.sum(t * t))
    w_energy = float(np.sum(window * window))
    if t_energy == 0.0 or w_energy == 0.0:
        return 0.0
    return float(np.sum(t * window) / np.sqrt(t_energy * w_energy))


def _integral(arr: np.ndarray) -> np.ndarray:
    out = np.zeros((arr.shape[0] + 1, arr.shape[1] + 1), dtype=arr.dtype)
    out[1:, 1:] = arr.cumsum(0).cumsum(1)
    return out


def _window_totals(integral: np.ndarray, th: int, tw: int) -> np.ndarray:
    return (integral[th:, tw:] - integral[:-th, tw:]
            - integral[th:, :-tw] + integral[:-th, :-tw])


def score_map(tmpl, img) -> np.ndarray:
    """Scores for every valid placement, shape (H - th + 1, W - tw + 1).

    The correlation numerator is computed by FFT and the window energies by an
    integral image, so values carry ~1e-12 rounding noise relative to ncc_score.
    """
    t = _template_array(tmpl)
    arr = as_gray(img)
    th, tw = t.shape
    h, w = arr.shape
    if th > h or tw > w:
        raise SizeError(f"template {tw}x{th} larger than image {w}x{h}")
    t_energy = float(np.sum(t * t))
    out_shape = (h - th + 1, w - tw + 1)
    if t_energy == 0.0:
        return np.zeros(out_shape)

    fshape = (h, w)
    # Cross-correlation = convolution with the flipped template; the valid part
    # of the circular result starts at (th-1, tw-1) and does not wrap.
    spec = np.fft.rfft2(arr, fshape) * np.fft.rfft2(t[::-1, ::-1], fshape)
    full = np.fft.irfft2(spec, fshape)
    numer = full[th - 1:, tw - 1:]

    w_energy = _window_totals(_integral(arr * arr), th, tw)
    nonzero = _window_totals(_integral((arr != 0).astype(np.int64)), th, tw)
    scores = np.zeros(out_shape)
    live = (nonzero > 0) & (w_energy > 0)
    scores[live] = numer[live] / np.sqrt(t_energy * w_energy[live])
    return np.clip(scores, 0.0, 1.0)


def match_template(tmpl, img, threshold: float = DEFAULT_THRESHOLD,
                   refine_tol: float = 1e-7, max_refine: int = 256) -> MatchResult:
    """Exhaustive search for the best placement; ties go to the smallest row, then column.

    Placements whose fast score is within ``refine_tol`` of the best are re-scored
    exactly with ncc_score so FFT rounding cannot reorder near-ties.
    """
    t = _template_array(tmpl)
    arr = as_gray(img)
    th, tw = t.shape
    h, w = arr.shape
    if th >= h or tw >= w:
        raise SizeError(f"template {tw}x{th} must be strictly smaller than image {w}x{h}")
    scores = score_map(t, arr)
    best = scores.max()
    if best <= 0.0:
        return MatchResult(0.0, Rect(0, 0, tw, th), False)

    # Flat indices are in row-major (scan) order, which carries the tie-break.
    candidates = np.flatnonzero(scores.ravel() >= best - refine_tol)[:max_refine]
    ncols = scores.shape[1]
    best_score, best_idx = -1.0, None
    for idx in candidates:
        y, x = divmod(int(idx), ncols)
        s = ncc_score(t, arr, x, y)
        if s > best_score:
            best_score, best_idx = s, (x, y)
    x, y = best_idx
    best_score = min(max(best_score, 0.0), 1.0)
    return MatchResult(best_score, Rect(x, y, tw, th), best_score >= threshold)


def save_template(tmpl: Template, path, extra: dict | None = None) -> Path:
    """Write the patch as 8-bit PNG/PGM plus a ``.yaml`` sidecar next to it.

    ``extra`` holds additional sidecar keys (calibration fields).
    """
    path = Path(path)
    write_gray(path, tmpl.patch)
    meta = {
        "patch_file": path.name,
        "provenance": tmpl.patch.provenance.value,
        "origin_in_reference": dict(zip(("x", "y", "width", "height"),
                                        tmpl.origin_in_reference.as_tuple())),
        "waterline_row_offset": int(tmpl.waterline_row_offset),
        "reference_slope": float(tmpl.reference_slope),
    }
    meta.update(extra or {})
    sidecar = path.with_suffix(".yaml")
    sidecar.write_text(yaml.safe_dump(meta, sort_keys=False))
    return sidecar


def load_template(path) -> tuple[Template, dict]:
    """Load a template from its patch file or its sidecar; returns (template, sidecar dict)."""
    path = Path(path)
    sidecar = path if path.suffix in (".yaml", ".yml") else path.with_suffix(".yaml")
    meta = yaml.safe_load(sidecar.read_text())
    patch = read_edge_map(sidecar.parent / meta["patch_file"],
                          Provenance(meta.get("provenance", "external")))
    o = meta["origin_in_reference"]
    tmpl = Template(patch, Rect(o["x"], o["y"], o["width"], o["height"]),
                    int(meta["waterline_row_offset"]), float(meta["reference_slope"]))
    return tmpl, meta
