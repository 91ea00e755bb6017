"""The two water-line estimators run inside a matched region.

* regression: per-column bright-to-dark transition points, split into 5 runs,
  one least-squares line per run, keep the line most parallel to the reference.
* ssd: a two-half window slides up the region; the divider row with the largest
  mean squared difference between the halves is the water line.

Both report ``row_at_center``, the water-line row at the region's centre column.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import ConfigError, GaugeError, SizeError, as_gray

N_WINDOWS = 5
PERCENTILE = 70.0
RUN_LENGTH = 3


class DetectorError(GaugeError):
    pass


class InsufficientSupportError(DetectorError):
    pass


class Method(str, Enum):
    REGRESSION = "regression"
    SSD = "ssd"


@dataclass(frozen=True, eq=False)
class WaterCoordinates:
    """One (column, row) transition point per column that had one; columns increase."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.int64)
        ys = np.asarray(self.ys, dtype=np.float64)
        if xs.shape != ys.shape or xs.ndim != 1:
            raise ValueError("xs and ys must be 1-D and of equal length")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("column indices must be strictly increasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __len__(self) -> int:
        return len(self.xs)

    @property
    def columns(self) -> list[tuple[int, float]]:
        return list(zip(self.xs.tolist(), self.ys.tolist()))


@dataclass(frozen=True)
class FittedLine:
    slope: float
    intercept: float
    window_index: int
    support: int

    def at(self, x: float) -> float:
        return self.slope * x + self.intercept


@dataclass(frozen=True, eq=False)
class WaterLineEstimate:
    row_at_center: float
    method: Method
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SsdWindowConfig:
    half_height: int = 8
    width: int | None = None  # None: the full region width
    shear_slope: float = 0.0
    prefer_lower: bool = True  # tie-break toward the lower divider (larger row)

    def __post_init__(self):
        if self.half_height < 1:
            raise ConfigError("half_height must be >= 1")
        if self.width is not None and self.width < 2:
            raise ConfigError("window width must be >= 2")


def nearest_rank(sorted_cols: np.ndarray, pct: float) -> np.ndarray:
    """Nearest-rank percentile of each column of an already column-sorted array."""
    n = sorted_cols.shape[0]
    rank = max(int(np.ceil(pct / 100.0 * n)), 1)
    return sorted_cols[rank - 1]


def detect_water_coordinates(region, percentile: float = PERCENTILE) -> WaterCoordinates:
    """Scan each column bottom-up for the first run of 3 pixels above its 70th percentile.

    A pixel counts as bright when it strictly exceeds the column percentile, or
    when it equals the column maximum of a non-constant column (a saturated
    bright block otherwise could never exceed its own percentile). The row of the
    run's middle pixel is the column's transition point.
    """
    arr = as_gray(region)
    h, w = arr.shape
    if h < RUN_LENGTH:
        raise SizeError(f"region needs at least {RUN_LENGTH} rows, got {h}")
    p = nearest_rank(np.sort(arr, axis=0), percentile)
    top = arr.max(axis=0)
    bright = (arr > p) | ((arr == top) & (top > arr.min(axis=0)))
    runs = bright[:-2] & bright[1:-1] & bright[2:]  # runs[r] covers rows r..r+2
    found = runs.any(axis=0)
    last_start = (h - RUN_LENGTH) - np.argmax(runs[::-1], axis=0)
    xs = np.flatnonzero(found)
    return WaterCoordinates(xs, (last_start[found] + 1).astype(np.float64))


def ols(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    if sxx == 0:
        raise InsufficientSupportError("least squares needs at least two distinct columns")
    slope = np.sum((x - xm) * (y - ym)) / sxx
    return float(slope), float(ym - slope * xm)


def fit_windows(coords: WaterCoordinates, n_windows: int = N_WINDOWS) -> list[FittedLine]:
    if len(coords) < 2 * n_windows:
        raise InsufficientSupportError(
            f"need at least {2 * n_windows} water coordinates, got {len(coords)}")
    # array_split hands the remainder to the earliest windows.
    groups = zip(np.array_split(coords.xs, n_windows), np.array_split(coords.ys, n_windows))
    lines = []
    for i, (gx, gy) in enumerate(groups):
        slope, intercept = ols(gx, gy)
        lines.append(FittedLine(slope, intercept, i, len(gx)))
    return lines


def fit_waterline_regression(coords: WaterCoordinates, tmpl, center_x: float | None = None,
                             region_height: int | None = None) -> WaterLineEstimate:
    """Pick the window line whose slope is closest to the reference slope.

    ``tmpl`` is a Template (its width fixes the region and its reference_slope the
    target) or a bare reference slope, in which case ``center_x`` is required.
    """
    if isinstance(tmpl, (int, float)):
        ref_slope = float(tmpl)
        if center_x is None:
            raise ValueError("center_x is required when passing a bare slope")
    else:
        ref_slope = tmpl.reference_slope
        center_x = (tmpl.width - 1) / 2.0 if center_x is None else center_x
        region_height = tmpl.height if region_height is None else region_height
    lines = fit_windows(coords)
    gaps = [abs(line.slope - ref_slope) for line in lines]
    best = lines[int(np.argmin(gaps))]
    row = best.at(center_x)
    if region_height is not None and not 0 <= row <= region_height - 1:
        raise DetectorError(f"fitted line leaves the region at the centre column (row {row:.1f})")
    return WaterLineEstimate(row, Method.REGRESSION, {
        "window_index": best.window_index,
        "slope": best.slope,
        "intercept": best.intercept,
        "window_slopes": [line.slope for line in lines],
        "support": len(coords),
    })


def _column_offsets(n_cols: int, slope: float) -> np.ndarray:
    return np.rint(slope * np.arange(n_cols)).astype(np.int64)


def ssd_profile(region, cfg: SsdWindowConfig) -> tuple[np.ndarray, np.ndarray]:
    """Mean squared difference between the halves of a sheared split window.

    Returns ``(rows, scores)`` ordered bottom-up, for divider rows from
    ``height - h - 1`` down to ``h``. At column x the window is shifted by
    ``round(shear_slope * x)`` rows; upper row r is paired with lower row r + h and
    pairs falling outside the region are skipped. Each score is the sum over the
    included pairs divided by their count (0 when none are included).
    """
    arr = as_gray(region)
    h = cfg.half_height
    height, width = arr.shape
    n_cols = width if cfg.width is None else cfg.width
    if n_cols > width:
        raise SizeError(f"window width {n_cols} exceeds region width {width}")
    if height < 2 * h + 1:
        raise SizeError(f"region of {height} rows too short for half-height {h}")
    arr = arr[:, :n_cols]
    sq = (arr[:-h] - arr[h:]) ** 2  # sq[r, x] pairs upper row r with lower row r + h
    n_pairs = height - h
    cum = np.zeros((n_pairs + 1, n_cols))
    cum[1:] = np.cumsum(sq, axis=0)

    rows = np.arange(height - h - 1, h - 1, -1)
    offsets = _column_offsets(n_cols, cfg.shear_slope)
    start = rows[:, None] + offsets[None, :] - h
    lo = np.clip(start, 0, n_pairs)
    hi = np.clip(start + h, 0, n_pairs)
    cols = np.arange(n_cols)[None, :]
    total = (cum[hi, cols] - cum[lo, cols]).sum(axis=1)
    count = (hi - lo).sum(axis=1)
    scores = np.divide(total, count, out=np.zeros_like(total), where=count > 0)
    return rows, scores


def detect_waterline_ssd(region, cfg: SsdWindowConfig) -> WaterLineEstimate:
    rows, scores = ssd_profile(region, cfg)
    best = scores.max()
    tied = rows[scores == best]
    y = int(tied.max() if cfg.prefer_lower else tied.min())
    width = as_gray(region).shape[1]
    center_x = (width - 1) / 2.0
    row = y + cfg.shear_slope * center_x
    return WaterLineEstimate(float(row), Method.SSD, {
        "divider_row": y,
        "score": float(best),
        "profile_rows": rows.tolist(),
        "profile": scores.tolist(),
    })
