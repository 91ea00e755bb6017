"""ROI smoothing and light-condition screening."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import ndimage

from .core import ConfigError, as_gray, check_color


@dataclass(frozen=True)
class ScreeningConfig:
    sample_count: int = 500
    dark_threshold: float = 30.0  # 0-255 scale
    boost_threshold: float = 100.0  # 0-255 scale
    boost_factor: float = 1.5
    rng_seed: int = 0

    def __post_init__(self):
        if self.sample_count < 1:
            raise ConfigError("sample_count must be >= 1")
        if not 0 < self.dark_threshold <= self.boost_threshold <= 255:
            raise ConfigError("need 0 < dark_threshold <= boost_threshold <= 255")
        if self.boost_factor < 1:
            raise ConfigError("boost_factor must be >= 1")


class Verdict(str, Enum):
    REJECTED_DARK = "rejected_dark"
    BOOSTED = "boosted"
    PASSED = "passed"


@dataclass(frozen=True)
class ScreeningOutcome:
    verdict: Verdict
    mean_rgb: tuple[float, float, float]


def _window_sums(arr: np.ndarray, radius: int) -> np.ndarray:
    """Sum of each clipped (2r+1)^2 neighbourhood, via a padded integral image."""
    h, w = arr.shape
    integral = np.zeros((h + 1, w + 1))
    integral[1:, 1:] = arr.cumsum(0).cumsum(1)
    rows = np.arange(h)
    cols = np.arange(w)
    y0 = np.clip(rows - radius, 0, h)[:, None]
    y1 = np.clip(rows + radius + 1, 0, h)[:, None]
    x0 = np.clip(cols - radius, 0, w)[None, :]
    x1 = np.clip(cols + radius + 1, 0, w)[None, :]
    return integral[y1, x1] - integral[y0, x1] - integral[y1, x0] + integral[y0, x0]


def box_filter(img, radius: int = 2) -> np.ndarray:
    """Mean over a (2r+1)x(2r+1) window, clipped at the borders (no padding values)."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    arr = as_gray(img)
    if radius == 0:
        return arr.copy()
    # Subtracting the mean keeps the integral-image sums small, which keeps
    # constant images exactly constant after filtering.
    offset = arr.mean()
    sums = _window_sums(arr - offset, radius)
    counts = _window_sums(np.ones_like(arr), radius)
    out = sums / counts + offset
    # The mean of a window lies between its extremes; clamping there removes
    # rounding residue, so flat patches stay exactly flat (and Sobel sees zero).
    size = 2 * radius + 1
    lo = ndimage.minimum_filter(arr, size=size, mode="nearest")
    hi = ndimage.maximum_filter(arr, size=size, mode="nearest")
    return np.clip(out, lo, hi)


def screen_brightness(img, cfg: ScreeningConfig, rng: np.random.Generator):
    """Sample pixels to decide whether an image is too dark, dim (boost it) or fine.

    Returns ``(outcome, image)``; the image is only modified for the boosted verdict.
    """
    arr = check_color(img)
    h, w, _ = arr.shape
    ys = rng.integers(0, h, size=cfg.sample_count)
    xs = rng.integers(0, w, size=cfg.sample_count)
    means = arr[ys, xs].astype(np.float64).mean(axis=0)
    mean_rgb = tuple(float(m) for m in means)
    if np.any(means < cfg.dark_threshold):
        return ScreeningOutcome(Verdict.REJECTED_DARK, mean_rgb), arr
    if means.mean() <= cfg.boost_threshold:
        boosted = np.clip(np.rint(arr.astype(np.float64) * cfg.boost_factor), 0, 255)
        return ScreeningOutcome(Verdict.BOOSTED, mean_rgb), boosted.astype(np.uint8)
    return ScreeningOutcome(Verdict.PASSED, mean_rgb), arr
