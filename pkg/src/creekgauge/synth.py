"""Synthetic creek scenes with a known water line.

A scene is a textured bank/background, a brighter textured bridge pier, and dark
water below a (possibly sloped) water line that spans the frame. The static
texture comes from ``texture_seed`` so every frame of a batch shows the same
bridge; ``seed`` drives the per-frame sensor noise and debris.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import ndimage

from .core import ConfigError, Rect, make_rng
from .imagefile import write_color

FRAME_INTERVAL = timedelta(minutes=10)
DEFAULT_START = datetime(2019, 10, 3, 8, 0, 0)
TIMESTAMP_FORMAT = "%Y%m%dT%H%M%S"


@dataclass(frozen=True)
class SceneSpec:
    width: int = 640
    height: int = 480
    pier_rect: Rect = Rect(260, 40, 120, 420)
    water_row: float = 300.0  # true water line row at the pier's left edge
    water_slope: float = 0.0  # rows per column
    pier_intensity: float = 0.75
    water_intensity: float = 0.2
    background_intensity: float = 0.5
    noise_sigma: float = 0.0
    debris_count: int = 0
    brightness_scale: float = 1.0
    seed: int = 0
    texture_seed: int = 1
    texture_contrast: float = 0.18
    texture_scale: float = 3.0  # smoothing sigma of the texture field, pixels

    def __post_init__(self):
        if self.width < 8 or self.height < 8:
            raise ConfigError("scene must be at least 8x8")
        self.pier_rect.check_inside(self.width, self.height)
        if not self.pier_rect.y <= self.water_row < self.pier_rect.bottom:
            raise ConfigError("water_row must lie inside the pier's vertical extent")
        for name in ("pier_intensity", "water_intensity", "background_intensity"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.noise_sigma < 0 or self.debris_count < 0:
            raise ConfigError("noise_sigma and debris_count must be >= 0")
        if self.brightness_scale <= 0:
            raise ConfigError("brightness_scale must be > 0")

    @property
    def pier_center_x(self) -> float:
        return self.pier_rect.x + (self.pier_rect.width - 1) / 2.0

    def water_line(self, x) -> np.ndarray:
        return self.water_row + self.water_slope * (np.asarray(x, dtype=np.float64) - self.pier_rect.x)

    def true_row_at_center(self) -> float:
        return float(self.water_line(self.pier_center_x))


def _texture(shape, rng, scale: float) -> np.ndarray:
    field = ndimage.gaussian_filter(rng.standard_normal(shape), scale, mode="wrap")
    return field / field.std()


@lru_cache(maxsize=4)
def _static_textures(h: int, w: int, texture_seed: int, scale: float):
    """Unit-variance background and pier textures; shared by every frame of a scene."""
    rng = make_rng(texture_seed)
    background = _texture((h, w), rng, 2 * scale)
    pier = _texture((h, w), rng, scale)
    background.flags.writeable = False
    pier.flags.writeable = False
    return background, pier


def render_gray(spec: SceneSpec) -> np.ndarray:
    """Scene intensities in [0, 1] before 8-bit quantization."""
    h, w = spec.height, spec.width
    ys, xs = np.mgrid[0:h, 0:w]
    bg_tex, pier_tex = _static_textures(h, w, spec.texture_seed, float(spec.texture_scale))

    img = spec.background_intensity + 0.5 * spec.texture_contrast * bg_tex
    p = spec.pier_rect
    in_pier = (xs >= p.x) & (xs < p.right) & (ys >= p.y) & (ys < p.bottom)
    pier = spec.pier_intensity + spec.texture_contrast * pier_tex
    img = np.where(in_pier, pier, img)

    # A pixel belongs to the water when its centre lies below the line.
    below = ys + 0.5 > spec.water_line(xs + 0.5)
    img = np.where(below, spec.water_intensity, img)

    rng = make_rng(spec.seed)
    if spec.debris_count:
        line = spec.water_line(np.arange(w))
        for _ in range(spec.debris_count):
            length = int(rng.integers(6, 25))
            x0 = int(rng.integers(0, max(w - length, 1)))
            depth = int(rng.integers(4, 40))
            y0 = int(np.ceil(line[x0])) + depth
            if y0 < h:
                img[y0, x0:x0 + length] = min(1.0, spec.pier_intensity + 0.2)
    if spec.noise_sigma > 0:
        img = img + rng.normal(0.0, spec.noise_sigma, size=(h, w))
    return np.clip(img * spec.brightness_scale, 0.0, 1.0)


def render(spec: SceneSpec) -> tuple[np.ndarray, float]:
    """Render an equal-channel color image and the true water row at the pier centre."""
    gray8 = np.rint(render_gray(spec) * 255.0).astype(np.uint8)
    return np.repeat(gray8[:, :, None], 3, axis=2), spec.true_row_at_center()


def frame_name(index: int, start: datetime = DEFAULT_START, suffix: str = ".png") -> str:
    return f"frame_{(start + index * FRAME_INTERVAL).strftime(TIMESTAMP_FORMAT)}{suffix}"


def render_batch(base: SceneSpec, water_rows, seeds, out_dir, start: datetime = DEFAULT_START,
                 brightness=None) -> Path:
    """Render one frame per water row into ``out_dir`` and write ``ground_truth.csv``.

    Filenames carry timestamps at a 10-minute cadence. ``brightness`` optionally
    overrides brightness_scale per frame. Returns the ground-truth CSV path.
    """
    water_rows = list(water_rows)
    seeds = list(seeds)
    if len(water_rows) != len(seeds):
        raise ValueError("water_rows and seeds must have equal length")
    brightness = [base.brightness_scale] * len(seeds) if brightness is None else list(brightness)
    if len(brightness) != len(seeds):
        raise ValueError("brightness must match water_rows in length")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gt_path = out / "ground_truth.csv"
    with open(gt_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["identifier", "row"])
        for i, (row, seed, scale) in enumerate(zip(water_rows, seeds, brightness)):
            spec = replace(base, water_row=float(row), seed=int(seed), brightness_scale=float(scale))
            img, truth = render(spec)
            name = frame_name(i, start)
            write_color(out / name, img)
            writer.writerow([name, repr(truth)])
    return gt_path
