"""Shared image containers, geometry and RNG.

Images are plain numpy arrays:

* color images are ``uint8`` arrays of shape ``(height, width, 3)``
* gray images are ``float64`` arrays of shape ``(height, width)`` with values in [0, 1]

Row 0 is the top of the frame, so a rising water line means a decreasing row.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class GaugeError(Exception):
    """Base class for all errors raised by the package."""


class BoundsError(GaugeError, ValueError):
    pass


class SizeError(GaugeError, ValueError):
    pass


class ConfigError(GaugeError, ValueError):
    pass


@dataclass(frozen=True)
class Rect:
    x: int
    y: int
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ConfigError(f"rect must have positive size, got {self.width}x{self.height}")

    @property
    def right(self) -> int:
        return self.x + self.width

    @property
    def bottom(self) -> int:
        return self.y + self.height

    def check_inside(self, width: int, height: int) -> None:
        """Raise BoundsError naming the first edge that falls outside a width x height frame."""
        if self.x < 0:
            raise BoundsError(f"left edge {self.x} < 0")
        if self.y < 0:
            raise BoundsError(f"top edge {self.y} < 0")
        if self.right > width:
            raise BoundsError(f"right edge {self.right} > image width {width}")
        if self.bottom > height:
            raise BoundsError(f"bottom edge {self.bottom} > image height {height}")

    def offset(self, inner: "Rect") -> "Rect":
        """Express ``inner`` (relative to this rect) in this rect's parent frame."""
        inner.check_inside(self.width, self.height)
        return Rect(self.x + inner.x, self.y + inner.y, inner.width, inner.height)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.x, self.y, self.width, self.height)


class Provenance(str, Enum):
    SOBEL = "sobel"
    CANNY = "canny"
    EXTERNAL = "external"


@dataclass(frozen=True, eq=False)
class EdgeMap:
    """Edge strength grid in [0, 1] tagged with the detector that produced it."""

    data: np.ndarray
    provenance: Provenance

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or min(data.shape) < 1:
            raise SizeError(f"edge map must be a non-empty 2-D grid, got shape {data.shape}")
        if data.min() < 0.0 or data.max() > 1.0:
            raise ValueError("edge map values must lie in [0, 1]")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def as_gray(img) -> np.ndarray:
    """Return the 2-D float array behind a gray image or an EdgeMap."""
    if isinstance(img, EdgeMap):
        return img.data
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or min(arr.shape) < 1:
        raise SizeError(f"expected a non-empty 2-D gray image, got shape {arr.shape}")
    return arr


def check_color(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3 or min(arr.shape[:2]) < 1:
        raise SizeError(f"expected an (h, w, 3) color image, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError("color channels must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def crop(img, roi: Rect):
    """Cut ``roi`` out of a color image, gray image or EdgeMap; returns the same kind."""
    if isinstance(img, EdgeMap):
        return EdgeMap(crop(img.data, roi), img.provenance)
    arr = np.asarray(img)
    roi.check_inside(arr.shape[1], arr.shape[0])
    return arr[roi.y:roi.bottom, roi.x:roi.right].copy()


LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def to_gray(img) -> np.ndarray:
    """BT.601 luma, scaled to [0, 1]."""
    arr = check_color(img)
    gray = arr.astype(np.float64) @ LUMA_WEIGHTS / 255.0
    return np.clip(gray, 0.0, 1.0)


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator; equal seeds give equal streams."""
    return np.random.Generator(np.random.PCG64(seed))
