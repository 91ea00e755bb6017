"""Edge-map providers: Sobel and Canny built in, plus ingestion of externally
produced maps (e.g. from a pretrained HED network run elsewhere)."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .core import ConfigError, EdgeMap, GaugeError, Provenance, SizeError, as_gray
from .imagefile import ImageDecodeError, read_edge_map


class IngestionError(GaugeError, OSError):
    def __init__(self, path, reason):
        super().__init__(f"cannot ingest edge map {path}: {reason}")
        self.path = str(path)


@dataclass(frozen=True)
class EdgeProviderConfig:
    kind: Provenance = Provenance.SOBEL
    canny_low: float = 0.1
    canny_high: float = 0.3
    gaussian_sigma: float = 1.4
    # Placeholders: {stem} (input file name without suffix), {name}, {timestamp}
    external_path_template: str = "{stem}_edges.png"

    def __post_init__(self):
        object.__setattr__(self, "kind", Provenance(self.kind))
        if self.gaussian_sigma <= 0:
            raise ConfigError("gaussian_sigma must be > 0")
        if not (0 <= self.canny_low <= 1 and 0 <= self.canny_high <= 1):
            raise ConfigError("canny thresholds must lie in [0, 1]")
        if self.kind is Provenance.CANNY and not self.canny_low < self.canny_high:
            raise ConfigError("canny_low must be < canny_high")

    def external_path(self, image_path, timestamp: str = "") -> Path:
        image_path = Path(image_path)
        rel = self.external_path_template.format(
            stem=image_path.stem, name=image_path.name, timestamp=timestamp)
        rel = Path(rel)
        return rel if rel.is_absolute() else image_path.parent / rel


def _sobel_components(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Interior Sobel derivatives (x to the right, y downwards); borders are zero."""
    gx = np.zeros_like(arr)
    gy = np.zeros_like(arr)
    gx[1:-1, 1:-1] = ((arr[:-2, 2:] + 2 * arr[1:-1, 2:] + arr[2:, 2:])
                      - (arr[:-2, :-2] + 2 * arr[1:-1, :-2] + arr[2:, :-2]))
    gy[1:-1, 1:-1] = ((arr[2:, :-2] + 2 * arr[2:, 1:-1] + arr[2:, 2:])
                      - (arr[:-2, :-2] + 2 * arr[:-2, 1:-1] + arr[:-2, 2:]))
    return gx, gy


def _rescale(mag: np.ndarray) -> np.ndarray:
    peak = mag.max()
    if peak <= 0:
        return np.zeros_like(mag)
    return np.clip(mag / peak, 0.0, 1.0)


def sobel(img) -> EdgeMap:
    """Gradient magnitude from 3x3 Sobel kernels, rescaled so the strongest edge is 1."""
    arr = as_gray(img)
    if arr.shape[0] < 3 or arr.shape[1] < 3:
        raise SizeError(f"sobel needs at least 3x3 pixels, got {arr.shape[1]}x{arr.shape[0]}")
    gx, gy = _sobel_components(arr)
    return EdgeMap(_rescale(np.hypot(gx, gy)), Provenance.SOBEL)


# Neighbour offsets (dy, dx) along the gradient for the 4 quantized directions.
_NMS_OFFSETS = {
    0: (0, 1),    # gradient ~horizontal
    1: (1, 1),    # ~45 deg (y down)
    2: (1, 0),    # ~vertical
    3: (1, -1),   # ~135 deg
}


def non_max_suppression(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Keep pixels that are local maxima along their quantized gradient direction.

    Ties are resolved asymmetrically (strictly greater than the "behind" neighbour,
    at least the "ahead" neighbour) so plateaus two pixels wide thin to one.
    """
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    sector = (np.floor((angle + 22.5) / 45.0).astype(int)) % 4
    h, w = mag.shape
    padded = np.pad(mag, 1)
    out = np.zeros_like(mag)
    for s, (dy, dx) in _NMS_OFFSETS.items():
        ahead = padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        behind = padded[1 - dy:1 - dy + h, 1 - dx:1 - dx + w]
        keep = (sector == s) & (mag > behind) & (mag >= ahead) & (mag > 0)
        out[keep] = mag[keep]
    return out


def hysteresis(strength: np.ndarray, low: float, high: float) -> np.ndarray:
    """Binary map of weak pixels (> low) 8-connected to at least one strong pixel (> high)."""
    weak = strength > low
    strong = strength > high
    labels, count = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
    if count == 0:
        return np.zeros(strength.shape)
    keep = np.zeros(count + 1, dtype=bool)
    keep[np.unique(labels[strong])] = True
    keep[0] = False
    return keep[labels].astype(np.float64)


def canny(img, cfg: EdgeProviderConfig | None = None) -> EdgeMap:
    """Binary Canny edge map: Gaussian blur, Sobel, NMS, double-threshold hysteresis.

    Thresholds apply to the NMS magnitudes rescaled by their maximum.
    """
    cfg = cfg or EdgeProviderConfig(kind=Provenance.CANNY)
    if not cfg.canny_low < cfg.canny_high:
        raise ConfigError("canny_low must be < canny_high")
    arr = as_gray(img)
    if arr.shape[0] < 5 or arr.shape[1] < 5:
        raise SizeError(f"canny needs at least 5x5 pixels, got {arr.shape[1]}x{arr.shape[0]}")
    smooth = ndimage.gaussian_filter(arr, cfg.gaussian_sigma, mode="nearest")
    gx, gy = _sobel_components(smooth)
    thin = non_max_suppression(np.hypot(gx, gy), gx, gy)
    edges = hysteresis(_rescale(thin), cfg.canny_low, cfg.canny_high)
    return EdgeMap(edges, Provenance.CANNY)


def load_external(path, expected_shape: tuple[int, int] | None = None) -> EdgeMap:
    """Ingest an 8-bit grayscale edge map, mapping v -> v/255.

    ``expected_shape`` is ``(height, width)`` of the ROI the map must cover.
    """
    try:
        edges = read_edge_map(path, Provenance.EXTERNAL)
    except ImageDecodeError as exc:
        raise IngestionError(path, str(exc)) from exc
    if expected_shape is not None and edges.shape != tuple(expected_shape):
        raise IngestionError(
            path, f"size {edges.width}x{edges.height} does not match ROI "
                  f"{expected_shape[1]}x{expected_shape[0]}")
    return edges


def make_edge_map(gray, cfg: EdgeProviderConfig, external_path=None) -> EdgeMap:
    """Dispatch to the configured provider."""
    if cfg.kind is Provenance.SOBEL:
        return sobel(gray)
    if cfg.kind is Provenance.CANNY:
        return canny(gray, cfg)
    if external_path is None:
        raise ConfigError("external edge provider needs a file path")
    return load_external(external_path, as_gray(gray).shape)
