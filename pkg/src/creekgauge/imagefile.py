"""PNG / PGM reading and writing (8-bit only), backed by Pillow."""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .core import EdgeMap, GaugeError, Provenance, as_gray, check_color


class ImageDecodeError(GaugeError, OSError):
    def __init__(self, path, reason):
        super().__init__(f"{path}: {reason}")
        self.path = str(path)


def _open(path) -> Image.Image:
    path = Path(path)
    if not path.is_file():
        raise ImageDecodeError(path, "no such file")
    try:
        im = Image.open(path)
        im.load()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ImageDecodeError(path, f"cannot decode ({exc})") from exc
    return im


def read_color(path) -> np.ndarray:
    im = _open(path)
    if im.mode not in ("RGB", "RGBA", "L", "P", "LA"):
        raise ImageDecodeError(path, f"unsupported pixel mode {im.mode}")
    return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def read_gray8(path) -> np.ndarray:
    """Read an 8-bit single-channel image as a uint8 array."""
    im = _open(path)
    if im.mode != "L":
        raise ImageDecodeError(path, f"expected 8-bit grayscale, got mode {im.mode}")
    return np.asarray(im, dtype=np.uint8).copy()


def _format_for(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".png":
        return "PNG"
    if suffix in (".pgm", ".ppm", ".pnm"):
        return "PPM"
    raise ValueError(f"unsupported image extension {suffix!r} (use .png, .pgm or .ppm)")


def write_color(path, img) -> None:
    arr = check_color(img)
    fmt = _format_for(path)
    if Path(path).suffix.lower() == ".pgm":
        raise ValueError("PGM holds grayscale only; write color images as .png or .ppm")
    # Light compression: noisy frames barely shrink at higher levels but encode far slower.
    opts = {"compress_level": 1} if fmt == "PNG" else {}
    Image.fromarray(arr, mode="RGB").save(path, format=fmt, **opts)


def quantize(gray) -> np.ndarray:
    return np.rint(np.clip(as_gray(gray), 0.0, 1.0) * 255.0).astype(np.uint8)


def write_gray(path, gray) -> None:
    """Write a [0, 1] gray image or EdgeMap as 8-bit grayscale."""
    Image.fromarray(quantize(gray), mode="L").save(path, format=_format_for(path))


def read_edge_map(path, provenance=Provenance.EXTERNAL) -> EdgeMap:
    return EdgeMap(read_gray8(path).astype(np.float64) / 255.0, provenance)
