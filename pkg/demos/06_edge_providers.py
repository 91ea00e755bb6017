"""Sobel, Canny and externally produced edge maps of the same ROI.

An external map (for example from a learned edge network run elsewhere) is read
from an 8-bit grayscale file; here a Canny map stands in for it.
"""
import tempfile
from pathlib import Path

from creekgauge import EdgeProviderConfig, canny, crop, load_external, sobel, to_gray
from creekgauge.core import Rect
from creekgauge.imagefile import write_gray
from creekgauge.preprocess import box_filter
from creekgauge.synth import SceneSpec, render

img, truth = render(SceneSpec(noise_sigma=0.03, water_row=280.0))
roi = Rect(120, 40, 400, 400)
gray = box_filter(to_gray(crop(img, roi)), 2)

maps = {"sobel": sobel(gray), "canny": canny(gray, EdgeProviderConfig(kind="canny"))}
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "frame_edges.png"
    write_gray(path, maps["canny"].data)
    maps["external"] = load_external(path, expected_shape=(400, 400))

line = int(truth) - roi.y
band = slice(line - 3, line + 3)
for name, em in maps.items():
    hit = (em.data[band] > 0.5).any(axis=0).mean()
    print(f"{name:>8}: mean {em.data.mean():.3f}, {hit:.0%} of columns have a strong edge "
          f"within 3 rows of the water line")
