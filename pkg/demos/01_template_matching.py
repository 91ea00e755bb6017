"""Find the bridge pier in an edge map by normalized cross-correlation.

A template is cut from the edge map of a reference frame. Later frames are
searched with it; a frame whose best score falls below 0.8 gets no reading.
"""
import numpy as np

from creekgauge import Rect, Template, crop, match_template, sobel, to_gray
from creekgauge.preprocess import box_filter
from creekgauge.synth import SceneSpec, render

roi = Rect(120, 40, 400, 400)


def edges_of(img):
    return sobel(box_filter(to_gray(crop(img, roi)), 2))


reference, _ = render(SceneSpec(noise_sigma=0.03, seed=1))
ref_edges = edges_of(reference)
cut = Rect(60, 30, 280, 320)
tmpl = Template(crop(ref_edges, cut), cut, waterline_row_offset=230)

# The same bridge a few frames later, water a bit higher.
later, _ = render(SceneSpec(noise_sigma=0.03, water_row=285.0, seed=2))
res = match_template(tmpl, edges_of(later))
print(f"later frame:  score {res.score:.3f} at {res.location.as_tuple()[:2]}, accepted={res.accepted}")

# Upside down, the pier no longer lines up and the match is rejected.
flipped = np.ascontiguousarray(later[::-1])
res = match_template(tmpl, edges_of(flipped))
print(f"flipped view: score {res.score:.3f}, accepted={res.accepted}")
