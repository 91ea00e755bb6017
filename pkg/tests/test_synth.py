import csv

import numpy as np
import pytest

from creekgauge.core import ConfigError, Rect, make_rng, to_gray
from creekgauge.detectors import SsdWindowConfig, detect_waterline_ssd
from creekgauge.edgemap import sobel
from creekgauge.preprocess import ScreeningConfig, Verdict, screen_brightness
from creekgauge.synth import SceneSpec, frame_name, render, render_batch


def test_clean_scene_boundary():
    img, truth = render(SceneSpec(water_row=120.0))
    assert truth == 120.0
    gray = to_gray(img)
    col = gray[:, 320]
    assert col[119] != col[120] and np.all(col[120:] == col[120])
    em = sobel(gray)
    strongest = np.argmax(em.data[100:140, 320]) + 100
    assert abs(strongest - 119.5) <= 1


def test_dark_scene_rejected():
    img, _ = render(SceneSpec(brightness_scale=0.1, noise_sigma=0.03))
    out, _ = screen_brightness(img, ScreeningConfig(), make_rng(0))
    assert out.verdict is Verdict.REJECTED_DARK


def test_flat_line_found_by_ssd():
    img, truth = render(SceneSpec(water_row=120.0, noise_sigma=0.02))
    region = to_gray(img)[40:440, 260:380]
    est = detect_waterline_ssd(region, SsdWindowConfig())
    assert abs(40 + est.row_at_center - truth) <= 1


def test_same_seed_same_image():
    a, _ = render(SceneSpec(noise_sigma=0.05, debris_count=3, seed=4))
    b, _ = render(SceneSpec(noise_sigma=0.05, debris_count=3, seed=4))
    c, _ = render(SceneSpec(noise_sigma=0.05, debris_count=3, seed=5))
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_sloped_truth_at_pier_centre():
    spec = SceneSpec(water_row=300.0, water_slope=0.1)
    assert spec.true_row_at_center() == pytest.approx(300 + 0.1 * 59.5)


def test_invalid_spec():
    with pytest.raises(ConfigError):
        SceneSpec(water_row=10.0)
    with pytest.raises(ConfigError):
        SceneSpec(brightness_scale=0)


def test_batch_files_and_csv(tmp_path):
    rows = np.linspace(100, 140, 100)
    base = SceneSpec(width=64, height=192, pier_rect=Rect(10, 40, 30, 150), water_row=120.0)
    gt = render_batch(base, rows, range(100), tmp_path)
    with open(gt) as fh:
        data = list(csv.reader(fh))
    assert data[0] == ["identifier", "row"] and len(data) == 101
    assert [float(r[1]) for r in data[1:]] == pytest.approx(rows.tolist())
    assert len(list(tmp_path.glob("frame_*.png"))) == 100
    assert data[1][0] == frame_name(0) == "frame_20191003T080000.png"


def test_empty_batch(tmp_path):
    gt = render_batch(SceneSpec(), [], [], tmp_path)
    assert gt.read_text().strip() == "identifier,row"
    assert not list(tmp_path.glob("*.png"))
