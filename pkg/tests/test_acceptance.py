"""Acceptance criteria 1-9, each checked at its stated tolerance.

Every test records a single PASS/FAIL line (see ``report_criterion``); the lines
are repeated together at the end of the pytest run.
"""
import csv
import math
import time

import numpy as np
import pytest
import yaml

from conftest import report_criterion, smoothed_step_scene
from creekgauge.cli import main
from creekgauge.core import EdgeMap, Provenance, Rect
from creekgauge.detectors import (Method, SsdWindowConfig, WaterCoordinates, WaterLineEstimate,
                                  detect_water_coordinates, detect_waterline_ssd,
                                  fit_waterline_regression)
from creekgauge.edgemap import sobel
from creekgauge.ensemble import combine
from creekgauge.imagefile import write_color
from creekgauge.matcher import Template, match_template, ncc_score, score_map
from creekgauge.metrics import GroundTruthSet, cross_series_r2, evaluate, mae, mape, r_squared
from creekgauge.readings import read_records
from creekgauge.synth import SceneSpec, render

H_R = 200.0
BATCH_CSVS = []  # every batch CSV produced here, for the calibration identity check


def as_template(patch):
    patch = np.asarray(patch, dtype=np.float64)
    return Template(EdgeMap(patch, Provenance.EXTERNAL),
                    Rect(0, 0, patch.shape[1], patch.shape[0]), 0)


def naive_ncc(t, w):
    num = sum(float(a) * float(b) for a, b in zip(t.ravel(), w.ravel()))
    den = math.sqrt(sum(float(a) ** 2 for a in t.ravel()) * sum(float(b) ** 2 for b in w.ravel()))
    return 0.0 if den == 0 else num / den


# -- 1 ---------------------------------------------------------------------------

def test_criterion_1_ncc_correctness():
    start = time.perf_counter()
    hits = 0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        img = rng.random((400, 400))
        x, y = (int(v) for v in rng.integers(0, 341, 2))
        patch = rng.random((60, 60))
        img[y:y + 60, x:x + 60] = patch
        res = match_template(as_template(patch), EdgeMap(img, Provenance.EXTERNAL))
        hits += (res.location.x, res.location.y) == (x, y) and res.score >= 0.99 and res.accepted

    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        img = rng.random((40, 40))
        img[rng.random((40, 40)) < 0.2] = 0.0
        img[:6, :6] = 0.0  # include zero-energy windows
        t = rng.random((9, 7))
        fast = score_map(t, img)
        for yy in range(40 - 9 + 1):
            for xx in range(40 - 7 + 1):
                worst = max(worst, abs(fast[yy, xx] - naive_ncc(t, img[yy:yy + 9, xx:xx + 7])))
    elapsed = time.perf_counter() - start
    ok = hits == 200 and worst <= 1e-9 and elapsed < 30
    report_criterion(1, ok, f"planted {hits}/200, brute-force max |dscore| {worst:.2e}, "
                            f"{elapsed:.1f} s")
    assert ok


# -- 2 ---------------------------------------------------------------------------

CASES_2 = [
    ([[1, 0], [0, 1]], [[1, 0], [0, 0]], 1 / math.sqrt(2)),
    ([[0.25, 0.5], [0.75, 1]], [[0.25, 0.5], [0.75, 1]], 1.0),
    ([[0.1, 0.2], [0.3, 0.4]], [[0.25, 0.5], [0.75, 1]], 1.0),
    ([[1, 0], [0, 0]], [[0, 1], [1, 1]], 0.0),
    ([[1, 1], [1, 1]], [[0, 0], [0, 0]], 0.0),
    ([[0, 0], [0, 0]], [[1, 2], [3, 4]], 0.0),
    ([[0.5, 1, 0], [0, 0.5, 0], [0, 0, 0.5]], [[1, 1, 1], [0, 1, 0], [1, 0, 1]], 5 / math.sqrt(42)),
    ([[1, 1, 1], [1, 1, 1], [1, 1, 1]], [[1, 0, 0], [0, 1, 0], [0, 0, 1]], 3 / math.sqrt(27)),
    ([[0.5, 0, 0], [0, 0, 0], [0, 0, 0.5]], [[1, 0, 0], [0, 0, 0], [0, 0, 0]], 1 / math.sqrt(2)),
    ([[0.2, 0.4], [0.4, 0.2]], [[0.2, 0.2], [0.4, 0.4]], 0.9),
]


def test_criterion_2_ncc_hand_cases():
    worst = 0.0
    for t, w, expect in CASES_2:
        t = np.asarray(t, float)
        w = np.asarray(w, float)
        direct = ncc_score(as_template(t), w, 0, 0)
        padded = np.zeros((w.shape[0] + 1, w.shape[1] + 1))
        padded[:w.shape[0], :w.shape[1]] = w
        fast = score_map(t, padded)[0, 0]
        worst = max(worst, abs(direct - expect), abs(fast - expect))
    ok = worst <= 1e-12
    report_criterion(2, ok, f"{len(CASES_2)} hand cases, max error {worst:.2e}")
    assert ok


# -- 3 and 4 -----------------------------------------------------------------------

def oracle_ssd_argmax(region, h, slope):
    """Row-by-row evaluation of the split-window score, without running sums."""
    H, W = region.shape
    cols = np.arange(W)
    offsets = np.rint(slope * cols).astype(int)
    best_y, best = None, -np.inf
    for y in range(H - h - 1, h - 1, -1):  # bottom-up; strict '>' keeps the lower row on ties
        total, count = 0.0, 0
        for i in range(1, h + 1):
            up = y + offsets - i
            lo = up + h
            keep = (up >= 0) & (lo < H)
            d = region[up[keep], cols[keep]] - region[lo[keep], cols[keep]]
            total += float(np.sum(d * d))
            count += int(keep.sum())
        s = total / count if count else 0.0
        if s > best:
            best_y, best = y, s
    return best_y


def test_criterion_3_ssd_oracle():
    agree, close = 0, 0
    for i in range(100):
        region, shear, truth = smoothed_step_scene(i)
        est = detect_waterline_ssd(region, SsdWindowConfig(half_height=8, shear_slope=shear))
        agree += est.diagnostics["divider_row"] == oracle_ssd_argmax(region, 8, shear)
        close += abs(est.row_at_center - truth) <= 1.0
    ok = agree == 100 and close >= 95
    report_criterion(3, ok, f"oracle agreement {agree}/100, within 1 px {close}/100")
    assert ok


def separable_case(rng):
    ref = rng.uniform(-0.3, 0.3)
    target = int(rng.integers(0, 5))
    xs = np.arange(100)
    ys = np.empty(100)
    for k in range(5):
        seg = slice(20 * k, 20 * k + 20)
        if k == target:
            slope = ref
        else:
            slope = ref + rng.choice([-1, 1]) * rng.uniform(0.2, 1.0)
        ys[seg] = rng.uniform(50, 150) + slope * xs[seg] + rng.normal(0, 0.01, 20)
    return WaterCoordinates(xs, ys), ref, target


def test_criterion_4_regression():
    close, diffs = 0, []
    for i in range(100):
        region, shear, truth = smoothed_step_scene(i)
        edges = sobel(region)
        try:
            est = fit_waterline_regression(detect_water_coordinates(edges), shear,
                                           center_x=(region.shape[1] - 1) / 2,
                                           region_height=region.shape[0])
            diffs.append(est.row_at_center - truth)
        except Exception:
            diffs.append(np.nan)
    diffs = np.array(diffs)
    close = int(np.sum(np.abs(diffs) <= 1.0))

    rng = np.random.default_rng(77)
    picked = 0
    for _ in range(200):
        wc, ref, target = separable_case(rng)
        est = fit_waterline_regression(wc, ref, center_x=50.0)
        picked += est.diagnostics["window_index"] == target
    ok = close >= 95 and picked == 200
    report_criterion(4, ok, f"within 1 px {close}/100 (median offset {np.nanmedian(diffs):+.2f} px), "
                            f"window selection {picked}/200")
    assert ok


# -- 5, 8, 9: synthetic batches ----------------------------------------------------

@pytest.fixture(scope="module")
def batch_setup(tmp_path_factory):
    root = tmp_path_factory.mktemp("acceptance")
    scene = {"scene": {"noise_sigma": 0.03},
             "frames": {"count": 500, "row_start": 270, "row_stop": 330, "seed": 1000,
                        "dark_every": 10, "dark_scale": 0.1}}
    (root / "scene.yaml").write_text(yaml.safe_dump(scene))
    assert main(["synth", str(root / "scene.yaml"), str(root / "data")]) == 0
    ref, _ = render(SceneSpec(noise_sigma=0.03, water_row=300.0, seed=7))
    write_color(root / "reference.png", ref)
    assert main(["config", "init", "--out", str(root / "config.yaml")]) == 0
    assert main(["calibrate", str(root / "reference.png"), "--row", "300", "--h-r", str(H_R),
                 "--config", str(root / "config.yaml"), "--out", str(root / "template.png")]) == 0
    return root


def run_batch(root, out, jobs):
    start = time.perf_counter()
    assert main(["batch", str(root / "data"), "--config", str(root / "config.yaml"),
                 "--out", str(out), "--jobs", str(jobs)]) == 0
    BATCH_CSVS.append(out)
    return time.perf_counter() - start


@pytest.mark.slow
def test_criterion_5_end_to_end(batch_setup):
    root = batch_setup
    out = root / "readings_j1.csv"
    elapsed = run_batch(root, out, 1)
    records = read_records(out)
    gt = GroundTruthSet.from_csv(root / "data" / "ground_truth.csv")
    dark = {i for i in range(500) if (i + 1) % 10 == 0}
    rejected = {i for i, r in enumerate(records) if r.status.value == "rejected_dark"}
    clear = [r for i, r in enumerate(records) if i not in dark]
    response = sum(r.ok for r in clear) / len(clear)
    report = evaluate(records, gt)
    ok = (len(records) == 500 and rejected == dark and response >= 0.85
          and report.mae <= 2.0 and report.r2 >= 0.95 and elapsed < 300)
    report_criterion(5, ok, f"response {response:.3f} on non-dark frames, dark frames exact: "
                            f"{rejected == dark}, MAE {report.mae:.3f} px, R2 {report.r2:.4f}, "
                            f"batch {elapsed:.1f} s")
    assert ok


@pytest.mark.slow
def test_criterion_8_determinism(batch_setup):
    root = batch_setup
    a, b = root / "det_j1.csv", root / "det_j8.csv"
    run_batch(root, a, 1)
    run_batch(root, b, 8)
    same = a.read_bytes() == b.read_bytes()
    report_criterion(8, same, f"--jobs 1 vs --jobs 8 byte-identical: {same}")
    assert same


@pytest.mark.slow
def test_criterion_9_calibration_identity(batch_setup):
    checked, broken = 0, 0
    for path in BATCH_CSVS:
        with open(path) as fh:
            for row in csv.DictReader(fh):
                if row["status"] != "ok":
                    continue
                checked += 1
                broken += float(row["height_cm"]) - float(row["delta_h_cm"]) != H_R
    ok = checked > 0 and broken == 0
    report_criterion(9, ok, f"{checked} ok records across {len(BATCH_CSVS)} batches, "
                            f"{broken} violations")
    assert ok


# -- 6 -----------------------------------------------------------------------------

def test_criterion_6_ensemble_grid():
    gaps = [0.0, 1.0, 2.9, 3.0, 3.1, 10.0]
    wrong = 0
    cases = 0
    for base in (0.0, 57.25, 120.0, 399.5):
        for gap in gaps:
            for sign in (1, -1):
                a = WaterLineEstimate(base, Method.REGRESSION)
                b = WaterLineEstimate(base + sign * gap, Method.SSD)
                got = combine(a, b, 3.0)
                expect = (base + base + sign * gap) / 2 if gap <= 3.0 else None
                wrong += got != expect
                cases += 1
    ok = wrong == 0
    report_criterion(6, ok, f"{cases - wrong}/{cases} grid cases correct (gaps {gaps})")
    assert ok


# -- 7 -----------------------------------------------------------------------------

def test_criterion_7_metrics():
    checks = [
        (mae([1, 2, 3], [1, 2, 3]), 0.0),
        (mae([2, 4], [1, 2]), 1.5),
        (mape([1, 2, 3], [1, 2, 3]), 0.0),
        (mape([110], [100]), 10.0),
        (mape([90, 210], [100, 200]), 7.5),
        (r_squared([1, 2, 3], [1, 2, 3]), 1.0),
        (r_squared([2, 2, 2], [1, 2, 3]), 0.0),
        (r_squared([1, 2, 4], [1, 2, 3]), 0.5),
        (cross_series_r2([1, 2, 3], [7, 9, 11]), 1.0),
        (cross_series_r2([1, 2, 3], [1, 2, 2]), 0.75),
    ]
    worst = max(abs(got - want) for got, want in checks)
    rng = np.random.default_rng(12345)
    truth = 270 + 60 * rng.random(1000)
    noisy = truth + rng.normal(0, 2.0, 1000)
    mc = mae(noisy, truth)
    expect = 2 * math.sqrt(2 / math.pi)
    ok = worst <= 1e-12 and abs(mc - expect) <= 0.3
    report_criterion(7, ok, f"{len(checks)} hand cases max error {worst:.1e}; Monte-Carlo MAE "
                            f"{mc:.3f} vs {expect:.3f}")
    assert ok
