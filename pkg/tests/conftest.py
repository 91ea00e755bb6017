import numpy as np
import pytest

from creekgauge import config as config_mod
from creekgauge.calibration import calibrate, save_reference
from creekgauge.core import Rect
from creekgauge.preprocess import box_filter
from creekgauge.synth import SceneSpec, render, render_gray

STEP_W, STEP_H = 200, 160


def step_scene(i, seed_base=0):
    """Seeded textured step scene: bright pier above dark water, random row/shear/noise.

    Returns (gray8/255 image, shear, true row at the centre column).
    """
    rng = np.random.default_rng(seed_base + i)
    row = rng.uniform(55, 105)
    shear = rng.uniform(-0.2, 0.2)
    sigma = rng.uniform(0, 0.05)
    cx = (STEP_W - 1) / 2
    spec = SceneSpec(width=STEP_W, height=STEP_H, pier_rect=Rect(0, 0, STEP_W, STEP_H),
                     water_row=row - shear * cx, water_slope=shear, noise_sigma=sigma,
                     seed=10_000 + i, texture_seed=20_000 + i)
    gray = np.rint(render_gray(spec) * 255) / 255
    return gray, shear, spec.true_row_at_center()


def smoothed_step_scene(i, seed_base=0):
    gray, shear, truth = step_scene(i, seed_base)
    return box_filter(gray, 2), shear, truth


@pytest.fixture(scope="session")
def reference(tmp_path_factory):
    """Template + calibration built from a synthetic reference frame (water at row 300)."""
    out = tmp_path_factory.mktemp("reference")
    cfg = config_mod.PipelineConfig(template_path="tmpl.png")
    img, _ = render(SceneSpec(noise_sigma=0.03, water_row=300.0, seed=7))
    tmpl, cal = calibrate(img, 300, 200.0, cfg)
    save_reference(tmpl, cal, out / "tmpl.png")
    config_mod.save(cfg, out / "config.yaml")
    return {"dir": out, "cfg": cfg, "tmpl": tmpl, "cal": cal,
            "config_path": out / "config.yaml"}


# One verdict line per acceptance criterion, echoed in the terminal summary.
ACCEPTANCE_LINES: dict[int, str] = {}


def report_criterion(number: int, passed: bool, detail: str) -> bool:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
