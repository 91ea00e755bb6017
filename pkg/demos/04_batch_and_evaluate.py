"""Render a short synthetic day, process it in one batch and score the readings.

Every fifth frame is darkened to night level; those frames are screened out
before any detection runs.
"""
import tempfile
from pathlib import Path

import numpy as np

from creekgauge import PipelineConfig, calibrate, evaluate
from creekgauge.metrics import GroundTruthSet
from creekgauge.readings import process_directory
from creekgauge.synth import SceneSpec, render, render_batch

cfg = PipelineConfig()
reference, _ = render(SceneSpec(noise_sigma=0.03, water_row=300.0, seed=7))
tmpl, cal = calibrate(reference, 300, 200.0, cfg)

n = 40
rows = 300 + 15 * np.sin(np.linspace(0, 2 * np.pi, n))
brightness = [0.1 if (i + 1) % 5 == 0 else 1.0 for i in range(n)]
with tempfile.TemporaryDirectory() as tmp:
    gt_path = render_batch(SceneSpec(noise_sigma=0.03), rows, range(500, 500 + n), tmp,
                           brightness=brightness)
    records, errors = process_directory(Path(tmp), tmpl, cal, cfg, jobs=2)
    report = evaluate(records, GroundTruthSet.from_csv(gt_path))

counts = {}
for rec in records:
    counts[rec.status.value] = counts.get(rec.status.value, 0) + 1
print("statuses:", counts)
print(f"paired {report.n} readings: MAE {report.mae:.3f} px, MAPE {report.mape:.3f} %, "
      f"R2 {report.r2:.4f}, response rate {report.response_rate:.2f}")
