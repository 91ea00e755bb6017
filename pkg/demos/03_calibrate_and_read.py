"""Calibrate on one reference frame, then read water heights from later frames.

Heights are differences against the reference: a water line one pixel higher in
the image means one pixel-equivalent more water (1 cm per pixel here).
"""
from creekgauge import PipelineConfig, calibrate, run_pipeline
from creekgauge.synth import SceneSpec, render

cfg = PipelineConfig()
reference, _ = render(SceneSpec(noise_sigma=0.03, water_row=300.0, seed=7))
tmpl, cal = calibrate(reference, annotated_row=300, h_r=200.0, cfg=cfg)
print(f"template {tmpl.width}x{tmpl.height}, reference row {cal.reference_row:.2f}, h_r {cal.h_r} cm")

for i, row in enumerate([300.0, 290.0, 281.5, 312.0]):
    img, truth = render(SceneSpec(noise_sigma=0.03, water_row=row, seed=100 + i))
    rec = run_pipeline(img, tmpl, cal, cfg, identifier=f"frame{i}")
    print(f"water at row {truth:6.1f}: {rec.status.value:>6}  row {rec.pixel_row:7.2f}  "
          f"delta {rec.delta_h_cm:+6.2f} cm  height {rec.height_cm:7.2f} cm")
