"""The two water-line detectors on one matched region.

The regression detector fits lines to per-column bright-to-dark transitions in
the edge map; the split-window detector scans the smoothed gray region for the
row where the upper and lower halves differ most. Readings are kept only when
the two agree within 3 px.
"""
from creekgauge import (SsdWindowConfig, combine, detect_water_coordinates, detect_waterline_ssd,
                        fit_waterline_regression, sobel, to_gray)
from creekgauge.preprocess import box_filter
from creekgauge.synth import SceneSpec, render

spec = SceneSpec(noise_sigma=0.03, water_row=300.0, water_slope=0.05, debris_count=3, seed=5)
img, truth = render(spec)

# The pier region, in image coordinates.
x0, y0, w, h = 260, 120, 120, 300
gray = box_filter(to_gray(img)[y0:y0 + h, x0:x0 + w], 2)
edges = sobel(gray)
cx = (w - 1) / 2

coords = detect_water_coordinates(edges)
reg = fit_waterline_regression(coords, spec.water_slope, center_x=cx, region_height=h)
ssd = detect_waterline_ssd(gray, SsdWindowConfig(shear_slope=spec.water_slope))

print(f"true water line     {truth - y0:7.2f}  (region rows)")
print(f"regression          {reg.row_at_center:7.2f}  window {reg.diagnostics['window_index']}, "
      f"{len(coords)} transition points")
print(f"split window (SSD)  {ssd.row_at_center:7.2f}  divider row {ssd.diagnostics['divider_row']}")
row = combine(reg, ssd)
print("ensemble           ", "no response" if row is None else f"{row:7.2f}")
