"""Night frames are rejected, dim frames brightened, daylight frames left alone."""
from creekgauge import ScreeningConfig, screen_brightness
from creekgauge.core import make_rng
from creekgauge.synth import SceneSpec, render

cfg = ScreeningConfig()
for label, scale in [("night", 0.1), ("dusk", 0.55), ("day", 1.4)]:
    img, _ = render(SceneSpec(noise_sigma=0.03, brightness_scale=scale))
    outcome, out = screen_brightness(img, cfg, make_rng(0))
    mean = sum(outcome.mean_rgb) / 3
    print(f"{label:>5}: sampled mean {mean:6.1f} -> {outcome.verdict.value:<13} "
          f"image mean {img.mean():6.1f} -> {out.mean():6.1f}")
