import numpy as np
import pytest

from creekgauge.core import ConfigError, make_rng
from creekgauge.preprocess import ScreeningConfig, Verdict, box_filter, screen_brightness


def naive_box(img, radius):
    h, w = img.shape
    out = np.empty_like(img)
    for r in range(h):
        for c in range(w):
            acc, n = 0.0, 0
            for dr in range(-radius, radius + 1):
                for dc in range(-radius, radius + 1):
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < h and 0 <= cc < w:
                        acc += img[rr, cc]
                        n += 1
            out[r, c] = acc / n
    return out


def test_constant_image_unchanged():
    img = np.full((9, 11), 0.37)
    assert np.array_equal(box_filter(img, 2), img)


def test_radius_zero_identity():
    img = np.random.default_rng(0).random((7, 5))
    assert np.array_equal(box_filter(img, 0), img)


def test_single_bright_pixel():
    img = np.zeros((7, 7))
    img[3, 3] = 1.0
    out = box_filter(img, 2)
    # Windows that lie fully inside the image average 25 pixels.
    assert np.allclose(out[2:5, 2:5], 1 / 25, atol=1e-15)
    assert np.allclose(out, naive_box(img, 2), atol=1e-12)


@pytest.mark.parametrize("radius", [1, 2, 3])
def test_matches_naive_on_random(radius):
    img = np.random.default_rng(radius).random((13, 17))
    assert np.allclose(box_filter(img, radius), naive_box(img, radius), atol=1e-12)


def test_negative_radius_rejected():
    with pytest.raises(ValueError):
        box_filter(np.zeros((4, 4)), -1)


def uniform(v, shape=(20, 20)):
    return np.full(shape + (3,), v, dtype=np.uint8)


def test_black_rejected():
    out, img = screen_brightness(uniform(0), ScreeningConfig(), make_rng(0))
    assert out.verdict is Verdict.REJECTED_DARK
    assert np.array_equal(img, uniform(0))


def test_dim_boosted():
    out, img = screen_brightness(uniform(80), ScreeningConfig(), make_rng(0))
    assert out.verdict is Verdict.BOOSTED
    assert np.array_equal(img, uniform(120))


def test_boost_clamps_to_255():
    img = uniform(90)
    img[0, 0] = 250
    out, boosted = screen_brightness(img, ScreeningConfig(sample_count=5), make_rng(3))
    assert out.verdict is Verdict.BOOSTED
    assert boosted[0, 0, 0] == 255 and boosted[1, 1, 0] == 135


def test_bright_passes_unchanged():
    out, img = screen_brightness(uniform(200), ScreeningConfig(), make_rng(0))
    assert out.verdict is Verdict.PASSED
    assert np.array_equal(img, uniform(200))


def test_single_dark_channel_rejects():
    img = uniform(150)
    img[..., 2] = 10
    out, _ = screen_brightness(img, ScreeningConfig(), make_rng(0))
    assert out.verdict is Verdict.REJECTED_DARK


def test_screening_deterministic_for_seed():
    img = np.random.default_rng(9).integers(0, 256, (50, 50, 3), dtype=np.uint8)
    a, _ = screen_brightness(img, ScreeningConfig(), make_rng(5))
    b, _ = screen_brightness(img, ScreeningConfig(), make_rng(5))
    assert a == b


def test_config_validation():
    with pytest.raises(ConfigError):
        ScreeningConfig(sample_count=0)
    with pytest.raises(ConfigError):
        ScreeningConfig(boost_factor=0.5)
