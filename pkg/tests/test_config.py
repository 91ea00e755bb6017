import pytest

from creekgauge import config as config_mod
from creekgauge.core import ConfigError, Rect
from creekgauge.ensemble import CalibrationModel


def test_defaults_round_trip():
    cfg = config_mod.PipelineConfig()
    assert config_mod.loads(config_mod.dump(cfg)) == cfg


def test_custom_round_trip(tmp_path):
    cfg = config_mod.PipelineConfig(roi=Rect(1, 2, 300, 310), match_threshold=0.7,
                                    calibration=CalibrationModel(120.0, 55.5, 0.5),
                                    ssd_source="edge")
    config_mod.save(cfg, tmp_path / "c.yaml")
    assert config_mod.load(tmp_path / "c.yaml") == cfg


def test_invalid_values_rejected():
    with pytest.raises(ConfigError):
        config_mod.PipelineConfig(ssd_source="color")
    with pytest.raises((ConfigError, TypeError)):
        config_mod.loads("roi: {x: 0, y: 0, width: 10}\n")


def test_shear_follows_template_slope():
    from creekgauge.core import EdgeMap, Provenance
    from creekgauge.matcher import Template
    import numpy as np
    tmpl = Template(EdgeMap(np.zeros((10, 10)), Provenance.SOBEL), Rect(0, 0, 10, 10), 3, 0.05)
    assert config_mod.PipelineConfig().ssd_config(tmpl).shear_slope == 0.05
