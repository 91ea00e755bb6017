"""Pipeline configuration: one YAML document holding every tunable constant."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path

import yaml

from .core import ConfigError, Rect
from .detectors import SsdWindowConfig
from .edgemap import EdgeProviderConfig
from .ensemble import DEFAULT_TOL_PX, CalibrationModel
from .matcher import DEFAULT_THRESHOLD
from .preprocess import ScreeningConfig


@dataclass(frozen=True)
class PipelineConfig:
    roi: Rect = Rect(120, 40, 400, 400)
    screening: ScreeningConfig = field(default_factory=ScreeningConfig)
    smoothing_radius: int = 2
    edge: EdgeProviderConfig = field(default_factory=EdgeProviderConfig)
    match_threshold: float = DEFAULT_THRESHOLD
    ssd: SsdWindowConfig = field(default_factory=SsdWindowConfig)
    ssd_source: str = "gray"  # "gray" (the smoothed ROI) or "edge"
    ensemble_tol_px: float = DEFAULT_TOL_PX
    # None: take the calibration stored in the template sidecar
    calibration: CalibrationModel | None = None
    template_path: str = "template.png"

    def __post_init__(self):
        if self.ssd_source not in ("edge", "gray"):
            raise ConfigError("ssd_source must be 'edge' or 'gray'")
        if not 0 <= self.match_threshold <= 1:
            raise ConfigError("match_threshold must lie in [0, 1]")
        if self.ensemble_tol_px < 0:
            raise ConfigError("ensemble_tol_px must be >= 0")
        if self.smoothing_radius < 0:
            raise ConfigError("smoothing_radius must be >= 0")

    def ssd_config(self, tmpl) -> SsdWindowConfig:
        """SSD window with its shear taken from the template's reference slope."""
        return replace(self.ssd, shear_slope=float(tmpl.reference_slope))


def _plain(value):
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


def to_dict(cfg: PipelineConfig) -> dict:
    return _plain(asdict(cfg))


def from_dict(data: dict) -> PipelineConfig:
    data = dict(data or {})
    unknown = set(data) - set(PipelineConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        if "roi" in data:
            data["roi"] = Rect(**data["roi"])
        if "screening" in data:
            data["screening"] = ScreeningConfig(**data["screening"])
        if "edge" in data:
            data["edge"] = EdgeProviderConfig(**data["edge"])
        if "ssd" in data:
            data["ssd"] = SsdWindowConfig(**data["ssd"])
        if data.get("calibration") is not None:
            data["calibration"] = CalibrationModel(**data["calibration"])
        return PipelineConfig(**data)
    except TypeError as exc:
        raise ConfigError(f"bad config: {exc}") from exc


def dump(cfg: PipelineConfig) -> str:
    return yaml.safe_dump(to_dict(cfg), sort_keys=False)


def loads(text: str) -> PipelineConfig:
    return from_dict(yaml.safe_load(text))


def load(path) -> PipelineConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return loads(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from exc


def save(cfg: PipelineConfig, path) -> None:
    Path(path).write_text(dump(cfg))
