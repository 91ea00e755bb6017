"""Stream water-level gauging from fixed-camera images.

Edge maps + template matching locate the bridge pier; a regression detector and
a split-window SSD detector each estimate the water line, and a reading is
reported only when they agree.
"""
from .core import (BoundsError, ConfigError, EdgeMap, GaugeError, Provenance, Rect, SizeError,
                   crop, make_rng, to_gray)
from .preprocess import ScreeningConfig, ScreeningOutcome, Verdict, box_filter, screen_brightness
from .edgemap import EdgeProviderConfig, IngestionError, canny, load_external, sobel
from .matcher import MatchResult, Template, match_template, ncc_score
from .detectors import (FittedLine, InsufficientSupportError, SsdWindowConfig, WaterCoordinates,
                        WaterLineEstimate, detect_water_coordinates, detect_waterline_ssd,
                        fit_waterline_regression, ssd_profile)
from .ensemble import (CalibrationModel, ReadingRecord, Status, calibrate_height, combine,
                       run_pipeline)
from .config import PipelineConfig
from .calibration import CalibrationError, calibrate
from .metrics import (EvalReport, GroundTruthSet, cross_series_r2, evaluate, mae, mape,
                      r_squared)
from .synth import SceneSpec, render, render_batch

__version__ = "0.1.0"
