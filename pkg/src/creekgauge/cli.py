"""Command line front end.

    creekgauge config init [--out FILE]
    creekgauge calibrate REFERENCE --row R --h-r CM --out template.png [--config FILE]
    creekgauge detect IMAGE --config FILE [--edge KIND] [--debug]
    creekgauge batch DIR --config FILE --out readings.csv [--jobs N] [--debug]
    creekgauge eval READINGS GROUND_TRUTH --out PREFIX
    creekgauge synth SCENE.yaml OUT_DIR
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import yaml

from . import config as config_mod
from .calibration import calibrate, calibration_from_sidecar, save_reference
from .core import GaugeError, Provenance, Rect
from .ensemble import Status
from .imagefile import read_color
from .matcher import load_template
from .metrics import GroundTruthSet, evaluate
from .readings import (debug_line, process_directory, process_image, read_records,
                       timestamp_from_name, write_records)
from .synth import SceneSpec, render_batch

log = logging.getLogger("creekgauge")

EXIT_CODES = {
    Status.OK: 0,
    Status.REJECTED_DARK: 2,
    Status.NO_MATCH: 3,
    Status.DETECTOR_FAILURE: 4,
    Status.NON_CONVERGENT: 5,
}
EXIT_ERROR = 1


def _load_config(args):
    cfg = config_mod.load(args.config) if args.config else config_mod.PipelineConfig()
    if getattr(args, "edge", None):
        cfg = replace(cfg, edge=replace(cfg.edge, kind=args.edge))
    return cfg


def _load_reference(cfg, config_path):
    path = Path(cfg.template_path)
    if not path.is_absolute() and config_path:
        path = Path(config_path).parent / path
    tmpl, meta = load_template(path)
    cal = cfg.calibration or calibration_from_sidecar(meta)
    return tmpl, cal


def cmd_config_init(args) -> int:
    text = config_mod.dump(config_mod.PipelineConfig())
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_calibrate(args) -> int:
    cfg = _load_config(args)
    img = read_color(args.reference)
    size = tuple(int(v) for v in args.template_size.lower().split("x"))
    tmpl, cal = calibrate(img, args.row, args.h_r, cfg, args.cm_per_pixel, size, args.center_x)
    sidecar = save_reference(tmpl, cal, args.out)
    print(f"template {args.out} ({tmpl.width}x{tmpl.height}), sidecar {sidecar}")
    print(f"waterline_row_offset={tmpl.waterline_row_offset} reference_slope={tmpl.reference_slope:.6f} "
          f"reference_row={cal.reference_row:.3f} h_r={cal.h_r}")
    return 0


def cmd_detect(args) -> int:
    cfg = _load_config(args)
    tmpl, cal = _load_reference(cfg, args.config)
    path = Path(args.image)
    stamp = timestamp_from_name(path.name)
    res = process_image(path, stamp.isoformat() if stamp else "", tmpl, cal, cfg)
    if isinstance(res, str):
        log.error(res)
        return EXIT_ERROR
    write_records([res], sys.stdout)
    if args.debug:
        sys.stderr.write(debug_line(res) + "\n")
    return EXIT_CODES[res.status]


def cmd_batch(args) -> int:
    cfg = _load_config(args)
    tmpl, cal = _load_reference(cfg, args.config)
    image_dir = Path(args.image_dir)
    if not image_dir.is_dir():
        log.error("%s is not a directory", image_dir)
        return EXIT_ERROR
    records, errors = process_directory(image_dir, tmpl, cal, cfg, jobs=args.jobs)
    if not records and not errors:
        log.error("no images found in %s", image_dir)
        return EXIT_ERROR
    with open(args.out, "w", newline="") as fh:
        write_records(records, fh)
    if errors:
        Path(str(args.out) + ".errors.txt").write_text("\n".join(errors) + "\n")
    if args.debug:
        with open(str(args.out) + ".debug.jsonl", "w") as fh:
            for rec in records:
                fh.write(debug_line(rec) + "\n")
    n_ok = sum(r.ok for r in records)
    rate = n_ok / len(records) if records else 0.0
    print(f"images={len(records) + len(errors)} ok={n_ok} errors={len(errors)} "
          f"response_rate={rate:.4f}", file=sys.stderr)
    return 0


def _load_ground_truth(path) -> GroundTruthSet:
    path = Path(path)
    if path.is_dir():
        return GroundTruthSet.from_labelimg(sorted(path.glob("*.xml")))
    if path.suffix.lower() == ".xml":
        return GroundTruthSet.from_labelimg([path])
    return GroundTruthSet.from_csv(path)


def cmd_eval(args) -> int:
    records = read_records(args.readings)
    report = evaluate(records, _load_ground_truth(args.ground_truth))
    prefix = str(args.out)
    report.write_summary(prefix + "_summary.csv")
    report.write_per_day(prefix + "_per_day.csv")
    r2 = "n/a" if report.r2 is None else f"{report.r2:.4f}"
    print(f"n={report.n} mae={report.mae:.4f} mape={report.mape:.4f}% r2={r2} "
          f"response_rate={report.response_rate:.4f}")
    return 0


def scene_from_config(data: dict):
    """Parse a synth config: ``scene`` (SceneSpec fields) plus ``frames``.

    ``frames`` gives either ``water_rows`` (a list) or ``row_start``/``row_stop``/
    ``count`` for a linear ramp, ``seed`` (first per-frame seed), optional
    ``wave_amplitude``/``wave_period`` added to the ramp, and optionally
    ``dark_every`` with ``dark_scale`` to darken every n-th frame.
    """
    scene = dict(data.get("scene", {}))
    if "pier_rect" in scene:
        scene["pier_rect"] = Rect(**scene["pier_rect"])
    base = SceneSpec(**scene)
    frames = data.get("frames", {})
    if "water_rows" in frames:
        rows = [float(r) for r in frames["water_rows"]]
    else:
        count = int(frames.get("count", 0))
        rows = np.linspace(frames.get("row_start", base.water_row),
                           frames.get("row_stop", base.water_row), count)
        amp = float(frames.get("wave_amplitude", 0.0))
        if amp:
            period = float(frames.get("wave_period", 36))
            rows = rows + amp * np.sin(2 * np.pi * np.arange(count) / period)
        rows = rows.tolist()
    seed0 = int(frames.get("seed", base.seed))
    seeds = [seed0 + i for i in range(len(rows))]
    brightness = [base.brightness_scale] * len(rows)
    every = int(frames.get("dark_every", 0))
    if every:
        for i in range(every - 1, len(rows), every):
            brightness[i] = float(frames.get("dark_scale", 0.1))
    return base, rows, seeds, brightness


def cmd_synth(args) -> int:
    data = yaml.safe_load(Path(args.scene_config).read_text()) or {}
    base, rows, seeds, brightness = scene_from_config(data)
    gt = render_batch(base, rows, seeds, args.out_dir, brightness=brightness)
    print(f"wrote {len(rows)} frames and {gt}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="creekgauge", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    cfg_p = sub.add_parser("config", help="configuration helpers")
    cfg_sub = cfg_p.add_subparsers(dest="config_command", required=True)
    init = cfg_sub.add_parser("init", help="print the default configuration")
    init.add_argument("--out")
    init.set_defaults(func=cmd_config_init)

    edge_kinds = [k.value for k in Provenance]

    cal = sub.add_parser("calibrate", help="build the reference template and calibration")
    cal.add_argument("reference")
    cal.add_argument("--row", type=float, required=True, help="annotated water-line row (image frame)")
    cal.add_argument("--h-r", dest="h_r", type=float, required=True, help="reference water height, cm")
    cal.add_argument("--cm-per-pixel", type=float, default=1.0)
    cal.add_argument("--template-size", default="280x320", help="WIDTHxHEIGHT")
    cal.add_argument("--center-x", type=float, default=None, help="template centre column (image frame)")
    cal.add_argument("--config")
    cal.add_argument("--edge", choices=edge_kinds)
    cal.add_argument("--out", required=True, help="template image path (.png or .pgm)")
    cal.set_defaults(func=cmd_calibrate)

    det = sub.add_parser("detect", help="read the water level from one image")
    det.add_argument("image")
    det.add_argument("--config", required=True)
    det.add_argument("--edge", choices=edge_kinds)
    det.add_argument("--debug", action="store_true", help="diagnostics as JSON on stderr")
    det.set_defaults(func=cmd_detect)

    bat = sub.add_parser("batch", help="process a directory of timestamped images")
    bat.add_argument("image_dir")
    bat.add_argument("--config", required=True)
    bat.add_argument("--out", required=True)
    bat.add_argument("--jobs", type=int, default=1)
    bat.add_argument("--edge", choices=edge_kinds)
    bat.add_argument("--debug", action="store_true", help="also write OUT.debug.jsonl")
    bat.set_defaults(func=cmd_batch)

    ev = sub.add_parser("eval", help="score readings against ground truth")
    ev.add_argument("readings")
    ev.add_argument("ground_truth", help="CSV (identifier,row), LabelImg XML file or directory")
    ev.add_argument("--out", required=True, help="output prefix")
    ev.set_defaults(func=cmd_eval)

    syn = sub.add_parser("synth", help="render a synthetic dataset")
    syn.add_argument("scene_config")
    syn.add_argument("out_dir")
    syn.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (GaugeError, OSError, ValueError, KeyError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
