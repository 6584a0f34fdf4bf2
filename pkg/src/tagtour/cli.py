"""Command-line interface: one subcommand per pipeline stage.

Exit codes: 0 success, 1 validation/config error, 2 I/O error.  All
diagnostics go to stderr; declared output paths receive machine output
only.  A JSON config file can set any pipeline parameter; explicit flags
win over the config file.
"""

import argparse
import json
import sys
from pathlib import Path

from . import synth as synth_mod
from .color_scheme import write_tag_sheet
from .detector import detections_to_records, import_detections
from .errors import IoError, TagTourError
from .image_io import load_image, save_image
from .pipeline import (
    PipelineConfig,
    detect_faces_dir,
    load_detections_json,
    load_property_manifest,
    recognize_detections,
    run_property_pipeline,
    write_json,
)
from .projection import cubemap_to_equirect, read_cubemap
from .recognizer import readings_from_records, readings_to_records
from .report import build_report, load_manifest, write_report
from .tour_builder import PanoramaRecord, build_tour, export_tour


def _load_config(args) -> PipelineConfig:
    data = {}
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except OSError as e:
            raise IoError(f"cannot read config {args.config}: {e}") from e
        except json.JSONDecodeError as e:
            raise TagTourError(f"invalid config JSON: {e}") from e
    if getattr(args, "face_size", None):
        data["face_size"] = args.face_size
    if getattr(args, "iou", None):
        data["iou_threshold"] = args.iou
    return PipelineConfig.from_dict(data)


def _parse_numbers(spec: str) -> list[int]:
    out = []
    for part in spec.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def cmd_gen_tags(args) -> int:
    paths = write_tag_sheet(_parse_numbers(args.numbers), args.out, side_px=args.side)
    print(f"wrote {len(paths)} tag sheets to {args.out}", file=sys.stderr)
    return 0


def cmd_to_cubemap(args) -> int:
    from .projection import equirect_to_cubemap, write_cubemap

    eq = load_image(args.input)
    faces = equirect_to_cubemap(eq, args.face_size)
    stem = Path(args.out) / (args.stem or Path(args.input).stem)
    paths = write_cubemap(faces, stem)
    print(f"wrote {len(paths)} faces under {stem}_*.png", file=sys.stderr)
    return 0


def cmd_to_equirect(args) -> int:
    faces = read_cubemap(args.stem)
    eq = cubemap_to_equirect(faces, args.width, args.height)
    save_image(args.out, eq)
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


def cmd_detect(args) -> int:
    config = _load_config(args)
    if args.import_path:
        dets = import_detections(args.import_path, args.import_format, face_size=config.face_size)
    else:
        by_key = detect_faces_dir(args.faces, config.detector)
        dets = {}
        for key, items in by_key.items():
            image = key.split("/")[0]
            dets.setdefault(image, []).extend(items)
    write_json(args.out, detections_to_records(dets), config.config_hash())
    n = sum(len(v) for v in dets.values())
    print(f"{n} detections -> {args.out}", file=sys.stderr)
    return 0


def cmd_recognize(args) -> int:
    config = _load_config(args)
    if args.detections:
        by_key = load_detections_json(args.detections)
    else:
        by_key = detect_faces_dir(args.faces, config.detector)
    readings = recognize_detections(args.faces, by_key, config.recognizer)
    flat = {}
    for key in sorted(readings):
        image = key.split("/")[0]
        flat.setdefault(image, []).extend(readings[key])
    write_json(args.out, readings_to_records(flat), config.config_hash())
    n_ok = sum(1 for v in flat.values() for r in v if r.ok)
    n = sum(len(v) for v in flat.values())
    print(f"{n_ok}/{n} readings ok -> {args.out}", file=sys.stderr)
    return 0


def cmd_build_tour(args) -> int:
    config = _load_config(args)
    manifest = load_property_manifest(args.manifest)
    try:
        records = json.loads(Path(args.readings).read_text())
    except OSError as e:
        raise IoError(f"cannot read {args.readings}: {e}") from e
    except json.JSONDecodeError as e:
        raise TagTourError(f"invalid readings JSON: {e}") from e
    panoramas = []
    for i, p in enumerate(manifest["panoramas"], start=1):
        if "width" in p and "height" in p:
            w, h = int(p["width"]), int(p["height"])
        else:
            eq = load_image(Path(args.input or ".") / p["file"])
            w, h = eq.shape[1], eq.shape[0]
        panoramas.append(
            PanoramaRecord(
                id=p["id"],
                file=p["file"],
                width=w,
                height=h,
                capture_index=int(p.get("capture_index", i)),
                anchor_tag=int(p["anchor_tag"]),
            )
        )
    graph = build_tour(
        manifest.get("property_id", "property"),
        panoramas,
        readings_from_records(records),
        face_size=config.face_size,
    )
    export_tour(graph, args.out, config_hash=config.config_hash())
    print(f"tour with {len(graph.hotspots)} hotspots, {len(graph.warnings)} warnings -> {args.out}", file=sys.stderr)
    return 0


def cmd_synth(args) -> int:
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except OSError as e:
            raise IoError(f"cannot read config {args.config}: {e}") from e
        except json.JSONDecodeError as e:
            raise TagTourError(f"invalid config JSON: {e}") from e
    if args.seed is not None:
        data["seed"] = args.seed
    noise = synth_mod.NoiseSpec(**data.pop("noise", {}))
    distractors = synth_mod.DistractorConfig(**data.pop("distractors", {}))
    for key in ("panos_per_property", "tags_per_pano", "distance_range_m"):
        if key in data:
            data[key] = tuple(data[key])
    cfg = synth_mod.DatasetConfig(noise=noise, distractors=distractors, **data)
    out = synth_mod.generate_dataset(cfg, args.out)
    print(f"dataset -> {out}", file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    config = _load_config(args)
    manifest = load_manifest(args.gt)
    try:
        readings = json.loads(Path(args.pred).read_text())
    except OSError as e:
        raise IoError(f"cannot read {args.pred}: {e}") from e
    except json.JSONDecodeError as e:
        raise TagTourError(f"invalid readings JSON: {e}") from e
    report = build_report(
        readings,
        manifest,
        iou_thr=args.iou,
        coco_range=args.coco_range,
        per_property=args.per_property,
        config_hash=config.config_hash(),
    )
    path = write_report(report, readings, manifest, args.out, iou_thr=args.iou)
    e2e = report["end_to_end"]
    print(
        f"P={e2e['P']:.4f} R={e2e['R']:.4f} f1={e2e['f1']:.4f} mAP={e2e['mAP']:.4f}"
        + (f" property_accuracy={report['property_accuracy']:.4f}" if "property_accuracy" in report else ""),
        file=sys.stderr,
    )
    print(f"report -> {path}", file=sys.stderr)
    return 0


def cmd_pipeline(args) -> int:
    config = _load_config(args)
    manifest = load_property_manifest(args.manifest)
    graph = run_property_pipeline(args.input, manifest, args.out, config)
    print(
        f"tour: {len(graph.panoramas)} panoramas, {len(graph.hotspots)} hotspots, "
        f"{len(graph.warnings)} warnings -> {Path(args.out) / 'tour.json'}",
        file=sys.stderr,
    )
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tagtour", description="Bi-colored tag virtual-tour toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-tags", help="render numbered tag sheets")
    p.add_argument("--numbers", default="1-20", help="e.g. 1-20 or 1,2,5")
    p.add_argument("--side", type=int, default=256)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_tags)

    p = sub.add_parser("to-cubemap", help="equirectangular image to six cube faces")
    p.add_argument("input")
    p.add_argument("--face-size", type=int, default=1024)
    p.add_argument("--out", required=True)
    p.add_argument("--stem", default=None)
    p.set_defaults(func=cmd_to_cubemap)

    p = sub.add_parser("to-equirect", help="six cube faces back to an equirectangular image")
    p.add_argument("stem", help="path stem of <stem>_front.png .. <stem>_bottom.png")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_to_equirect)

    p = sub.add_parser("detect", help="detect tags on cube faces")
    p.add_argument("faces", nargs="?", default=None, help="directory of face PNGs")
    p.add_argument("--import-path", default=None, help="import external detections instead")
    p.add_argument("--import-format", choices=["yolo_txt", "json"], default="yolo_txt")
    p.add_argument("--config", default=None)
    p.add_argument("--face-size", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("recognize", help="read tag numbers from detections")
    p.add_argument("faces", help="directory of face PNGs")
    p.add_argument("--detections", default=None, help="detections.json to classify (else run the detector)")
    p.add_argument("--config", default=None)
    p.add_argument("--face-size", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("build-tour", help="assemble the tour graph from readings")
    p.add_argument("--manifest", required=True)
    p.add_argument("--readings", required=True)
    p.add_argument("--input", default=None, help="directory holding the panorama files")
    p.add_argument("--config", default=None)
    p.add_argument("--face-size", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_tour)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--config", default=None, help="JSON DatasetConfig overrides")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="evaluate readings against ground truth")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--coco-range", action="store_true")
    p.add_argument("--per-property", action="store_true", default=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True, help="report directory")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", help="to-cubemap + detect + recognize + build-tour")
    p.add_argument("--in", dest="input", required=True, help="property directory")
    p.add_argument("--manifest", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--face-size", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except IoError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except TagTourError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
