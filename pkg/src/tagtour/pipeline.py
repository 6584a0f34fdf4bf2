"""Property-level orchestration: cubemap, detect, recognize, build tour.

The `pipeline` CLI subcommand and the individual stage subcommands call
the same functions here with the same resolved config, which is what
makes staged and one-shot runs byte-identical.  Internal parallelism is
capped by the DIGITOUR_THREADS environment variable (default 1); work
items are always collected in deterministic order.
"""

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .detector import Detection, DetectorParams, detect_tags, detections_to_records, import_detections
from .errors import IoError, ParseError
from .image_io import load_image
from .projection import FACE_IDS, CubeFace, equirect_to_cubemap, write_cubemap
from .recognizer import (
    RecognizerParams,
    TagReading,
    classify_tag,
    readings_from_records,
    readings_to_records,
)
from .tour_builder import PanoramaRecord, TourGraph, build_tour, export_tour

THREADS_ENV = "DIGITOUR_THREADS"


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class PipelineConfig:
    face_size: int = 1024
    iou_threshold: float = 0.5
    detector: DetectorParams = field(default_factory=DetectorParams)
    recognizer: RecognizerParams = field(default_factory=RecognizerParams)

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        det = DetectorParams(**data.get("detector", {}))
        rec = RecognizerParams(**data.get("recognizer", {}))
        return cls(
            face_size=int(data.get("face_size", 1024)),
            iou_threshold=float(data.get("iou_threshold", 0.5)),
            detector=det,
            recognizer=rec,
        )


def split_face_stem(stem: str) -> tuple[str, str | None]:
    """'pano_01_front' -> ('pano_01', 'front'); unknown suffix -> (stem, None)."""
    for fid in FACE_IDS:
        suffix = f"_{fid}"
        if stem.endswith(suffix):
            return stem[: -len(suffix)], fid
    return stem, None


def load_property_manifest(path) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as e:
        raise IoError(f"cannot read manifest {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid manifest JSON: {e}") from e
    if "panoramas" not in data or not data["panoramas"]:
        raise ParseError("property manifest needs a non-empty 'panoramas' list")
    for i, p in enumerate(data["panoramas"]):
        for key in ("id", "file", "anchor_tag"):
            if key not in p:
                raise ParseError(f"panorama entry {i} lacks {key!r}")
    return data


def convert_property_to_faces(input_dir, manifest: dict, faces_dir, face_size: int) -> dict[str, int]:
    """to-cubemap every manifest panorama; returns pano id -> (width, height)."""
    input_dir = Path(input_dir)
    faces_dir = Path(faces_dir)
    dims = {}

    def _one(pano):
        eq = load_image(input_dir / pano["file"])
        faces = equirect_to_cubemap(eq, face_size)
        write_cubemap(faces, faces_dir / pano["id"])
        return pano["id"], (eq.shape[1], eq.shape[0])

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        for pano_id, wh in pool.map(_one, manifest["panoramas"]):
            dims[pano_id] = wh
    return dims


def detect_faces_dir(faces_dir, params: DetectorParams) -> dict[str, list[Detection]]:
    """Run the rule detector over every face PNG; keyed '<image>/<face>'."""
    faces_dir = Path(faces_dir)
    files = sorted(faces_dir.glob("*.png"))

    def _one(path):
        image, fid = split_face_stem(path.stem)
        face = CubeFace(fid or "front", load_image(path))
        return f"{image}/{fid or 'front'}", detect_tags(face, params)

    out: dict[str, list[Detection]] = {}
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        for key, dets in pool.map(_one, files):
            out[key] = dets
    return out


def load_detections_json(path) -> dict[str, list[Detection]]:
    """detections.json records regrouped by '<image>/<face>'."""
    out: dict[str, list[Detection]] = {}
    for image, dets in import_detections(path, "json").items():
        for d in dets:
            out.setdefault(f"{image}/{d.face_id or 'front'}", []).append(d)
    return out


def recognize_detections(
    faces_dir, dets_by_key: dict[str, list[Detection]], params: RecognizerParams
) -> dict[str, list[TagReading]]:
    faces_dir = Path(faces_dir)
    out: dict[str, list[TagReading]] = {}
    for key in sorted(dets_by_key):
        image, fid = key.split("/")
        img = load_image(faces_dir / f"{image}_{fid}.png")
        face = CubeFace(fid, img)
        out[key] = [classify_tag(face, d, params) for d in dets_by_key[key]]
    return out


def write_json(path, payload, config_hash: str | None = None) -> Path:
    """Write a JSON artifact; array payloads get a sidecar .meta.json."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2) + "\n")
        if config_hash is not None:
            meta = {"config_hash": config_hash}
            path.with_suffix(path.suffix + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e
    return path


def readings_by_panorama(readings: dict[str, list[TagReading]]) -> dict[str, list[TagReading]]:
    grouped: dict[str, list[TagReading]] = {}
    for key in sorted(readings):
        image = key.split("/")[0]
        grouped.setdefault(image, []).extend(readings[key])
    return grouped


def run_property_pipeline(input_dir, manifest: dict, out_dir, config: PipelineConfig) -> TourGraph:
    """Full pass over one property: faces, detections, readings, tour."""
    out_dir = Path(out_dir)
    faces_dir = out_dir / "faces"
    chash = config.config_hash()

    dims = convert_property_to_faces(input_dir, manifest, faces_dir, config.face_size)

    dets = detect_faces_dir(faces_dir, config.detector)
    det_records: dict[str, list] = {}
    for key, items in dets.items():
        image, _ = key.split("/")
        det_records.setdefault(image, []).extend(items)
    det_path = write_json(out_dir / "detections.json", detections_to_records(det_records), chash)

    # Re-read the serialized detections so the staged subcommands and the
    # one-shot pipeline classify from bit-identical inputs.
    readings = recognize_detections(faces_dir, load_detections_json(det_path), config.recognizer)
    flat: dict[str, list[TagReading]] = {}
    for key in sorted(readings):
        image = key.split("/")[0]
        flat.setdefault(image, []).extend(readings[key])
    records = readings_to_records(flat)
    write_json(out_dir / "readings.json", records, chash)

    panoramas = []
    for i, p in enumerate(manifest["panoramas"], start=1):
        w, h = dims[p["id"]]
        panoramas.append(
            PanoramaRecord(
                id=p["id"],
                file=p["file"],
                width=int(p.get("width", w)),
                height=int(p.get("height", h)),
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
    export_tour(graph, out_dir / "tour.json", config_hash=chash)
    return graph
