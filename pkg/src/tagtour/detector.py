"""Rule-based tag detection on cube faces, plus import of external detections.

The detector thresholds the image in HSV against the ten palette colors,
cleans the mask morphologically, and reports merged connected components
as axis-aligned boxes with a mask-coverage confidence.  Externally
produced detections (e.g. from a trained network) can be imported from
YOLO txt or JSON and flow through the same downstream contract.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .color_scheme import palette
from .colorspace import circular_hue_delta, rgb_image_to_hsv
from .errors import IoError, ParseError
from .projection import CubeFace

SOURCE_RULE = "rule"
SOURCE_IMPORTED = "imported"


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box, half-open pixel coordinates, x right / y down."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return max(self.width, 0.0) * max(self.height, 0.0)

    @property
    def center(self) -> tuple[float, float]:
        return (self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0

    def clamped(self, width: float, height: float) -> "BBox":
        return BBox(
            min(max(self.x_min, 0.0), width),
            min(max(self.y_min, 0.0), height),
            min(max(self.x_max, 0.0), width),
            min(max(self.y_max, 0.0), height),
        )

    def as_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]


@dataclass(frozen=True)
class Detection:
    face_id: str | None
    bbox: BBox
    confidence: float
    source: str = SOURCE_RULE
    class_prior: int | None = None  # imported class index, tie-break hint only


@dataclass(frozen=True)
class DetectorParams:
    hue_tol_deg: float = 14.0
    sat_min: float = 0.2
    # Palette fills sit at v >= 0.58; the floor keeps noisy near-black
    # pixels (whose hue is arbitrary) out of the chromatic mask.
    val_min: float = 0.35
    grey_sat_max: float = 0.15
    grey_val_tol: float = 0.18
    min_area: int = 24 * 24  # at face size 1024; scaled by (face/1024)^2
    aspect_min: float = 1.0 / 3.0
    aspect_max: float = 3.0
    merge_margin_px: float = 2.0


def palette_mask(img: np.ndarray, params: DetectorParams = DetectorParams()) -> np.ndarray:
    """Boolean mask of pixels matching any of the ten palette colors."""
    h, s, v = rgb_image_to_hsv(img)
    mask = np.zeros(h.shape, dtype=bool)
    chromatic = (s >= params.sat_min) & (v >= params.val_min)
    grey_v = 0.0
    for entry in palette():
        if entry.color.s < params.sat_min:
            grey_v = entry.color.v
            continue
        mask |= chromatic & (circular_hue_delta(h, entry.color.h) <= params.hue_tol_deg)
    mask |= (s <= params.grey_sat_max) & (np.abs(v - grey_v) <= params.grey_val_tol)
    return mask


def _merge_boxes(boxes: list[tuple[int, int, int, int]], margin: float) -> list[list[int]]:
    """Group box indices whose margin-expanded boxes touch or overlap."""
    n = len(boxes)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        xi0, yi0, xi1, yi1 = boxes[i]
        for j in range(i + 1, n):
            xj0, yj0, xj1, yj1 = boxes[j]
            if (
                xi0 - margin <= xj1 + margin
                and xj0 - margin <= xi1 + margin
                and yi0 - margin <= yj1 + margin
                and yj0 - margin <= yi1 + margin
            ):
                parent[find(i)] = find(j)

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def detect_tags(face, params: DetectorParams = DetectorParams()) -> list[Detection]:
    """Detect tag-like regions on one cube face.

    Returns detections sorted by confidence descending (ties by y_min,
    then x_min).  Empty list when nothing matches.
    """
    if isinstance(face, CubeFace):
        img, face_id = face.image, face.id
    else:
        img, face_id = np.asarray(face), None
    height, width = img.shape[:2]

    mask = palette_mask(img, params)
    structure = np.ones((3, 3), dtype=bool)
    mask = ndimage.binary_closing(mask, structure=structure)
    mask = ndimage.binary_opening(mask, structure=structure)

    labels, n = ndimage.label(mask, structure=structure)
    if n == 0:
        return []

    # Area gate uses the component's bounding box: a tag of exactly the
    # minimum side must pass even though its numerals and circle subtract
    # from the raw pixel count.
    min_area = params.min_area * (width / 1024.0) ** 2
    slices = ndimage.find_objects(labels)
    kept: list[tuple[int, int, int, int]] = []
    for sl in slices:
        y0, y1 = sl[0].start, sl[0].stop
        x0, x1 = sl[1].start, sl[1].stop
        if (x1 - x0) * (y1 - y0) < min_area:
            continue
        aspect = (x1 - x0) / (y1 - y0)
        if not params.aspect_min <= aspect <= params.aspect_max:
            continue
        kept.append((x0, y0, x1, y1))
    if not kept:
        return []

    detections = []
    for group in _merge_boxes(kept, params.merge_margin_px):
        x0 = min(kept[i][0] for i in group)
        y0 = min(kept[i][1] for i in group)
        x1 = max(kept[i][2] for i in group)
        y1 = max(kept[i][3] for i in group)
        conf = float(mask[y0:y1, x0:x1].mean())
        bbox = BBox(float(x0), float(y0), float(x1), float(y1)).clamped(width, height)
        detections.append(Detection(face_id=face_id, bbox=bbox, confidence=conf))

    detections.sort(key=lambda d: (-d.confidence, d.bbox.y_min, d.bbox.x_min))
    return detections


def _parse_yolo_line(line: str, lineno: int, face_size: int) -> Detection:
    parts = line.split()
    if len(parts) not in (5, 6):
        raise ParseError(f"expected 5 or 6 fields, got {len(parts)}", line=lineno)
    try:
        cls = int(parts[0])
        vals = [float(p) for p in parts[1:]]
    except ValueError as e:
        raise ParseError(str(e), line=lineno) from e
    cx, cy, w, h = vals[:4]
    conf = vals[4] if len(vals) == 5 else 1.0
    for name, val in zip(("cx", "cy", "w", "h", "conf"), (cx, cy, w, h, conf)):
        if not 0.0 <= val <= 1.0:
            raise ParseError(f"{name}={val} outside [0, 1]", line=lineno)
    bbox = BBox(
        (cx - w / 2.0) * face_size,
        (cy - h / 2.0) * face_size,
        (cx + w / 2.0) * face_size,
        (cy + h / 2.0) * face_size,
    ).clamped(face_size, face_size)
    return Detection(face_id=None, bbox=bbox, confidence=conf, source=SOURCE_IMPORTED, class_prior=cls)


def import_detections(path, format: str, face_size: int | None = None) -> dict[str, list[Detection]]:
    """Load external detections, keyed by image name.

    format "yolo_txt": one file per image with normalized
    `<class> <cx> <cy> <w> <h> [conf]` lines, denormalized against
    face_size (required).  format "json": a detections.json array with
    {image, face, bbox, confidence, source} records.
    """
    path = Path(path)
    if not path.exists():
        raise IoError(f"no such file: {path}")
    if format == "yolo_txt":
        if face_size is None:
            raise ValueError("face_size is required for yolo_txt import")
        out: dict[str, list[Detection]] = {}
        files = sorted(path.glob("*.txt")) if path.is_dir() else [path]
        for f in files:
            dets = []
            for lineno, line in enumerate(f.read_text().splitlines(), start=1):
                if not line.strip():
                    continue
                dets.append(_parse_yolo_line(line, lineno, face_size))
            out[f.stem] = dets
        return out
    if format == "json":
        try:
            records = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e}") from e
        if not isinstance(records, list):
            raise ParseError("detections JSON must be a top-level array")
        out = {}
        for i, rec in enumerate(records):
            try:
                bbox = BBox(*[float(x) for x in rec["bbox"]])
                det = Detection(
                    face_id=rec.get("face"),
                    bbox=bbox,
                    confidence=float(rec["confidence"]),
                    source=rec.get("source", SOURCE_IMPORTED),
                )
            except (KeyError, TypeError, ValueError) as e:
                raise ParseError(f"record {i}: {e}") from e
            out.setdefault(rec.get("image", ""), []).append(det)
        return out
    raise ValueError(f"unknown detection format {format!r}")


def detections_to_records(dets_by_image: dict[str, list[Detection]]) -> list[dict]:
    """Flatten to the detections.json record schema."""
    records = []
    for image in sorted(dets_by_image):
        for d in dets_by_image[image]:
            records.append(
                {
                    "image": image,
                    "face": d.face_id,
                    "bbox": [round(v, 3) for v in d.bbox.as_list()],
                    "confidence": round(d.confidence, 6),
                    "source": d.source,
                }
            )
    return records
