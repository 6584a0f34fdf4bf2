"""Back-projection of tag readings and virtual-tour graph assembly.

Panoramas are nodes; every successfully read tag becomes a directed
hotspot from the panorama it was seen in to the panorama anchored at
that tag number.  Tour correctness is judged on the undirected collapse
of those edges.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .detector import BBox
from .errors import InvalidProperty, IoError, ParseError
from .projection import face_point_to_equirect, wrap_min_cover
from .recognizer import TagReading

TOUR_VERSION = 1


@dataclass(frozen=True)
class PanoramaRecord:
    id: str
    file: str
    width: int
    height: int
    capture_index: int
    anchor_tag: int


@dataclass(frozen=True)
class Hotspot:
    panorama_id: str
    tag_number: int
    equirect_bbox: BBox  # x_min > x_max means the box wraps across px = 0
    wrapped: bool
    yaw_deg: float
    pitch_deg: float
    target_panorama_id: str | None
    confidence: float


@dataclass(frozen=True)
class TourGraph:
    property_id: str
    panoramas: list[PanoramaRecord]
    hotspots: list[Hotspot]
    warnings: list[str] = field(default_factory=list)

    def undirected_edges(self) -> set[frozenset]:
        anchor_of = {p.id: p.anchor_tag for p in self.panoramas}
        return {
            frozenset((anchor_of[h.panorama_id], anchor_of[h.target_panorama_id]))
            for h in self.hotspots
            if h.target_panorama_id is not None
        }


def backproject_reading(reading: TagReading, face_size: int, width: int, height: int):
    """Equirect box plus view angles for one reading on a cube face.

    Projects the four corners and four edge midpoints of the detection
    box; the equirect box is the minimal-width cover of those points,
    allowed to wrap across the px = 0 seam (x_min > x_max, wrapped=True).
    Yaw is degrees in [-180, 180), pitch in [-90, 90].
    """
    b = reading.detection.bbox
    face_id = reading.detection.face_id
    xs = (b.x_min, (b.x_min + b.x_max) / 2.0, b.x_max)
    ys = (b.y_min, (b.y_min + b.y_max) / 2.0, b.y_max)
    points = [(x, y) for x in xs for y in ys if not (x == xs[1] and y == ys[1])]
    projected = [face_point_to_equirect(face_id, x, y, face_size, width, height) for x, y in points]
    pxs = [float(p[0]) for p in projected]
    pys = [float(p[1]) for p in projected]

    # A box enclosing the pole on a top/bottom face spans every longitude;
    # the boundary points alone would miss the pole row entirely.
    fc = (face_size - 1) / 2.0
    pole_inside = face_id in ("top", "bottom") and b.x_min <= fc <= b.x_max and b.y_min <= fc <= b.y_max
    if pole_inside:
        pole_py = float(height) if face_id == "bottom" else 0.0
        y_min = min(min(pys), pole_py)
        y_max = max(max(pys), pole_py)
        bbox = BBox(0.0, y_min, float(width), y_max)
        lons = np.deg2rad(np.asarray(pxs) / width * 360.0 - 180.0)
        yaw = float(np.degrees(np.arctan2(np.sin(lons).sum(), np.cos(lons).sum())))
        if abs(yaw) < 1e-9:
            yaw = 0.0
        pitch = -90.0 if face_id == "bottom" else 90.0
        return bbox, False, yaw, pitch

    x_min, x_max, wrapped = wrap_min_cover(pxs, width)
    y_min, y_max = min(pys), max(pys)
    bbox = BBox(x_min, y_min, x_max, y_max)

    arc = (x_max - x_min) % width
    center_px = (x_min + arc / 2.0) % width
    center_py = (y_min + y_max) / 2.0
    yaw = (center_px / width - 0.5) * 360.0
    pitch = (0.5 - center_py / height) * 180.0
    return bbox, wrapped, yaw, pitch


def build_tour(
    property_id: str,
    panoramas: list[PanoramaRecord],
    readings_by_panorama: dict[str, list],
    face_size: int = 1024,
) -> TourGraph:
    """Assemble the tour graph from per-panorama tag readings.

    readings_by_panorama values may be TagReading objects or already
    backprojected dicts with keys {tag_number, bbox, wrapped, yaw_deg,
    pitch_deg, confidence}.
    """
    if not panoramas:
        raise InvalidProperty("property has no panoramas")
    anchors: dict[int, str] = {}
    for p in panoramas:
        if p.anchor_tag in anchors:
            raise InvalidProperty(f"anchor tag {p.anchor_tag} used by both {anchors[p.anchor_tag]} and {p.id}")
        anchors[p.anchor_tag] = p.id
    pano_ids = {p.id for p in panoramas}

    ordered = sorted(panoramas, key=lambda p: p.capture_index)
    hotspots: list[Hotspot] = []
    warnings: list[str] = []
    for p in ordered:
        best: dict[int, Hotspot] = {}
        for reading in readings_by_panorama.get(p.id, []):
            if isinstance(reading, TagReading):
                if not reading.ok:
                    continue
                bbox, wrapped, yaw, pitch = backproject_reading(reading, face_size, p.width, p.height)
                candidate = Hotspot(
                    panorama_id=p.id,
                    tag_number=reading.number,
                    equirect_bbox=bbox,
                    wrapped=wrapped,
                    yaw_deg=yaw,
                    pitch_deg=pitch,
                    target_panorama_id=anchors.get(reading.number),
                    confidence=reading.confidence,
                )
            else:
                k = int(reading["tag_number"])
                candidate = Hotspot(
                    panorama_id=p.id,
                    tag_number=k,
                    equirect_bbox=BBox(*reading["bbox"]),
                    wrapped=bool(reading.get("wrapped", False)),
                    yaw_deg=float(reading["yaw_deg"]),
                    pitch_deg=float(reading["pitch_deg"]),
                    target_panorama_id=anchors.get(k),
                    confidence=float(reading.get("confidence", 1.0)),
                )
            k = candidate.tag_number
            if k == p.anchor_tag:
                warnings.append(f"self_anchor: panorama {p.id} reads its own tag {k}")
                continue
            if k in best:
                warnings.append(f"duplicate_tag({k}): panorama {p.id}")
                if candidate.confidence <= best[k].confidence:
                    continue
            if candidate.target_panorama_id is None:
                warnings.append(f"dangling_tag({k}): panorama {p.id}")
            best[k] = candidate
        hotspots.extend(best[k] for k in sorted(best))

    # Connectivity of the undirected collapse, counting isolated panoramas.
    adjacency: dict[str, set[str]] = {pid: set() for pid in pano_ids}
    for h in hotspots:
        if h.target_panorama_id is not None:
            adjacency[h.panorama_id].add(h.target_panorama_id)
            adjacency[h.target_panorama_id].add(h.panorama_id)
    seen: set[str] = set()
    components = 0
    for pid in sorted(pano_ids):
        if pid in seen:
            continue
        components += 1
        stack = [pid]
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(adjacency[cur] - seen)
    if components > 1:
        warnings.append(f"graph_not_connected({components} components)")

    return TourGraph(property_id=property_id, panoramas=list(ordered), hotspots=hotspots, warnings=warnings)


def tour_to_dict(graph: TourGraph, config_hash: str | None = None) -> dict:
    out = {
        "version": TOUR_VERSION,
        "property_id": graph.property_id,
        "panoramas": [
            {
                "id": p.id,
                "file": p.file,
                "width": p.width,
                "height": p.height,
                "anchor_tag": p.anchor_tag,
            }
            for p in graph.panoramas
        ],
        "hotspots": [
            {
                "panorama_id": h.panorama_id,
                "tag_number": h.tag_number,
                "bbox": [round(v, 3) for v in h.equirect_bbox.as_list()],
                "wrapped": h.wrapped,
                "yaw_deg": round(h.yaw_deg, 4),
                "pitch_deg": round(h.pitch_deg, 4),
                "target_panorama_id": h.target_panorama_id,
                "confidence": round(h.confidence, 6),
            }
            for h in graph.hotspots
        ],
        "warnings": list(graph.warnings),
    }
    if config_hash is not None:
        out["config_hash"] = config_hash
    return out


def export_tour(graph: TourGraph, out, config_hash: str | None = None) -> Path:
    """Write tour JSON; field order and number formatting are deterministic."""
    out = Path(out)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(tour_to_dict(graph, config_hash), indent=2) + "\n")
    except OSError as e:
        raise IoError(f"cannot write {out}: {e}") from e
    return out


def load_tour(path) -> TourGraph:
    """Parse tour JSON back into a TourGraph.

    capture_index is not part of the wire schema; it is reconstructed
    from panorama order.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid tour JSON: {e}") from e
    if data.get("version") != TOUR_VERSION:
        raise ParseError(f"unsupported tour version {data.get('version')!r}")
    panoramas = [
        PanoramaRecord(
            id=p["id"],
            file=p["file"],
            width=int(p["width"]),
            height=int(p["height"]),
            capture_index=i + 1,
            anchor_tag=int(p["anchor_tag"]),
        )
        for i, p in enumerate(data["panoramas"])
    ]
    pano_ids = {p.id for p in panoramas}
    hotspots = []
    for h in data["hotspots"]:
        if h["panorama_id"] not in pano_ids:
            raise ParseError(f"hotspot references unknown panorama {h['panorama_id']!r}")
        if h["target_panorama_id"] is not None and h["target_panorama_id"] not in pano_ids:
            raise ParseError(f"hotspot target {h['target_panorama_id']!r} does not exist")
        hotspots.append(
            Hotspot(
                panorama_id=h["panorama_id"],
                tag_number=int(h["tag_number"]),
                equirect_bbox=BBox(*h["bbox"]),
                wrapped=bool(h["wrapped"]),
                yaw_deg=float(h["yaw_deg"]),
                pitch_deg=float(h["pitch_deg"]),
                target_panorama_id=h["target_panorama_id"],
                confidence=float(h["confidence"]),
            )
        )
    return TourGraph(
        property_id=data["property_id"],
        panoramas=panoramas,
        hotspots=hotspots,
        warnings=list(data.get("warnings", [])),
    )
