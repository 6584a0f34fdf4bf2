import json

import numpy as np
import pytest

from tagtour.detector import BBox, Detection
from tagtour.errors import InvalidProperty, ParseError
from tagtour.projection import face_point_to_equirect
from tagtour.recognizer import TagReading
from tagtour.tour_builder import (
    PanoramaRecord,
    backproject_reading,
    build_tour,
    export_tour,
    load_tour,
    tour_to_dict,
)

W, H, FS = 4096, 2048, 1024


def reading(face_id, bbox, number, confidence=0.9):
    det = Detection(face_id=face_id, bbox=bbox, confidence=confidence)
    return TagReading(
        detection=det,
        number=number,
        leading_digit=number // 10,
        trailing_digit=number % 10,
        confidence=confidence,
    )


def pano(idx, anchor=None, width=W, height=H):
    return PanoramaRecord(
        id=f"p{idx}",
        file=f"p{idx}.png",
        width=width,
        height=height,
        capture_index=idx,
        anchor_tag=anchor if anchor is not None else idx,
    )


def centered_bbox(cx, cy, side=64.0):
    return BBox(cx - side / 2, cy - side / 2, cx + side / 2, cy + side / 2)


def test_backproject_front_center():
    r = reading("front", centered_bbox((FS - 1) / 2, (FS - 1) / 2), 5)
    bbox, wrapped, yaw, pitch = backproject_reading(r, FS, W, H)
    assert not wrapped
    assert yaw == pytest.approx(0.0, abs=1e-9)
    assert pitch == pytest.approx(0.0, abs=1e-9)


def test_backproject_bottom_center_pitch():
    r = reading("bottom", centered_bbox((FS - 1) / 2, (FS - 1) / 2), 5)
    _, _, _, pitch = backproject_reading(r, FS, W, H)
    assert pitch == pytest.approx(-90.0, abs=0.01)


def test_backproject_contains_all_sample_points():
    rng = np.random.default_rng(3)
    for _ in range(50):
        face = ("front", "left", "bottom", "back")[rng.integers(0, 4)]
        x0 = float(rng.uniform(0, FS - 80))
        y0 = float(rng.uniform(0, FS - 80))
        b = BBox(x0, y0, x0 + 64, y0 + 64)
        r = reading(face, b, 7)
        bbox, wrapped, _, _ = backproject_reading(r, FS, W, H)
        xs = (b.x_min, (b.x_min + b.x_max) / 2, b.x_max)
        ys = (b.y_min, (b.y_min + b.y_max) / 2, b.y_max)
        for x in xs:
            for y in ys:
                if x == xs[1] and y == ys[1]:
                    continue
                px, py = face_point_to_equirect(face, x, y, FS, W, H)
                assert bbox.y_min - 1e-9 <= py <= bbox.y_max + 1e-9
                if wrapped:
                    assert px >= bbox.x_min - 1e-9 or px <= bbox.x_max + 1e-9
                else:
                    assert bbox.x_min - 1e-9 <= px <= bbox.x_max + 1e-9


def test_backproject_back_face_wraps():
    # A box straddling the seam (lon +-180) must use the wrapped encoding.
    r = reading("back", centered_bbox((FS - 1) / 2, (FS - 1) / 2, side=128), 9)
    bbox, wrapped, yaw, _ = backproject_reading(r, FS, W, H)
    assert wrapped
    assert bbox.x_min > bbox.x_max
    assert abs(yaw) == pytest.approx(180.0, abs=0.1)


def test_yaw_pitch_consistency_with_center():
    rng = np.random.default_rng(8)
    for _ in range(30):
        x0 = float(rng.uniform(0, FS - 100))
        y0 = float(rng.uniform(0, FS - 100))
        r = reading("right", BBox(x0, y0, x0 + 80, y0 + 80), 3)
        bbox, wrapped, yaw, pitch = backproject_reading(r, FS, W, H)
        if wrapped:
            continue
        cx = (bbox.x_min + bbox.x_max) / 2
        cy = (bbox.y_min + bbox.y_max) / 2
        assert (yaw / 360.0 + 0.5) * W == pytest.approx(cx, abs=0.5)
        assert (0.5 - pitch / 180.0) * H == pytest.approx(cy, abs=0.5)


def front_reading_for(number):
    return reading("front", centered_bbox(500, 500), number)


def test_minimal_two_pano_cycle():
    panos = [pano(1), pano(2)]
    graph = build_tour("prop", panos, {"p1": [front_reading_for(2)], "p2": [front_reading_for(1)]}, FS)
    assert len(graph.hotspots) == 2
    assert graph.warnings == []
    assert graph.undirected_edges() == {frozenset((1, 2))}
    targets = {h.panorama_id: h.target_panorama_id for h in graph.hotspots}
    assert targets == {"p1": "p2", "p2": "p1"}


def test_dangling_tag_warning():
    panos = [pano(1), pano(2)]
    graph = build_tour("prop", panos, {"p1": [front_reading_for(2), front_reading_for(7)]}, FS)
    dangling = [h for h in graph.hotspots if h.target_panorama_id is None]
    assert len(dangling) == 1 and dangling[0].tag_number == 7
    assert any(w.startswith("dangling_tag(7)") for w in graph.warnings)


def test_self_anchor_dropped_with_warning():
    panos = [pano(1), pano(2)]
    graph = build_tour("prop", panos, {"p1": [front_reading_for(1), front_reading_for(2)]}, FS)
    assert all(h.tag_number != 1 for h in graph.hotspots if h.panorama_id == "p1")
    assert any(w.startswith("self_anchor") for w in graph.warnings)


def test_duplicate_keeps_highest_confidence():
    panos = [pano(1), pano(2)]
    weak = reading("front", centered_bbox(300, 300), 2, confidence=0.4)
    strong = reading("front", centered_bbox(700, 700), 2, confidence=0.95)
    graph = build_tour("prop", panos, {"p1": [weak, strong]}, FS)
    spots = [h for h in graph.hotspots if h.panorama_id == "p1"]
    assert len(spots) == 1
    assert spots[0].confidence == 0.95
    assert any(w.startswith("duplicate_tag(2)") for w in graph.warnings)


def test_duplicate_anchor_rejected():
    with pytest.raises(InvalidProperty):
        build_tour("prop", [pano(1, anchor=5), pano(2, anchor=5)], {}, FS)


def test_empty_property_rejected():
    with pytest.raises(InvalidProperty):
        build_tour("prop", [], {}, FS)


def test_failed_readings_ignored():
    failed = TagReading(
        detection=Detection("front", centered_bbox(100, 100), 0.5),
        number=None,
        leading_digit=None,
        trailing_digit=None,
        confidence=0.0,
        failure_reason="no_circle",
    )
    graph = build_tour("prop", [pano(1), pano(2)], {"p1": [failed, front_reading_for(2)]}, FS)
    assert len([h for h in graph.hotspots if h.panorama_id == "p1"]) == 1


def test_disconnected_graph_warning():
    panos = [pano(i) for i in (1, 2, 3, 4)]
    readings = {"p1": [front_reading_for(2)], "p3": [front_reading_for(4)]}
    graph = build_tour("prop", panos, readings, FS)
    assert any(w.startswith("graph_not_connected(2") for w in graph.warnings)


FLOOR_PLAN_EDGES = {(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 7), (3, 6)}


def test_floor_plan_adjacency_reproduced_exactly():
    # Readings encode a fixed 8-room floor plan; the undirected collapse
    # of the built tour must equal that edge set exactly.
    panos = [pano(i) for i in range(1, 9)]
    readings = {f"p{i}": [] for i in range(1, 9)}
    for a, b in FLOOR_PLAN_EDGES:
        readings[f"p{a}"].append(front_reading_for(b))
        readings[f"p{b}"].append(front_reading_for(a))
    graph = build_tour("fig_prop", panos, readings, FS)
    assert graph.undirected_edges() == {frozenset(e) for e in FLOOR_PLAN_EDGES}
    assert not any(w.startswith("graph_not_connected") for w in graph.warnings)


def test_export_parse_round_trip(tmp_path):
    panos = [pano(1), pano(2)]
    graph = build_tour("prop", panos, {"p1": [front_reading_for(2)], "p2": [front_reading_for(1)]}, FS)
    path = export_tour(graph, tmp_path / "tour.json")
    loaded = load_tour(path)
    assert loaded.property_id == graph.property_id
    assert [p.id for p in loaded.panoramas] == [p.id for p in graph.panoramas]
    assert [p.capture_index for p in loaded.panoramas] == [1, 2]
    assert len(loaded.hotspots) == len(graph.hotspots)
    for a, b in zip(loaded.hotspots, graph.hotspots):
        assert a.panorama_id == b.panorama_id
        assert a.tag_number == b.tag_number
        assert a.target_panorama_id == b.target_panorama_id
        assert a.yaw_deg == pytest.approx(b.yaw_deg, abs=1e-4)
    # a second export of the loaded graph is byte-identical
    path2 = export_tour(loaded, tmp_path / "tour2.json")
    assert path.read_bytes() == path2.read_bytes()


def test_export_deterministic_bytes(tmp_path):
    panos = [pano(1), pano(2)]
    readings = {"p1": [front_reading_for(2)], "p2": [front_reading_for(1)]}
    a = export_tour(build_tour("prop", panos, readings, FS), tmp_path / "a.json")
    b = export_tour(build_tour("prop", panos, readings, FS), tmp_path / "b.json")
    assert a.read_bytes() == b.read_bytes()


def test_export_empty_hotspots(tmp_path):
    graph = build_tour("prop", [pano(1)], {}, FS)
    path = export_tour(graph, tmp_path / "tour.json")
    data = json.loads(path.read_text())
    assert data["hotspots"] == []
    assert data["version"] == 1


def test_tour_schema_fields(tmp_path):
    graph = build_tour("prop", [pano(1), pano(2)], {"p1": [front_reading_for(2)]}, FS)
    data = tour_to_dict(graph, config_hash="abc123")
    assert set(data) == {"version", "property_id", "panoramas", "hotspots", "warnings", "config_hash"}
    assert set(data["panoramas"][0]) == {"id", "file", "width", "height", "anchor_tag"}
    assert set(data["hotspots"][0]) == {
        "panorama_id",
        "tag_number",
        "bbox",
        "wrapped",
        "yaw_deg",
        "pitch_deg",
        "target_panorama_id",
        "confidence",
    }


def test_load_rejects_broken_references(tmp_path):
    graph = build_tour("prop", [pano(1), pano(2)], {"p1": [front_reading_for(2)]}, FS)
    data = tour_to_dict(graph)
    data["hotspots"][0]["panorama_id"] = "ghost"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ParseError):
        load_tour(path)
