import json
import hashlib
from pathlib import Path

import numpy as np
import pytest

from tagtour.detector import BBox, palette_mask
from tagtour.errors import InvalidScene
from tagtour.metrics import iou
from tagtour.projection import face_point_to_equirect
from tagtour.synth import (
    DatasetConfig,
    NoiseSpec,
    SceneSpec,
    TagPlacement,
    generate_dataset,
    render_scene,
)

SCENE_KW = dict(width=1024, height=512)
FACE = 256


def one_tag_scene(number=7, x=0.0, z=1.0, rot=0.0, **kw):
    spec = SceneSpec(tags=(TagPlacement(number=number, floor_x_m=x, floor_z_m=z, rotation_deg=rot),), **SCENE_KW, **kw)
    return render_scene(spec, image_id="t", face_size=FACE)


def test_tag_under_camera_rejected():
    spec = SceneSpec(tags=(TagPlacement(number=1, floor_x_m=0.0, floor_z_m=0.0),), **SCENE_KW)
    with pytest.raises(InvalidScene):
        render_scene(spec)


def test_overlapping_tags_rejected():
    tags = (
        TagPlacement(number=1, floor_x_m=0.0, floor_z_m=1.0),
        TagPlacement(number=2, floor_x_m=0.05, floor_z_m=1.05),
    )
    with pytest.raises(InvalidScene):
        render_scene(SceneSpec(tags=tags, **SCENE_KW))


def test_front_floor_tag_visible_and_stretched():
    # Tag ahead of the camera on the floor: visible in the bottom-center
    # region of the panorama, and its near edge spans more columns than
    # its far edge (the equirectangular floor stretch).
    eq, labels = one_tag_scene(number=7, z=1.0)
    mask = palette_mask(eq)
    ys, xs = np.nonzero(mask)
    assert ys.size > 0
    assert ys.min() > SCENE_KW["height"] // 2  # bottom half only
    cx = xs.mean()
    assert abs(cx - SCENE_KW["width"] / 2) < SCENE_KW["width"] * 0.05  # front region

    rows = np.unique(ys)
    far_row, near_row = rows.min(), rows.max()
    far_width = np.sum(ys == far_row)
    near_width = np.sum(ys == near_row)
    assert near_width > far_width


def test_labels_contain_analytic_corner_projections():
    h = 1.5
    for rot in (0.0, 30.0, 77.0):
        eq, labels = one_tag_scene(number=12, x=0.4, z=1.1, rot=rot)
        assert len(labels) == 1
        lab = labels[0]
        half = 0.1524 / 2
        corners = np.array([[-half, -half], [half, -half], [half, half], [-half, half]])
        c, s = np.cos(np.radians(rot)), np.sin(np.radians(rot))
        world = corners @ np.array([[c, s], [-s, c]]) + np.array([0.4, 1.1])
        for wx, wz in world:
            d = np.array([wx, -h, wz])
            d = d / np.linalg.norm(d)
            fid, u, v = __import__("tagtour.projection", fromlist=["direction_to_face_uv"]).direction_to_face_uv(d)
            assert fid == lab.face_id
            x_px, y_px = u * FACE, v * FACE
            assert lab.bbox.x_min - 0.51 <= x_px <= lab.bbox.x_max + 0.51
            assert lab.bbox.y_min - 0.51 <= y_px <= lab.bbox.y_max + 0.51


def test_label_bbox_overlaps_palette_pixels():
    # >= 95% of palette-colored pixels on a labeled face lie inside a label.
    from tagtour.projection import equirect_to_cubemap

    eq, labels = one_tag_scene(number=9, x=-0.8, z=0.9, rot=45.0)
    faces = equirect_to_cubemap(eq, FACE)
    for lab in labels:
        mask = palette_mask(faces[lab.face_id].image)
        ys, xs = np.nonzero(mask)
        inside = (
            (xs + 0.5 >= lab.bbox.x_min)
            & (xs + 0.5 <= lab.bbox.x_max)
            & (ys + 0.5 >= lab.bbox.y_min)
            & (ys + 0.5 <= lab.bbox.y_max)
        )
        assert inside.mean() >= 0.95


def test_scale_law():
    # Doubling side_m roughly doubles the projected side for tags >= 1 m out.
    def measured_side(side_m):
        spec = SceneSpec(
            tags=(TagPlacement(number=5, floor_x_m=0.3, floor_z_m=2.0, side_m=side_m),), **SCENE_KW
        )
        _, labels = render_scene(spec, image_id="s", face_size=FACE)
        assert len(labels) == 1
        return np.sqrt(labels[0].visible_area_px)

    small, big = measured_side(0.1), measured_side(0.2)
    assert big / small == pytest.approx(2.0, rel=0.10)


def test_geometric_soundness_of_labels():
    # The face bbox, mapped back to equirect space, must overlap the
    # tag's equirect footprint.
    eq, labels = one_tag_scene(number=3, x=1.2, z=0.4, rot=10.0)
    (lab,) = labels
    b = lab.bbox
    pxs, pys = [], []
    for x, y in ((b.x_min, b.y_min), (b.x_max, b.y_min), (b.x_max, b.y_max), (b.x_min, b.y_max)):
        px, py = face_point_to_equirect(lab.face_id, x, y, FACE, SCENE_KW["width"], SCENE_KW["height"])
        pxs.append(float(px))
        pys.append(float(py))
    back = BBox(min(pxs), min(pys), max(pxs), max(pys))
    eqb = lab.equirect_bbox
    assert not lab.wrapped
    assert iou(back, eqb) > 0.3


def test_render_deterministic():
    a, _ = one_tag_scene(number=4, noise=NoiseSpec(gaussian_sigma=0.03, blur_sigma=0.8), seed=77)
    b, _ = one_tag_scene(number=4, noise=NoiseSpec(gaussian_sigma=0.03, blur_sigma=0.8), seed=77)
    assert a.tobytes() == b.tobytes()


def test_dataset_counts_and_layout(small_clean_dataset):
    root = Path(small_clean_dataset)
    man = json.loads((root / "gt.json").read_text())
    assert len(man["properties"]) == 2
    panos = list(root.glob("prop_*/pano_*.png"))
    faces = list(root.glob("prop_*/faces/*.png"))
    assert len(panos) == 14
    assert len(faces) == 84
    for prop in man["properties"]:
        per_pano = {}
        for lab in prop["labels"]:
            per_pano.setdefault(lab["image"], set()).add(lab["tag_number"])
        for pano in prop["panoramas"]:
            assert len(per_pano.get(pano["id"], set())) >= 3
            assert pano["anchor_tag"] not in per_pano.get(pano["id"], set())


def test_dataset_yolo_labels_match_manifest(small_clean_dataset):
    root = Path(small_clean_dataset)
    man = json.loads((root / "gt.json").read_text())
    fs = man["face_size"]
    prop = man["properties"][0]
    by_face = {}
    for lab in prop["labels"]:
        by_face.setdefault((lab["image"], lab["face"]), []).append(lab)
    checked = 0
    for (image, face), labs in by_face.items():
        pano_stem = image.split("_pano_")[1]
        path = root / prop["id"] / "labels" / f"pano_{pano_stem}_{face}.txt"
        lines = path.read_text().strip().splitlines()
        assert len(lines) == len(labs)
        for line in lines:
            cls, cx, cy, w, h = line.split()
            assert 0 <= int(cls) <= 19
            for val in (cx, cy, w, h):
                assert 0.0 <= float(val) <= 1.0
            match = [
                lab
                for lab in labs
                if lab["tag_number"] - 1 == int(cls)
                and abs((lab["bbox"][0] + lab["bbox"][2]) / 2 / fs - float(cx)) < 1e-4
            ]
            assert match
            checked += 1
    assert checked > 0


def test_dataset_determinism(tmp_path):
    cfg = DatasetConfig(n_properties=1, panos_per_property=(7, 7), width=1024, height=512, face_size=256, seed=3)
    a = generate_dataset(cfg, tmp_path / "a")
    b = generate_dataset(cfg, tmp_path / "b")

    def digest(root):
        hasher = hashlib.sha256()
        for p in sorted(Path(root).rglob("*")):
            if p.is_file():
                hasher.update(p.relative_to(root).as_posix().encode())
                hasher.update(p.read_bytes())
        return hasher.hexdigest()

    assert digest(a) == digest(b)


def test_background_kinds_render():
    from tagtour.detector import detect_tags
    from tagtour.synth import Background

    for kind in ("solid", "gradient", "noise"):
        spec = SceneSpec(background=Background(kind=kind), **SCENE_KW, seed=5)
        eq, labels = render_scene(spec, face_size=FACE)
        assert eq.shape == (512, 1024, 3)
        assert labels == []
        # backgrounds alone must never produce detections
        assert detect_tags(eq) == []
        if kind != "noise":
            assert palette_mask(eq).sum() == 0


def test_background_panorama_file(tmp_path):
    from tagtour.image_io import save_image
    from tagtour.synth import Background

    base, _ = one_tag_scene(number=2, x=0.5, z=1.2)
    save_image(tmp_path / "bg.png", base)
    spec = SceneSpec(
        background=Background(kind="file", file=str(tmp_path / "bg.png")),
        tags=(TagPlacement(number=8, floor_x_m=-0.7, floor_z_m=-1.0),),
        **SCENE_KW,
    )
    eq, labels = render_scene(spec, image_id="f", face_size=FACE)
    assert {lab.tag_number for lab in labels} == {8}
    # the tag baked into the background panorama is still present as pixels
    assert palette_mask(eq).sum() > 0

    wrong = SceneSpec(background=Background(kind="file", file=str(tmp_path / "bg.png")), width=512, height=256)
    with pytest.raises(InvalidScene):
        render_scene(wrong)
