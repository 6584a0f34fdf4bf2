"""Synthetic panoramas with floor tags and exact ground-truth labels.

The camera model is a full sphere at the origin; tags are squares lying
on the floor plane y = -camera_height.  Backgrounds, tag placement,
distractors, and noise are all driven by seeded generators so datasets
are byte-identical per seed.  Background tints are chosen outside the
detector's palette bands so clean scenes contain no spurious palette
pixels.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import ndimage
from shapely.geometry import LineString, Polygon, box as shapely_box
from shapely.ops import unary_union

from .color_scheme import MAX_TAG_NUMBER, MIN_TAG_NUMBER, render_tag
from .colorspace import hsv_to_rgb8
from .detector import BBox
from .errors import InvalidScene, IoError
from .image_io import load_image, save_image
from .projection import (
    FACE_IDS,
    equirect_pixel_directions,
    direction_to_equirect,
    direction_to_face_uv,
    equirect_to_cubemap,
    wrap_min_cover,
    write_cubemap,
)

DEFAULT_TAG_SIDE_M = 0.1524  # printed 6 inch tag


@dataclass(frozen=True)
class TagPlacement:
    number: int
    floor_x_m: float
    floor_z_m: float
    rotation_deg: float = 0.0
    side_m: float = DEFAULT_TAG_SIDE_M

    def footprint(self) -> Polygon:
        half = self.side_m / 2.0
        corners = np.array([[-half, -half], [half, -half], [half, half], [-half, half]])
        c, s = math.cos(math.radians(self.rotation_deg)), math.sin(math.radians(self.rotation_deg))
        rot = corners @ np.array([[c, s], [-s, c]])
        return Polygon(rot + np.array([self.floor_x_m, self.floor_z_m]))


@dataclass(frozen=True)
class NoiseSpec:
    gaussian_sigma: float = 0.0  # additive noise stddev, fraction of full scale
    brightness_delta: float = 0.0  # [-0.3, 0.3], fraction of full scale
    blur_sigma: float = 0.0  # px


@dataclass(frozen=True)
class Background:
    """Scene backdrop.

    Default tints sit at hue ~153 (the widest gap between palette hue
    bands) with chroma >= 0.2, so background pixels stay outside the
    detector mask even under per-pixel noise and global brightness
    shifts: additive brightness does not change chroma, and at this
    chroma the hue jitter of sigma ~0.04 noise stays well inside the
    27-degree guard band.
    """

    kind: str = "gradient"  # solid | gradient | noise | file
    rgb: tuple[int, int, int] = (84, 158, 121)
    top_rgb: tuple[int, int, int] = (110, 204, 157)
    bottom_rgb: tuple[int, int, int] = (62, 122, 92)
    file: str | None = None
    noise_amp: float = 12.0


@dataclass(frozen=True)
class Distractor:
    """A colored wall rectangle, in view angles."""

    lon_deg: float
    lat_deg: float
    width_deg: float
    height_deg: float
    rgb: tuple[int, int, int]


@dataclass(frozen=True)
class SceneSpec:
    camera_height_m: float = 1.5
    width: int = 4096
    height: int = 2048
    background: Background = field(default_factory=Background)
    tags: tuple[TagPlacement, ...] = ()
    distractors: tuple[Distractor, ...] = ()
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 0


@dataclass(frozen=True)
class GroundTruthLabel:
    image: str
    face_id: str
    tag_number: int
    bbox: BBox  # face pixel coordinates
    equirect_bbox: BBox  # x_min > x_max when wrapping across px = 0
    wrapped: bool
    visible_area_px: float


def _validate_scene(spec: SceneSpec) -> None:
    if spec.camera_height_m <= 0:
        raise InvalidScene("camera_height_m must be positive")
    for t in spec.tags:
        if not MIN_TAG_NUMBER <= t.number <= MAX_TAG_NUMBER:
            raise InvalidScene(f"tag number {t.number} out of range")
        if t.side_m <= 0:
            raise InvalidScene("tag side_m must be positive")
        if math.hypot(t.floor_x_m, t.floor_z_m) < 1e-9:
            raise InvalidScene(f"tag {t.number} sits at the camera nadir (0, 0)")
    for i, a in enumerate(spec.tags):
        for b in spec.tags[i + 1 :]:
            if math.hypot(a.floor_x_m - b.floor_x_m, a.floor_z_m - b.floor_z_m) < 0.3:
                raise InvalidScene(f"tags {a.number} and {b.number} are closer than 0.3 m")
            if a.footprint().intersects(b.footprint()):
                raise InvalidScene(f"tags {a.number} and {b.number} overlap")


def _render_background(spec: SceneSpec, rng: np.random.Generator) -> np.ndarray:
    bg = spec.background
    h, w = spec.height, spec.width
    if bg.kind == "solid":
        return np.full((h, w, 3), bg.rgb, dtype=np.float64)
    if bg.kind == "gradient":
        t = (np.arange(h, dtype=np.float64) / max(h - 1, 1))[:, None, None]
        top = np.asarray(bg.top_rgb, dtype=np.float64)
        bot = np.asarray(bg.bottom_rgb, dtype=np.float64)
        row = top * (1.0 - t) + bot * t
        return np.broadcast_to(row, (h, w, 3)).copy()
    if bg.kind == "noise":
        # Luminance-only texture: the same offset on all channels keeps the
        # backdrop hue fixed, so the field can be strong without wandering
        # into any palette band.
        cell = 32
        coarse = rng.normal(0.0, bg.noise_amp, size=(h // cell + 1, w // cell + 1))
        grid = np.repeat(np.repeat(coarse, cell, axis=0), cell, axis=1)[:h, :w]
        grid = ndimage.gaussian_filter(grid, sigma=8)
        return np.asarray(bg.rgb, dtype=np.float64) + grid[:, :, None]
    if bg.kind == "file":
        img = load_image(bg.file)
        if img.shape[:2] != (h, w):
            raise InvalidScene(f"background panorama is {img.shape[1]}x{img.shape[0]}, scene wants {w}x{h}")
        return img.astype(np.float64)
    raise InvalidScene(f"unknown background kind {bg.kind!r}")


def _paint_distractors(canvas: np.ndarray, distractors, width: int, height: int) -> None:
    for d in distractors:
        px_c = ((d.lon_deg / 360.0 + 0.5) * width) % width
        py_c = (0.5 - d.lat_deg / 180.0) * height
        half_w = d.width_deg / 360.0 * width / 2.0
        half_h = d.height_deg / 180.0 * height / 2.0
        y0 = max(int(round(py_c - half_h)), 0)
        y1 = min(int(round(py_c + half_h)), height)
        x0 = int(round(px_c - half_w))
        x1 = int(round(px_c + half_w))
        cols = np.arange(x0, x1) % width
        if y1 > y0 and len(cols):
            canvas[y0:y1, cols] = d.rgb


def _bilinear_clamp_f(img: np.ndarray, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    h, w = img.shape[:2]
    fx = np.clip(px - 0.5, 0.0, w - 1.0)
    fy = np.clip(py - 0.5, 0.0, h - 1.0)
    x0 = np.floor(fx).astype(np.int64)
    y0 = np.floor(fy).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    tx = (fx - x0)[..., None]
    ty = (fy - y0)[..., None]
    p00 = img[y0, x0].astype(np.float64)
    p10 = img[y0, x1].astype(np.float64)
    p01 = img[y1, x0].astype(np.float64)
    p11 = img[y1, x1].astype(np.float64)
    return (p00 * (1 - tx) + p10 * tx) * (1 - ty) + (p01 * (1 - tx) + p11 * tx) * ty


def _tag_boundary_points(t: TagPlacement, n: int = 64) -> np.ndarray:
    """n points along the square outline in world floor coordinates (x, z)."""
    per_side = n // 4
    s = np.linspace(-0.5, 0.5, per_side, endpoint=False)
    pts = np.concatenate(
        [
            np.stack([s, np.full(per_side, -0.5)], axis=1),
            np.stack([np.full(per_side, 0.5), s], axis=1),
            np.stack([-s, np.full(per_side, 0.5)], axis=1),
            np.stack([np.full(per_side, -0.5), -s], axis=1),
        ]
    ) * t.side_m
    c, si = math.cos(math.radians(t.rotation_deg)), math.sin(math.radians(t.rotation_deg))
    rot = pts @ np.array([[c, si], [-si, c]])
    return rot + np.array([t.floor_x_m, t.floor_z_m])


_FACE_AXIS_SIGN = {
    "front": (2, 1.0),
    "back": (2, -1.0),
    "left": (0, -1.0),
    "right": (0, 1.0),
    "top": (1, 1.0),
    "bottom": (1, -1.0),
}


def _gnomonic_uv(face_id: str, dirs: np.ndarray):
    """Project directions onto one face's plane; u, v may leave [0, 1]."""
    axis, sign = _FACE_AXIS_SIGN[face_id]
    denom = dirs[:, axis] * sign
    s = dirs / denom[:, None]
    sx, sy, sz = s[:, 0], s[:, 1], s[:, 2]
    if face_id == "front":
        return (sx + 1) / 2, (1 - sy) / 2
    if face_id == "back":
        return (1 - sx) / 2, (1 - sy) / 2
    if face_id == "left":
        return (sz + 1) / 2, (1 - sy) / 2
    if face_id == "right":
        return (1 - sz) / 2, (1 - sy) / 2
    if face_id == "top":
        return (sx + 1) / 2, (sz + 1) / 2
    return (sx + 1) / 2, (1 - sz) / 2  # bottom


def _labels_for_tag(t: TagPlacement, image_id: str, spec: SceneSpec, face_size: int) -> list[GroundTruthLabel]:
    pts = _tag_boundary_points(t)
    dirs = np.concatenate([pts[:, :1], np.full((len(pts), 1), -spec.camera_height_m), pts[:, 1:]], axis=1)
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    idx, _, _ = direction_to_face_uv(dirs)

    px, py = direction_to_equirect(dirs, spec.width, spec.height)
    ex_min, ex_max, wrapped = wrap_min_cover(px.tolist(), spec.width)
    eq_bbox = BBox(ex_min, float(py.min()), ex_max, float(py.max()))

    labels = []
    for fi, face_id in enumerate(FACE_IDS):
        hits = int(np.sum(idx == fi))
        if hits == 0:
            continue
        axis, sign = _FACE_AXIS_SIGN[face_id]
        if np.any(dirs[:, axis] * sign <= 0.05):
            # Tag wraps too far around for a stable gnomonic footprint on
            # this face; fall back to the bbox of the points that hit it.
            m = idx == fi
            _, u, v = direction_to_face_uv(dirs[m])
            poly = shapely_box(u.min() * face_size, v.min() * face_size, u.max() * face_size, v.max() * face_size)
        else:
            u, v = _gnomonic_uv(face_id, dirs)
            poly = Polygon(np.stack([u * face_size, v * face_size], axis=1))
            if not poly.is_valid:
                poly = poly.buffer(0)
        clipped = poly.intersection(shapely_box(0, 0, face_size, face_size))
        if clipped.is_empty:
            continue
        area = float(clipped.area)
        if hits < 8 and area < 16 * 16:
            continue
        x0, y0, x1, y1 = clipped.bounds
        if area < 1.0 or (x1 - x0) < 1.0 or (y1 - y0) < 1.0:
            # Zero-width sliver from a footprint edge exactly on a face
            # seam; labels must have a non-degenerate box.
            continue
        labels.append(
            GroundTruthLabel(
                image=image_id,
                face_id=face_id,
                tag_number=t.number,
                bbox=BBox(x0, y0, x1, y1),
                equirect_bbox=eq_bbox,
                wrapped=wrapped,
                visible_area_px=area,
            )
        )
    return labels


def render_scene(spec: SceneSpec, image_id: str = "pano", face_size: int = 1024):
    """Render the panorama and compute its ground-truth labels.

    Returns (equirect uint8 image, list of GroundTruthLabel).  Labels
    describe cube faces of the given face_size.
    """
    _validate_scene(spec)
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    h, w = spec.height, spec.width
    canvas = _render_background(spec, rng)
    _paint_distractors(canvas, spec.distractors, w, h)

    dirs = equirect_pixel_directions(w, h)
    dy = dirs[..., 1]
    below = dy < 0
    t_hit = np.where(below, -spec.camera_height_m / np.where(below, dy, -1.0), 0.0)
    floor_x = t_hit * dirs[..., 0]
    floor_z = t_hit * dirs[..., 2]

    for tag in spec.tags:
        art = render_tag(tag.number, side_px=256)
        c, s = math.cos(math.radians(tag.rotation_deg)), math.sin(math.radians(tag.rotation_deg))
        rel_x = floor_x - tag.floor_x_m
        rel_z = floor_z - tag.floor_z_m
        local_x = (c * rel_x - s * rel_z) / tag.side_m
        local_z = (s * rel_x + c * rel_z) / tag.side_m
        inside = below & (np.abs(local_x) <= 0.5) & (np.abs(local_z) <= 0.5)
        if not np.any(inside):
            continue
        side_px = art.raster.shape[0]
        u_px = (local_x[inside] + 0.5) * side_px
        v_px = (local_z[inside] + 0.5) * side_px
        canvas[inside] = _bilinear_clamp_f(art.raster, u_px, v_px)

    noise = spec.noise
    if noise.brightness_delta:
        canvas = canvas + noise.brightness_delta * 255.0
    if noise.blur_sigma > 0:
        canvas = ndimage.gaussian_filter(canvas, sigma=(noise.blur_sigma, noise.blur_sigma, 0))
    if noise.gaussian_sigma > 0:
        canvas = canvas + rng.normal(0.0, noise.gaussian_sigma * 255.0, size=canvas.shape)
    equirect = np.clip(np.rint(canvas), 0, 255).astype(np.uint8)

    labels = []
    for tag in spec.tags:
        labels.extend(_labels_for_tag(tag, image_id, spec, face_size))
    return equirect, labels


# ---------------------------------------------------------------------------
# Dataset generation


@dataclass(frozen=True)
class DistractorConfig:
    """Palette-colored wall rectangles that occasionally fool the detector.

    Sizes straddle the detector's minimum component area so most painted
    distractors stay sub-threshold and only a minority produce false
    positives, mirroring sporadic colorful-artifact failures.
    """

    per_pano_probability: float = 0.0
    max_per_pano: int = 1
    size_deg_range: tuple[float, float] = (0.8, 2.2)
    lat_deg_range: tuple[float, float] = (5.0, 45.0)


@dataclass(frozen=True)
class DatasetConfig:
    n_properties: int = 2
    panos_per_property: tuple[int, int] = (7, 8)
    tags_per_pano: tuple[int, int] = (3, 4)  # target adjacency degree range
    width: int = 2048
    height: int = 1024
    face_size: int = 512
    camera_height_m: float = 1.5
    tag_side_m: float = DEFAULT_TAG_SIDE_M
    distance_range_m: tuple[float, float] = (0.8, 1.7)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    distractors: DistractorConfig = field(default_factory=DistractorConfig)
    seed: int = 0

    def config_hash(self) -> str:
        blob = json.dumps(
            {
                "n_properties": self.n_properties,
                "panos_per_property": list(self.panos_per_property),
                "tags_per_pano": list(self.tags_per_pano),
                "width": self.width,
                "height": self.height,
                "face_size": self.face_size,
                "camera_height_m": self.camera_height_m,
                "tag_side_m": self.tag_side_m,
                "distance_range_m": list(self.distance_range_m),
                "noise": [self.noise.gaussian_sigma, self.noise.brightness_delta, self.noise.blur_sigma],
                "distractors": [
                    self.distractors.per_pano_probability,
                    self.distractors.max_per_pano,
                    list(self.distractors.size_deg_range),
                    list(self.distractors.lat_deg_range),
                ],
                "seed": self.seed,
            },
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _ring_with_chords(n: int, degree_range: tuple[int, int], rng: np.random.Generator) -> set[frozenset]:
    """Connected adjacency over nodes 1..n: a ring plus random chords."""
    edges = {frozenset((i, i % n + 1)) for i in range(1, n + 1)}
    deg = {i: 2 for i in range(1, n + 1)}
    want_min = min(degree_range[0], n - 1)
    want_max = max(want_min, min(degree_range[1], n - 1))
    candidates = [
        frozenset((a, b)) for a in range(1, n + 1) for b in range(a + 1, n + 1) if frozenset((a, b)) not in edges
    ]
    rng.shuffle(candidates)
    for relax in (False, True):
        for e in candidates:
            if all(d >= want_min for d in deg.values()):
                break
            a, b = tuple(e)
            if e in edges:
                continue
            if deg[a] >= want_max and deg[b] >= want_max and not relax:
                continue
            if deg[a] < want_min or deg[b] < want_min:
                edges.add(e)
                deg[a] += 1
                deg[b] += 1
    return edges


def _floor_seams(camera_height: float) -> LineString:
    h = camera_height
    reach = 1000.0
    square = LineString([(-h, -h), (h, -h), (h, h), (-h, h), (-h, -h)])
    diagonals = [
        LineString([(h, h), (reach, reach)]),
        LineString([(-h, h), (-reach, reach)]),
        LineString([(h, -h), (reach, -reach)]),
        LineString([(-h, -h), (-reach, -reach)]),
    ]
    return unary_union([square] + diagonals)


def _place_tags(
    numbers: list[int],
    cfg: DatasetConfig,
    rng: np.random.Generator,
) -> tuple[TagPlacement, ...]:
    """One placement per number: well-separated angles, seam-free footprints."""
    seams = _floor_seams(cfg.camera_height_m)
    placements: list[TagPlacement] = []
    k = len(numbers)
    base = rng.uniform(0.0, 360.0)
    for j, number in enumerate(numbers):
        placed = None
        for attempt in range(200):
            jitter = rng.uniform(-0.3, 0.3) * (360.0 / k)
            bearing = base + j * 360.0 / k + jitter
            angle = math.radians(bearing)
            r = rng.uniform(*cfg.distance_range_m)
            x, z = r * math.sin(angle), r * math.cos(angle)
            # Tags read best when their split boundary lands near a face
            # axis: square to the world grid seen from above (bottom
            # face), square to the line of sight on the side faces.  Any
            # quarter-turn is equivalent to the classifier.
            base_rot = 0.0 if r <= cfg.camera_height_m else bearing
            rotation = base_rot + 90.0 * int(rng.integers(0, 4)) + rng.uniform(-15.0, 15.0)
            cand = TagPlacement(
                number=number,
                floor_x_m=x,
                floor_z_m=z,
                rotation_deg=rotation % 360.0,
                side_m=cfg.tag_side_m,
            )
            foot = cand.footprint().buffer(0.02)
            if foot.intersects(seams):
                continue
            if any(
                math.hypot(cand.floor_x_m - p.floor_x_m, cand.floor_z_m - p.floor_z_m) < 0.35
                for p in placements
            ):
                continue
            placed = cand
            break
        if placed is None:
            raise InvalidScene(f"could not place tag {number} after 200 attempts")
        placements.append(placed)
    return tuple(placements)


def _sample_distractors(cfg: DatasetConfig, rng: np.random.Generator) -> tuple[Distractor, ...]:
    from .color_scheme import palette

    dc = cfg.distractors
    if rng.uniform() >= dc.per_pano_probability:
        return ()
    count = int(rng.integers(1, dc.max_per_pano + 1))
    out = []
    for _ in range(count):
        entry = palette()[int(rng.integers(0, 10))]
        out.append(
            Distractor(
                lon_deg=float(rng.uniform(-180.0, 180.0)),
                lat_deg=float(rng.uniform(*dc.lat_deg_range)),
                width_deg=float(rng.uniform(*dc.size_deg_range)),
                height_deg=float(rng.uniform(*dc.size_deg_range)),
                rgb=hsv_to_rgb8(entry.color.h, entry.color.s, entry.color.v),
            )
        )
    return tuple(out)


def _pano_background(rng: np.random.Generator) -> Background:
    # Hue near 153 deg sits in the widest gap between palette hue bands;
    # saturation >= 0.42 keeps chroma (and therefore hue stability under
    # noise) high enough down to the darkest rows.
    hue = float(rng.uniform(147.0, 159.0))
    sat = float(rng.uniform(0.42, 0.52))
    top = hsv_to_rgb8(hue, sat, float(rng.uniform(0.72, 0.82)))
    # Floor value stays >= 0.52 so that even a -0.15 brightness shift
    # cannot push noisy background pixels under the dark threshold that
    # localizes tag circles.
    bottom = hsv_to_rgb8(hue, sat + 0.02, float(rng.uniform(0.52, 0.62)))
    return Background(kind="gradient", top_rgb=top, bottom_rgb=bottom)


def generate_dataset(cfg: DatasetConfig, out_dir) -> Path:
    """Write a full synthetic dataset and its gt.json manifest.

    Layout: <out>/<prop>/<pano>.png, <out>/<prop>/faces/<pano>_<face>.png,
    <out>/<prop>/labels/<pano>_<face>.txt (YOLO, class = tag_number - 1),
    <out>/gt.json.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoError(f"cannot create {out_dir}: {e}") from e

    manifest_properties = []
    for prop_idx in range(1, cfg.n_properties + 1):
        prop_id = f"prop_{prop_idx:02d}"
        prop_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, prop_idx]))
        n_panos = int(prop_rng.integers(cfg.panos_per_property[0], cfg.panos_per_property[1] + 1))
        edges = _ring_with_chords(n_panos, cfg.tags_per_pano, prop_rng)
        neighbors = {i: sorted({next(iter(e - {i})) for e in edges if i in e}) for i in range(1, n_panos + 1)}

        panoramas = []
        labels_all = []
        for pano_idx in range(1, n_panos + 1):
            pano_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, prop_idx, pano_idx]))
            pano_id = f"{prop_id}_pano_{pano_idx:02d}"
            placements = _place_tags(neighbors[pano_idx], cfg, pano_rng)
            brightness = (
                float(pano_rng.uniform(-cfg.noise.brightness_delta, cfg.noise.brightness_delta))
                if cfg.noise.brightness_delta
                else 0.0
            )
            spec = SceneSpec(
                camera_height_m=cfg.camera_height_m,
                width=cfg.width,
                height=cfg.height,
                background=_pano_background(pano_rng),
                tags=placements,
                distractors=_sample_distractors(cfg, pano_rng),
                noise=replace(cfg.noise, brightness_delta=brightness),
                seed=int(pano_rng.integers(0, 2**31 - 1)),
            )
            equirect, labels = render_scene(spec, image_id=pano_id, face_size=cfg.face_size)
            rel_file = f"{prop_id}/pano_{pano_idx:02d}.png"
            save_image(out_dir / rel_file, equirect)
            faces = equirect_to_cubemap(equirect, cfg.face_size)
            write_cubemap(faces, out_dir / prop_id / "faces" / f"pano_{pano_idx:02d}")

            label_dir = out_dir / prop_id / "labels"
            label_dir.mkdir(parents=True, exist_ok=True)
            by_face: dict[str, list[GroundTruthLabel]] = {}
            for lab in labels:
                by_face.setdefault(lab.face_id, []).append(lab)
            for face_id in FACE_IDS:
                lines = []
                for lab in by_face.get(face_id, []):
                    b = lab.bbox
                    cx = (b.x_min + b.x_max) / 2.0 / cfg.face_size
                    cy = (b.y_min + b.y_max) / 2.0 / cfg.face_size
                    bw = b.width / cfg.face_size
                    bh = b.height / cfg.face_size
                    lines.append(f"{lab.tag_number - 1} {cx:.6f} {cy:.6f} {bw:.6f} {bh:.6f}")
                if lines:
                    (label_dir / f"pano_{pano_idx:02d}_{face_id}.txt").write_text("\n".join(lines) + "\n")
            labels_all.extend(labels)
            panoramas.append(
                {
                    "id": pano_id,
                    "file": rel_file,
                    "width": cfg.width,
                    "height": cfg.height,
                    "capture_index": pano_idx,
                    "anchor_tag": pano_idx,
                }
            )

        manifest_properties.append(
            {
                "id": prop_id,
                "panoramas": panoramas,
                "adjacency": sorted(sorted(e) for e in edges),
                "labels": [
                    {
                        "image": lab.image,
                        "face": lab.face_id,
                        "tag_number": lab.tag_number,
                        "bbox": [round(v, 3) for v in lab.bbox.as_list()],
                        "equirect_bbox": [round(v, 3) for v in lab.equirect_bbox.as_list()],
                        "wrapped": lab.wrapped,
                        "visible_area_px": round(lab.visible_area_px, 2),
                    }
                    for lab in labels_all
                ],
            }
        )

    manifest = {
        "version": 1,
        "seed": cfg.seed,
        "config_hash": cfg.config_hash(),
        "width": cfg.width,
        "height": cfg.height,
        "face_size": cfg.face_size,
        "properties": manifest_properties,
    }
    (out_dir / "gt.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return out_dir
