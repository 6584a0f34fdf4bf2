"""Equirectangular <-> cubemap conversion for whole images and points.

Conventions, fixed across the toolkit:

* Right-handed world frame: +X right, +Y up, +Z forward.
* Equirectangular (plate carree): lat = asin(y), lon = atan2(x, z);
  px = (lon/2pi + 0.5) * W in [0, W) with horizontal wrap,
  py = (0.5 - lat/pi) * H in [0, H] with vertical clamp.
* Cube faces are square; (u, v) in [0, 1]^2 with u rightward and v
  downward in the face raster.  Face parametrizations (before
  normalization):

      front  = (2u-1, 1-2v,  1)     back   = (1-2u, 1-2v, -1)
      left   = (-1,   1-2v, 2u-1)   right  = (1,    1-2v, 1-2u)
      top    = (2u-1, 1,    2v-1)   bottom = (2u-1, -1,   1-2v)

  The top/bottom v-axes are oriented so walking down the front face
  continues onto the bottom face without a flip.
* Whole-image resampling is bilinear at pixel centers (i + 0.5), with
  horizontal wrap and vertical clamp on the equirectangular side and
  edge clamp on faces.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidImage

FACE_IDS = ("front", "back", "left", "right", "top", "bottom")
_FACE_INDEX = {name: i for i, name in enumerate(FACE_IDS)}


@dataclass(frozen=True)
class CubeFace:
    id: str
    image: np.ndarray

    def __post_init__(self):
        if self.id not in FACE_IDS:
            raise ValueError(f"unknown face id {self.id!r}")
        if self.image.shape[0] != self.image.shape[1]:
            raise InvalidImage(f"cube face must be square, got {self.image.shape}")


@dataclass(frozen=True)
class CubeFaceSet:
    faces: dict[str, CubeFace]
    face_size: int

    def __post_init__(self):
        if set(self.faces) != set(FACE_IDS):
            raise InvalidImage(f"need exactly the six faces {FACE_IDS}, got {sorted(self.faces)}")
        for f in self.faces.values():
            if f.image.shape[0] != self.face_size:
                raise InvalidImage("all faces must share face_size")

    def __getitem__(self, face_id: str) -> CubeFace:
        return self.faces[face_id]


def face_uv_to_direction(face_id: str, u, v) -> np.ndarray:
    """Unit direction for face coordinates (u, v) in [0, 1]^2.

    u and v may be scalars or broadcastable arrays; returns (..., 3).
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    a = 2.0 * u - 1.0
    b = 1.0 - 2.0 * v
    one = np.ones_like(a)
    if face_id == "front":
        d = np.stack([a, b, one], axis=-1)
    elif face_id == "back":
        d = np.stack([-a, b, -one], axis=-1)
    elif face_id == "left":
        d = np.stack([-one, b, a], axis=-1)
    elif face_id == "right":
        d = np.stack([one, b, -a], axis=-1)
    elif face_id == "top":
        d = np.stack([a, one, -b], axis=-1)
    elif face_id == "bottom":
        d = np.stack([a, -one, b], axis=-1)
    else:
        raise ValueError(f"unknown face id {face_id!r}")
    return d / np.linalg.norm(d, axis=-1, keepdims=True)


def direction_to_equirect(d, width: int, height: int):
    """Map unit direction(s) to continuous equirect pixel coordinates.

    Returns (px, py) with px in [0, width) and py in [0, height].
    """
    if width != 2 * height:
        warnings.warn(f"equirect size {width}x{height} is not 2:1", stacklevel=2)
    d = np.asarray(d, dtype=np.float64)
    x, y, z = d[..., 0], d[..., 1], d[..., 2]
    lat = np.arcsin(np.clip(y, -1.0, 1.0))
    lon = np.arctan2(x, z)
    px = ((lon / (2.0 * np.pi) + 0.5) * width) % width
    py = (0.5 - lat / np.pi) * height
    return px, py


def equirect_pixel_directions(width: int, height: int) -> np.ndarray:
    """Unit directions of every equirect pixel center, shape (H, W, 3)."""
    px = (np.arange(width, dtype=np.float64) + 0.5)[None, :]
    py = (np.arange(height, dtype=np.float64) + 0.5)[:, None]
    lon = (px / width - 0.5) * 2.0 * np.pi
    lat = (0.5 - py / height) * np.pi
    cos_lat = np.cos(lat)
    x = np.sin(lon) * cos_lat
    z = np.cos(lon) * cos_lat
    y = np.broadcast_to(np.sin(lat), x.shape)
    return np.stack([x, y, z], axis=-1)


def _face_index_of(d: np.ndarray) -> np.ndarray:
    """Dominant-axis face index per direction; ties resolved x, then y, then z."""
    ax = np.abs(d[..., 0])
    ay = np.abs(d[..., 1])
    az = np.abs(d[..., 2])
    x_wins = (ax >= ay) & (ax >= az)
    y_wins = ~x_wins & (ay >= az)
    z_wins = ~x_wins & ~y_wins
    idx = np.empty(d.shape[:-1], dtype=np.int8)
    idx[x_wins] = np.where(d[..., 0][x_wins] >= 0, _FACE_INDEX["right"], _FACE_INDEX["left"])
    idx[y_wins] = np.where(d[..., 1][y_wins] >= 0, _FACE_INDEX["top"], _FACE_INDEX["bottom"])
    idx[z_wins] = np.where(d[..., 2][z_wins] >= 0, _FACE_INDEX["front"], _FACE_INDEX["back"])
    return idx


def _face_uv_from_scaled(idx: np.ndarray, s: np.ndarray):
    """Invert the face parametrization for directions scaled to the unit cube."""
    sx, sy, sz = s[..., 0], s[..., 1], s[..., 2]
    u = np.empty(idx.shape, dtype=np.float64)
    v = np.empty(idx.shape, dtype=np.float64)
    m = idx == _FACE_INDEX["front"]
    u[m] = (sx[m] + 1.0) / 2.0
    v[m] = (1.0 - sy[m]) / 2.0
    m = idx == _FACE_INDEX["back"]
    u[m] = (1.0 - sx[m]) / 2.0
    v[m] = (1.0 - sy[m]) / 2.0
    m = idx == _FACE_INDEX["left"]
    u[m] = (sz[m] + 1.0) / 2.0
    v[m] = (1.0 - sy[m]) / 2.0
    m = idx == _FACE_INDEX["right"]
    u[m] = (1.0 - sz[m]) / 2.0
    v[m] = (1.0 - sy[m]) / 2.0
    m = idx == _FACE_INDEX["top"]
    u[m] = (sx[m] + 1.0) / 2.0
    v[m] = (sz[m] + 1.0) / 2.0
    m = idx == _FACE_INDEX["bottom"]
    u[m] = (sx[m] + 1.0) / 2.0
    v[m] = (1.0 - sz[m]) / 2.0
    return u, v


def _face_lookup(d: np.ndarray):
    """(face_index, u, v) arrays for batched unit directions."""
    idx = _face_index_of(d)
    axis = np.select(
        [idx == _FACE_INDEX["left"], idx == _FACE_INDEX["right"],
         idx == _FACE_INDEX["top"], idx == _FACE_INDEX["bottom"]],
        [0, 0, 1, 1],
        default=2,
    )
    dominant = np.take_along_axis(np.abs(d), axis[..., None], axis=-1)[..., 0]
    s = d / dominant[..., None]
    u, v = _face_uv_from_scaled(idx, s)
    return idx, u, v


def direction_to_face_uv(d):
    """Cube face and (u, v) hit by unit direction(s).

    A single (3,) direction returns (face_id, u, v) with a string id;
    batched (..., 3) input returns (face_index, u, v) arrays where the
    index points into FACE_IDS.
    """
    d = np.asarray(d, dtype=np.float64)
    if d.ndim == 1:
        idx, u, v = _face_lookup(d[None, :])
        return FACE_IDS[int(idx[0])], float(u[0]), float(v[0])
    return _face_lookup(d)


def _bilinear_wrap_clamp(img: np.ndarray, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Sample img at continuous (px, py); wrap horizontally, clamp vertically."""
    h, w = img.shape[:2]
    fx = px - 0.5
    fy = py - 0.5
    x0 = np.floor(fx).astype(np.int64)
    y0 = np.floor(fy).astype(np.int64)
    tx = (fx - x0)[..., None]
    ty = (fy - y0)[..., None]
    x0w = x0 % w
    x1w = (x0 + 1) % w
    y0c = np.clip(y0, 0, h - 1)
    y1c = np.clip(y0 + 1, 0, h - 1)
    p00 = img[y0c, x0w].astype(np.float64)
    p10 = img[y0c, x1w].astype(np.float64)
    p01 = img[y1c, x0w].astype(np.float64)
    p11 = img[y1c, x1w].astype(np.float64)
    top = p00 * (1.0 - tx) + p10 * tx
    bot = p01 * (1.0 - tx) + p11 * tx
    return top * (1.0 - ty) + bot * ty


def _bilinear_clamp(img: np.ndarray, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Sample img at continuous (px, py) with edge clamp on both axes."""
    h, w = img.shape[:2]
    fx = px - 0.5
    fy = py - 0.5
    x0 = np.floor(fx).astype(np.int64)
    y0 = np.floor(fy).astype(np.int64)
    tx = (fx - x0)[..., None]
    ty = (fy - y0)[..., None]
    x0c = np.clip(x0, 0, w - 1)
    x1c = np.clip(x0 + 1, 0, w - 1)
    y0c = np.clip(y0, 0, h - 1)
    y1c = np.clip(y0 + 1, 0, h - 1)
    p00 = img[y0c, x0c].astype(np.float64)
    p10 = img[y0c, x1c].astype(np.float64)
    p01 = img[y1c, x0c].astype(np.float64)
    p11 = img[y1c, x1c].astype(np.float64)
    top = p00 * (1.0 - tx) + p10 * tx
    bot = p01 * (1.0 - tx) + p11 * tx
    return top * (1.0 - ty) + bot * ty


def equirect_to_cubemap(eq: np.ndarray, face_size: int) -> CubeFaceSet:
    """Project an equirectangular image onto the six cube faces."""
    eq = np.asarray(eq)
    if eq.ndim != 3 or eq.shape[0] < 1 or eq.shape[1] < 1:
        raise InvalidImage(f"degenerate equirect input: shape {eq.shape}")
    if face_size < 1:
        raise InvalidImage(f"face_size must be >= 1, got {face_size}")
    h, w = eq.shape[:2]
    grid = (np.arange(face_size, dtype=np.float64) + 0.5) / face_size
    uu, vv = np.meshgrid(grid, grid)  # uu varies along columns, vv along rows
    faces = {}
    for face_id in FACE_IDS:
        d = face_uv_to_direction(face_id, uu, vv)
        px, py = direction_to_equirect(d, w, h)
        samples = _bilinear_wrap_clamp(eq, px, py)
        faces[face_id] = CubeFace(face_id, np.clip(np.rint(samples), 0, 255).astype(np.uint8))
    return CubeFaceSet(faces=faces, face_size=face_size)


def wrap_min_cover(px_values, width: int) -> tuple[float, float, bool]:
    """Minimal-width cover of equirect x coordinates, allowing seam wrap.

    Returns (x_min, x_max, wrapped); wrapped means the cover spans
    [x_min, width) plus [0, x_max].
    """
    order = sorted(float(p) % width for p in px_values)
    n = len(order)
    if n == 1:
        return order[0], order[0], False
    gaps = [(order[(i + 1) % n] - order[i]) % width for i in range(n)]
    widest = max(range(n), key=lambda i: (gaps[i], i))
    x_min = order[(widest + 1) % n]
    x_max = order[widest]
    return x_min, x_max, x_max < x_min


def cubemap_to_equirect(faces: CubeFaceSet, width: int, height: int) -> np.ndarray:
    """Resample a cube face set back into an equirectangular image."""
    d = equirect_pixel_directions(width, height)
    idx, u, v = _face_lookup(d)
    fs = faces.face_size
    out = np.empty((height, width, 3), dtype=np.float64)
    for i, face_id in enumerate(FACE_IDS):
        m = idx == i
        if not np.any(m):
            continue
        out[m] = _bilinear_clamp(faces[face_id].image, u[m] * fs, v[m] * fs)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def face_point_to_equirect(face_id: str, x_px, y_px, face_size: int, width: int, height: int):
    """Back-project a face pixel coordinate into the equirectangular image.

    Pixel-index convention: the center of face pixel (i, j) is (i, j),
    i.e. u = (x_px + 0.5) / face_size.
    """
    u = (np.asarray(x_px, dtype=np.float64) + 0.5) / face_size
    v = (np.asarray(y_px, dtype=np.float64) + 0.5) / face_size
    d = face_uv_to_direction(face_id, u, v)
    return direction_to_equirect(d, width, height)


def write_cubemap(faces: CubeFaceSet, stem) -> list:
    """Write the six faces as <stem>_front.png ... <stem>_bottom.png."""
    from .image_io import save_image

    stem = str(stem)
    return [save_image(f"{stem}_{fid}.png", faces[fid].image) for fid in FACE_IDS]


def read_cubemap(stem) -> CubeFaceSet:
    """Read six faces written by write_cubemap."""
    from .image_io import load_image

    stem = str(stem)
    faces = {fid: CubeFace(fid, load_image(f"{stem}_{fid}.png")) for fid in FACE_IDS}
    return CubeFaceSet(faces=faces, face_size=faces["front"].image.shape[0])
