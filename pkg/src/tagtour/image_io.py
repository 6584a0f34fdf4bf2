"""PNG load/save helpers. All rasters are (H, W, 3) uint8 RGB numpy arrays."""

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InvalidImage, IoError


def load_image(path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except OSError as e:
        raise IoError(f"cannot read image {path}: {e}") from e
    if arr.ndim != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidImage(f"degenerate image {path}: shape {arr.shape}")
    return arr


def save_image(path, img: np.ndarray) -> Path:
    path = Path(path)
    img = np.asarray(img)
    if img.dtype != np.uint8 or img.ndim != 3 or img.shape[2] != 3:
        raise InvalidImage(f"expected (H, W, 3) uint8 raster, got {img.dtype} {img.shape}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(img, mode="RGB").save(path, format="PNG")
    except OSError as e:
        raise IoError(f"cannot write image {path}: {e}") from e
    return path
