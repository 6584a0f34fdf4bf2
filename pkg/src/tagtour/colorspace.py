"""RGB/HSV conversions. Hue is in degrees [0, 360); s and v are fractions."""

import math

import numpy as np


def hsv_to_rgb8(h_deg: float, s: float, v: float) -> tuple[int, int, int]:
    """Hexcone HSV to 8-bit RGB, rounding half up per channel."""
    c = v * s
    hp = (h_deg / 60.0) % 6.0
    x = c * (1.0 - abs(hp % 2.0 - 1.0))
    sector = int(hp) % 6
    rp, gp, bp = (
        (c, x, 0.0),
        (x, c, 0.0),
        (0.0, c, x),
        (0.0, x, c),
        (x, 0.0, c),
        (c, 0.0, x),
    )[sector]
    m = v - c
    return tuple(int(math.floor((f + m) * 255.0 + 0.5)) for f in (rp, gp, bp))


def rgb_image_to_hsv(img: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """uint8 (H, W, 3) image -> (hue degrees, saturation, value) float64 arrays."""
    rgb = np.asarray(img, dtype=np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    c = v - rgb.min(axis=-1)
    s = np.divide(c, v, out=np.zeros_like(v), where=v > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        hp = np.where(
            c == 0,
            0.0,
            np.where(
                v == r,
                ((g - b) / c) % 6.0,
                np.where(v == g, (b - r) / c + 2.0, (r - g) / c + 4.0),
            ),
        )
    return (hp * 60.0) % 360.0, s, v


def circular_hue_delta(h_a, h_b):
    """Shortest angular distance between two hues, in degrees [0, 180]."""
    d = np.abs(np.asarray(h_a, dtype=np.float64) - h_b) % 360.0
    return np.minimum(d, 360.0 - d)
