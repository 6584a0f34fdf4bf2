"""Digit color palette and bi-colored numbered tag rasters.

A tag shows a two-digit number (01..20) on a square split into two
stacked halves: the leading (tens) digit colors the top half and carries
a filled black circle, the trailing (units) digit colors the bottom
half.  Numerals are drawn as black seven-segment strokes.  Every digit
0..9 has a fixed HSV fill color.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .colorspace import hsv_to_rgb8
from .errors import InvalidTagNumber, IoError
from .image_io import save_image

MIN_TAG_NUMBER = 1
MAX_TAG_NUMBER = 20


@dataclass(frozen=True)
class HsvColor:
    h: float  # degrees [0, 360)
    s: float  # [0, 1]
    v: float  # [0, 1]


@dataclass(frozen=True)
class PaletteEntry:
    digit: int
    name: str
    color: HsvColor
    reference_rgb_hex: str

    @property
    def rgb(self) -> tuple[int, int, int]:
        return hsv_to_rgb8(self.color.h, self.color.s, self.color.v)

    @property
    def reference_rgb(self) -> tuple[int, int, int]:
        h = self.reference_rgb_hex
        return tuple(int(h[i : i + 2], 16) for i in (0, 2, 4))


_PALETTE: tuple[PaletteEntry, ...] = (
    PaletteEntry(0, "green", HsvColor(112.0, 0.59, 0.76), "5fc24f"),
    PaletteEntry(1, "red", HsvColor(3.0, 0.84, 0.84), "d62b22"),
    PaletteEntry(2, "violet", HsvColor(266.0, 0.73, 0.85), "7f3bd9"),
    PaletteEntry(3, "brown", HsvColor(25.0, 0.82, 0.58), "944d1b"),
    PaletteEntry(4, "pink", HsvColor(316.0, 0.59, 0.87), "de5bbb"),
    PaletteEntry(5, "grey", HsvColor(0.0, 0.00, 0.64), "a3a3a3"),
    PaletteEntry(6, "yellow", HsvColor(43.0, 0.72, 0.89), "e3b540"),
    PaletteEntry(7, "light_blue", HsvColor(194.0, 0.62, 0.87), "54bede"),
    PaletteEntry(8, "dark_blue", HsvColor(224.0, 0.97, 0.93), "0744ed"),
    PaletteEntry(9, "orange", HsvColor(25.0, 0.79, 0.94), "f08132"),
)


def palette() -> tuple[PaletteEntry, ...]:
    """The fixed 10-entry digit->color table, indexed by digit."""
    return _PALETTE


# Segments of a standard seven-segment numeral: a=top, g=middle, d=bottom,
# f/b = upper left/right, e/c = lower left/right.
_DIGIT_SEGMENTS = {
    0: "abcdef",
    1: "bc",
    2: "abdeg",
    3: "abcdg",
    4: "bcfg",
    5: "acdfg",
    6: "acdefg",
    7: "abc",
    8: "abcdefg",
    9: "abcdfg",
}

_BLACK = (0, 0, 0)

# Layout fractions of the tag side.  The circle sits center-top of the
# leading half; the leading numeral sits beside it (never below) so that
# even heavy minification cannot fuse the two into one dark component,
# which would break circle-based side identification.
_CIRCLE_CY = 0.15  # 30% of the half height
_CIRCLE_R = 0.125  # diameter 25% of the side
_GLYPH_W = 0.16
_LEAD_GLYPH_X = (0.09, 0.25)
_LEAD_GLYPH_Y = (0.05, 0.25)
_TRAIL_GLYPH_Y = (0.65, 0.85)


def _fill_rect(img: np.ndarray, x0: float, y0: float, x1: float, y1: float, color) -> None:
    # A pixel is inked when its center falls inside [x0,x1) x [y0,y1).
    i0 = max(int(np.ceil(x0 - 0.5)), 0)
    i1 = max(int(np.ceil(x1 - 0.5)), 0)
    j0 = max(int(np.ceil(y0 - 0.5)), 0)
    j1 = max(int(np.ceil(y1 - 0.5)), 0)
    img[j0:j1, i0:i1] = color


def _draw_seven_segment(img: np.ndarray, digit: int, box, stroke: float) -> None:
    x0, y0, x1, y1 = box
    mid = (y0 + y1) / 2.0
    rects = {
        "a": (x0, y0, x1, y0 + stroke),
        "d": (x0, y1 - stroke, x1, y1),
        "g": (x0, mid - stroke / 2.0, x1, mid + stroke / 2.0),
        "f": (x0, y0, x0 + stroke, mid),
        "b": (x1 - stroke, y0, x1, mid),
        "e": (x0, mid, x0 + stroke, y1),
        "c": (x1 - stroke, mid, x1, y1),
    }
    for name in _DIGIT_SEGMENTS[digit]:
        _fill_rect(img, *rects[name], _BLACK)


@dataclass(frozen=True)
class TagArt:
    """A rendered tag raster plus the geometry needed to decode it."""

    number: int
    raster: np.ndarray
    leading_digit: int
    trailing_digit: int
    leading_region: tuple[int, int, int, int]  # x0, y0, x1, y1 half-open px
    trailing_region: tuple[int, int, int, int]
    circle_center: tuple[float, float]
    circle_radius: float


def render_tag(number: int, side_px: int = 256) -> TagArt:
    """Render tag `number` (1..20) as a side_px x side_px RGB raster.

    Leading half on top with the black circle; numerals in black
    seven-segment strokes of width side_px/24.  Deterministic:
    bit-identical output for identical inputs.
    """
    if not isinstance(number, (int, np.integer)) or not MIN_TAG_NUMBER <= number <= MAX_TAG_NUMBER:
        raise InvalidTagNumber(f"tag number must be in {MIN_TAG_NUMBER}..{MAX_TAG_NUMBER}, got {number!r}")
    if side_px < 64:
        raise ValueError(f"side_px must be >= 64, got {side_px}")

    lead, trail = divmod(int(number), 10)
    side = int(side_px)
    half = side // 2

    img = np.empty((side, side, 3), dtype=np.uint8)
    img[:half] = palette()[lead].rgb
    img[half:] = palette()[trail].rgb

    cx, cy, r = side / 2.0, _CIRCLE_CY * side, _CIRCLE_R * side
    jj, ii = np.mgrid[0:side, 0:side]
    circle = (ii + 0.5 - cx) ** 2 + (jj + 0.5 - cy) ** 2 <= r * r
    img[circle] = _BLACK

    stroke = side / 24.0
    _draw_seven_segment(
        img,
        lead,
        (_LEAD_GLYPH_X[0] * side, _LEAD_GLYPH_Y[0] * side, _LEAD_GLYPH_X[1] * side, _LEAD_GLYPH_Y[1] * side),
        stroke,
    )
    gx0 = (0.5 - _GLYPH_W / 2.0) * side
    gx1 = (0.5 + _GLYPH_W / 2.0) * side
    _draw_seven_segment(img, trail, (gx0, _TRAIL_GLYPH_Y[0] * side, gx1, _TRAIL_GLYPH_Y[1] * side), stroke)

    return TagArt(
        number=int(number),
        raster=img,
        leading_digit=lead,
        trailing_digit=trail,
        leading_region=(0, 0, side, half),
        trailing_region=(0, half, side, side),
        circle_center=(cx, cy),
        circle_radius=r,
    )


def write_tag_sheet(numbers, out_dir, side_px: int = 256) -> list[Path]:
    """Write one PNG per tag number into out_dir, named tag_<NN>.png."""
    out_dir = Path(out_dir)
    paths = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoError(f"cannot create {out_dir}: {e}") from e
    for n in numbers:
        art = render_tag(n, side_px=side_px)
        paths.append(save_image(out_dir / f"tag_{art.number:02d}.png", art.raster))
    return paths
