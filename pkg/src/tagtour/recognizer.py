"""Tag number classification from detected crops.

Reads a tag by color alone: the crop is split into its two colored
halves, each half's mean HSV is matched to the nearest palette digit,
and the black circle decides which half holds the leading (tens) digit.
Printed numerals are ignored; the dark-pixel mask that excludes them is
what localizes the circle.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from skimage.measure import perimeter as mask_perimeter

from .color_scheme import MAX_TAG_NUMBER, MIN_TAG_NUMBER, palette
from .colorspace import circular_hue_delta, rgb_image_to_hsv
from .detector import Detection, palette_mask
from .projection import CubeFace, CubeFaceSet

FAIL_TOO_SMALL = "too_small"
FAIL_NO_CIRCLE = "no_circle"
FAIL_INVALID_NUMBER = "invalid_number"
FAIL_EMPTY_HALF = "empty_half"


@dataclass(frozen=True)
class RecognizerParams:
    # 0.30 keeps a blurred circle core findable under a +0.15 brightness
    # shift while staying far below the darkest palette fill (brown 0.58,
    # which bottoms out near 0.43 under a -0.15 shift).
    dark_v_max: float = 0.30
    highlight_s_max: float = 0.15
    highlight_v_min: float = 0.85
    circularity_min: float = 0.5
    min_circle_area_px: int = 5
    min_crop_area_px: int = 16 * 16
    d_max: float = 0.6  # palette distance mapping to zero confidence
    # Half statistics are taken over an inset window of each half so that
    # neither the blur-blended band at the color boundary nor the blended
    # crop perimeter can drag the means.
    split_margin: float = 0.15
    edge_margin: float = 0.12
    # A global additive brightness change moves value but not chroma; each
    # palette entry may be matched under such a shift, bounded and
    # penalized so entries that differ only in value stay separable.
    brightness_comp_max: float = 0.2
    shift_penalty: float = 0.15
    # How close a second-best digit must be before an imported class
    # prior is allowed to break the tie.
    prior_tie_margin: float = 0.02


@dataclass(frozen=True)
class HalfDiagnostics:
    mean_h: float
    mean_s: float
    mean_v: float
    nearest_digit: int | None
    palette_distance: float


@dataclass(frozen=True)
class TagReading:
    detection: Detection
    number: int | None
    leading_digit: int | None
    trailing_digit: int | None
    confidence: float
    failure_reason: str | None = None
    leading_diag: HalfDiagnostics | None = None
    trailing_diag: HalfDiagnostics | None = None

    @property
    def ok(self) -> bool:
        return self.number is not None


def palette_distance(mean_h: float, mean_s: float, mean_v: float, entry) -> float:
    """Distance between a measured mean HSV and one palette entry.

    Hue differences are scaled by saturation so that near-grey
    measurements are matched on value, not on meaningless hue.
    """
    dh = circular_hue_delta(mean_h, entry.color.h) / 180.0
    w_h = 2.0 * min(mean_s, entry.color.s, 1.0)
    return math.sqrt((w_h * dh) ** 2 + (mean_s - entry.color.s) ** 2 + (mean_v - entry.color.v) ** 2)


def _entry_distance(mean_h, mean_s, mean_v, entry, params: RecognizerParams) -> float:
    """palette_distance, also tried under a bounded global brightness shift."""
    best = palette_distance(mean_h, mean_s, mean_v, entry)
    delta = min(max(mean_v - entry.color.v, -params.brightness_comp_max), params.brightness_comp_max)
    v_comp = mean_v - delta
    if abs(delta) > 1e-9 and v_comp > 0.05:
        s_comp = min(mean_s * mean_v / v_comp, 1.2)
        d = palette_distance(mean_h, s_comp, v_comp, entry) + params.shift_penalty * abs(delta)
        best = min(best, d)
    return best


def _nearest_palette_digit(
    mean_h, mean_s, mean_v, params: RecognizerParams, prefer: int | None = None
) -> tuple[int, float]:
    """Closest palette digit; a near-tie defers to `prefer` (imported prior)."""
    distances = {e.digit: _entry_distance(mean_h, mean_s, mean_v, e, params) for e in palette()}
    best_digit = min(distances, key=lambda d: (distances[d], d))
    if prefer is not None and prefer != best_digit:
        if distances.get(prefer, math.inf) <= distances[best_digit] + params.prior_tie_margin:
            best_digit = prefer
    return best_digit, distances[best_digit]


def _half_diag(h, s, v, chroma, params: RecognizerParams, prefer: int | None = None) -> HalfDiagnostics | None:
    pick = chroma
    if not pick.any():
        return None
    hh, ss, vv = h[pick], s[pick], v[pick]
    rad = np.deg2rad(hh)
    mean_h = math.degrees(math.atan2(np.sin(rad).mean(), np.cos(rad).mean())) % 360.0
    mean_s = float(ss.mean())
    mean_v = float(vv.mean())
    digit, dist = _nearest_palette_digit(mean_h, mean_s, mean_v, params, prefer)
    return HalfDiagnostics(mean_h, mean_s, mean_v, digit, dist)


def _find_circle(v: np.ndarray, params: RecognizerParams):
    """Centroid of the largest sufficiently circular dark component, or None."""
    dark = v < params.dark_v_max
    labels, n = ndimage.label(dark, structure=np.ones((3, 3), dtype=bool))
    if n == 0:
        return None
    areas = np.bincount(labels.ravel())
    best = None
    for comp in range(1, n + 1):
        area = int(areas[comp])
        if area < params.min_circle_area_px:
            continue
        if best is not None and area <= best[0]:
            continue
        m = labels == comp
        per = mask_perimeter(m)
        if per <= 0:
            continue
        circularity = 4.0 * math.pi * area / (per * per)
        if circularity >= params.circularity_min:
            best = (area, comp)
    if best is None:
        return None
    cy, cx = ndimage.center_of_mass(labels == best[1])
    return float(cx), float(cy)


def _failed(det, reason, lead_diag=None, trail_diag=None) -> TagReading:
    return TagReading(
        detection=det,
        number=None,
        leading_digit=None,
        trailing_digit=None,
        confidence=0.0,
        failure_reason=reason,
        leading_diag=lead_diag,
        trailing_diag=trail_diag,
    )


def classify_tag(face, det: Detection, params: RecognizerParams = RecognizerParams()) -> TagReading:
    """Read the tag number from one detection on one face image.

    Never raises for unreadable content; failures come back as a
    TagReading with number None and a failure_reason.
    """
    img = face.image if isinstance(face, CubeFace) else np.asarray(face)
    height, width = img.shape[:2]

    x0 = max(int(math.floor(det.bbox.x_min)), 0)
    y0 = max(int(math.floor(det.bbox.y_min)), 0)
    x1 = min(int(math.ceil(det.bbox.x_max)), width)
    y1 = min(int(math.ceil(det.bbox.y_max)), height)
    if (x1 - x0) * (y1 - y0) < params.min_crop_area_px:
        return _failed(det, FAIL_TOO_SMALL)
    crop = img[y0:y1, x0:x1]

    h, s, v = rgb_image_to_hsv(crop)
    chroma = (v >= params.dark_v_max) & ~((s <= params.highlight_s_max) & (v >= params.highlight_v_min))
    # Half statistics are gated to palette-band pixels so that background
    # caught in the axis-aligned box around a rotated tag cannot drag the
    # half means; the plain chroma mask is the fallback.
    gated = chroma & palette_mask(crop)

    circle = _find_circle(v, params)
    if circle is None:
        return _failed(det, FAIL_NO_CIRCLE)
    circle_x, circle_y = circle

    # Split along whichever axis separates the two fill colors best.
    ch, cw = crop.shape[:2]
    rgb = crop.astype(np.float64)
    row_split = ch // 2
    col_split = cw // 2
    d_rows = np.linalg.norm(rgb[:row_split].mean(axis=(0, 1)) - rgb[row_split:].mean(axis=(0, 1)))
    d_cols = np.linalg.norm(rgb[:, :col_split].mean(axis=(0, 1)) - rgb[:, col_split:].mean(axis=(0, 1)))
    def _span(n: int, frac_lo: float, frac_hi: float) -> slice:
        lo = int(round(frac_lo * n))
        hi = max(int(round(frac_hi * n)), lo + 1)
        return slice(min(lo, n - 1), hi)

    first = np.zeros((ch, cw), dtype=bool)
    second = np.zeros((ch, cw), dtype=bool)
    em, sm = params.edge_margin, params.split_margin
    if d_rows >= d_cols:
        across = _span(cw, em, 1.0 - em)
        first[_span(ch, em, 0.5 - sm), across] = True
        second[_span(ch, 0.5 + sm, 1.0 - em), across] = True
        circle_in_first = circle_y < row_split
    else:
        across = _span(ch, em, 1.0 - em)
        first[across, _span(cw, em, 0.5 - sm)] = True
        second[across, _span(cw, 0.5 + sm, 1.0 - em)] = True
        circle_in_first = circle_x < col_split

    lead_win, trail_win = (first, second) if circle_in_first else (second, first)
    prior = det.class_prior + 1 if det.class_prior is not None and 0 <= det.class_prior <= 19 else None
    prefer_lead = prior // 10 if prior is not None else None
    prefer_trail = prior % 10 if prior is not None else None
    lead_diag = _half_diag(h, s, v, gated & lead_win, params, prefer_lead) or _half_diag(
        h, s, v, chroma & lead_win, params, prefer_lead
    )
    trail_diag = _half_diag(h, s, v, gated & trail_win, params, prefer_trail) or _half_diag(
        h, s, v, chroma & trail_win, params, prefer_trail
    )
    if lead_diag is None or trail_diag is None:
        return _failed(det, FAIL_EMPTY_HALF, lead_diag, trail_diag)

    number = 10 * lead_diag.nearest_digit + trail_diag.nearest_digit
    if not MIN_TAG_NUMBER <= number <= MAX_TAG_NUMBER:
        return _failed(det, FAIL_INVALID_NUMBER, lead_diag, trail_diag)

    worst = max(lead_diag.palette_distance, trail_diag.palette_distance)
    confidence = (1.0 - min(max(worst / params.d_max, 0.0), 1.0)) * det.confidence
    return TagReading(
        detection=det,
        number=number,
        leading_digit=lead_diag.nearest_digit,
        trailing_digit=trail_diag.nearest_digit,
        confidence=confidence,
        leading_diag=lead_diag,
        trailing_diag=trail_diag,
    )


def classify_batch(faces, detections, params: RecognizerParams = RecognizerParams()) -> list[TagReading]:
    """classify_tag over parallel lists; failures stay in place, order kept.

    `faces` may be one image/CubeFace (shared by all detections), a
    CubeFaceSet (each detection classified on its own face), or a list
    parallel to `detections`.
    """
    if isinstance(faces, CubeFaceSet):
        faces = [faces[d.face_id] for d in detections]
    elif isinstance(faces, (CubeFace, np.ndarray)):
        faces = [faces] * len(detections)
    return [classify_tag(f, d, params) for f, d in zip(faces, detections)]


def readings_from_records(records: list[dict]) -> dict[str, list[TagReading]]:
    """Rebuild minimal TagReading objects from readings.json, keyed by image."""
    from .detector import BBox

    out: dict[str, list[TagReading]] = {}
    for r in records:
        det = Detection(
            face_id=r.get("face"),
            bbox=BBox(*[float(x) for x in r["bbox"]]),
            confidence=float(r.get("det_confidence", 1.0)),
        )
        out.setdefault(r["image"], []).append(
            TagReading(
                detection=det,
                number=r.get("number"),
                leading_digit=r.get("leading"),
                trailing_digit=r.get("trailing"),
                confidence=float(r.get("confidence", 0.0)),
                failure_reason=r.get("failure_reason"),
            )
        )
    return out


def readings_to_records(readings_by_image: dict[str, list[TagReading]]) -> list[dict]:
    """Flatten to the readings.json record schema."""
    records = []
    for image in sorted(readings_by_image):
        for r in readings_by_image[image]:
            records.append(
                {
                    "image": image,
                    "face": r.detection.face_id,
                    "bbox": [round(val, 3) for val in r.detection.bbox.as_list()],
                    "det_confidence": round(r.detection.confidence, 6),
                    "number": r.number,
                    "leading": r.leading_digit,
                    "trailing": r.trailing_digit,
                    "confidence": round(r.confidence, 6),
                    "failure_reason": r.failure_reason,
                }
            )
    return records
