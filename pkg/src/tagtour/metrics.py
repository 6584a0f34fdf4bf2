"""Detection, classification, end-to-end, and per-property evaluation.

Matching is greedy in confidence order at a fixed IoU threshold.
Average precision uses all-point interpolation (area under the
precision envelope).  End-to-end counting follows the detect-then-read
protocol: a matched detection is a true positive only when its read
number equals the ground-truth number; unmatched detections count as
false positives (the stricter variant; the literal "detected but read
incorrectly" count is reported alongside as fp_paper_literal).
"""

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .detector import BBox
from .errors import EmptyInput

N_CLASSES = 20


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes; 0 when disjoint."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    union = a.area + b.area - inter
    return inter / union if union > 0 else 0.0


@dataclass(frozen=True)
class MatchResult:
    pairs: list[tuple[int, int, float]]  # (detection idx, gt idx, IoU)
    unmatched_detections: list[int]
    unmatched_gt: list[int]


def match_detections(det_boxes, det_confs, gt_boxes, iou_thr: float = 0.5) -> MatchResult:
    """Greedy one-to-one matching in confidence order.

    Each detection (highest confidence first, input order on ties) takes
    the still-unmatched ground truth with maximum IoU >= iou_thr; IoU
    ties go to the lower gt index.  Indices refer to the input lists.
    """
    order = sorted(range(len(det_boxes)), key=lambda i: (-det_confs[i], i))
    taken = [False] * len(gt_boxes)
    pairs = []
    unmatched_dets = []
    for di in order:
        best_gi, best_val = -1, -1.0
        for gi, gt in enumerate(gt_boxes):
            if taken[gi]:
                continue
            val = iou(det_boxes[di], gt)
            if val >= iou_thr and val > best_val:
                best_gi, best_val = gi, val
        if best_gi >= 0:
            taken[best_gi] = True
            pairs.append((di, best_gi, best_val))
        else:
            unmatched_dets.append(di)
    pairs.sort()
    unmatched_gt = [gi for gi, t in enumerate(taken) if not t]
    return MatchResult(pairs=pairs, unmatched_detections=sorted(unmatched_dets), unmatched_gt=unmatched_gt)


@dataclass(frozen=True)
class DetRecord:
    """One predicted box for evaluation purposes."""

    image: str
    bbox: BBox
    confidence: float
    number: int | None = None  # read class; None for failed/classless


@dataclass(frozen=True)
class GtRecord:
    image: str
    bbox: BBox
    number: int


def _group(records):
    by_image = defaultdict(list)
    for r in records:
        by_image[r.image].append(r)
    return by_image


def precision_recall_points(dets: list[DetRecord], gts: list[GtRecord], iou_thr: float = 0.5):
    """Raw (recall, precision) staircase over detections ranked by confidence."""
    n_gt = len(gts)
    if n_gt == 0 or not dets:
        return np.array([]), np.array([])
    gt_by_image = _group(gts)
    det_by_image = _group(dets)
    tp_flags: dict[tuple[str, int], bool] = {}
    for image, image_dets in det_by_image.items():
        image_gts = gt_by_image.get(image, [])
        res = match_detections(
            [d.bbox for d in image_dets],
            [d.confidence for d in image_dets],
            [g.bbox for g in image_gts],
            iou_thr,
        )
        matched = {di for di, _, _ in res.pairs}
        for di in range(len(image_dets)):
            tp_flags[(image, di)] = di in matched

    ranked = sorted(
        ((d.confidence, image, di) for image, image_dets in det_by_image.items() for di, d in enumerate(image_dets)),
        key=lambda t: (-t[0], t[1], t[2]),
    )
    tps = np.cumsum([1.0 if tp_flags[(image, di)] else 0.0 for _, image, di in ranked])
    fps = np.cumsum([0.0 if tp_flags[(image, di)] else 1.0 for _, image, di in ranked])
    recall = tps / n_gt
    precision = tps / np.maximum(tps + fps, 1e-12)
    return recall, precision


def average_precision(dets: list[DetRecord], gts: list[GtRecord], iou_thr: float = 0.5) -> float:
    """All-point interpolated AP for one class across all images."""
    recall, precision = precision_recall_points(dets, gts, iou_thr)
    if recall.size == 0:
        return 0.0
    # Precision envelope, integrated over recall (VOC 2010+ style).
    mrec = np.concatenate([[0.0], recall, [1.0]])
    mpre = np.concatenate([[0.0], precision, [0.0]])
    for i in range(len(mpre) - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    changed = np.where(mrec[1:] != mrec[:-1])[0]
    return float(np.sum((mrec[changed + 1] - mrec[changed]) * mpre[changed + 1]))


def map_at(dets: list[DetRecord], gts: list[GtRecord], iou_thr: float = 0.5, weighting: str = "macro") -> float:
    """Mean AP over classes that have at least one ground truth."""
    classes = sorted({g.number for g in gts})
    if not classes:
        return 0.0
    aps, supports = [], []
    for c in classes:
        aps.append(average_precision([d for d in dets if d.number == c], [g for g in gts if g.number == c], iou_thr))
        supports.append(sum(1 for g in gts if g.number == c))
    if weighting == "weighted":
        return float(np.average(aps, weights=supports))
    if weighting == "macro":
        return float(np.mean(aps))
    raise ValueError(f"unknown weighting {weighting!r}")


def per_class_detection_metrics(dets: list[DetRecord], gts: list[GtRecord], iou_thr: float = 0.5) -> dict[int, dict]:
    """AP plus operating-point P/R/f1 per class (all detections in play)."""
    out = {}
    for c in sorted({g.number for g in gts}):
        cd = [d for d in dets if d.number == c]
        cg = [g for g in gts if g.number == c]
        ap = average_precision(cd, cg, iou_thr)
        tp = fp = 0
        cg_by_image = _group(cg)
        for image, image_dets in _group(cd).items():
            image_gts = cg_by_image.get(image, [])
            res = match_detections(
                [d.bbox for d in image_dets],
                [d.confidence for d in image_dets],
                [g.bbox for g in image_gts],
                iou_thr,
            )
            tp += len(res.pairs)
            fp += len(res.unmatched_detections)
        fn = len(cg) - tp
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        out[c] = {"AP": ap, "P": p, "R": r, "f1": f1, "support": len(cg)}
    return out


def classification_metrics(confusion: np.ndarray) -> dict:
    """Macro and weighted A/P/R/f1 from a rows=true, cols=predicted matrix.

    Classes with zero ground truth are excluded from macro means and
    carry zero weight in weighted means.
    """
    m = np.asarray(confusion, dtype=np.float64)
    if m.size == 0:
        raise EmptyInput("empty confusion matrix")
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"confusion matrix must be square, got {m.shape}")
    total = m.sum()
    support = m.sum(axis=1)
    predicted = m.sum(axis=0)
    tp = np.diag(m)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(predicted > 0, tp / np.maximum(predicted, 1e-300), 0.0)
        r = np.where(support > 0, tp / np.maximum(support, 1e-300), 0.0)
        f1 = np.where(p + r > 0, 2 * p * r / np.maximum(p + r, 1e-300), 0.0)
    present = support > 0
    if not present.any():
        raise EmptyInput("confusion matrix has no populated classes")
    accuracy = float(tp.sum() / total) if total > 0 else 0.0
    weights = support[present] / support[present].sum()

    def _rate(x: float) -> float:
        return float(min(max(x, 0.0), 1.0))

    return {
        "accuracy": accuracy,
        "macro": {
            "A": accuracy,
            "P": _rate(p[present].mean()),
            "R": _rate(r[present].mean()),
            "f1": _rate(f1[present].mean()),
        },
        "weighted": {
            "A": accuracy,
            "P": _rate(np.sum(weights * p[present])),
            "R": _rate(np.sum(weights * r[present])),
            "f1": _rate(np.sum(weights * f1[present])),
        },
        "per_class": [
            {"class": int(c), "P": float(p[c]), "R": float(r[c]), "f1": float(f1[c]), "support": int(support[c])}
            for c in range(m.shape[0])
        ],
    }


def end_to_end_eval(readings: list[DetRecord], gts: list[GtRecord], iou_thr: float = 0.5) -> dict:
    """Detect-then-read counting over all images.

    TP: matched box read with the correct number.  FP: matched box read
    wrong or unreadable, plus every unmatched detection.  FN: unmatched
    ground truths.  The class-aware mAP assigns each reading to its read
    number and is support-weighted over classes.
    """
    gt_by_image = _group(gts)
    det_by_image = _group(readings)
    tp = fp = fn = fp_paper_literal = 0
    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    images = sorted(set(gt_by_image) | set(det_by_image))
    for image in images:
        image_dets = det_by_image.get(image, [])
        image_gts = gt_by_image.get(image, [])
        res = match_detections(
            [d.bbox for d in image_dets],
            [d.confidence for d in image_dets],
            [g.bbox for g in image_gts],
            iou_thr,
        )
        for di, gi, _ in res.pairs:
            read = image_dets[di].number
            truth = image_gts[gi].number
            if read == truth:
                tp += 1
            else:
                fp += 1
                fp_paper_literal += 1
            if read is not None:
                confusion[truth - 1, read - 1] += 1
        fp += len(res.unmatched_detections)
        fn += len(res.unmatched_gt)
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    classified = [d for d in readings if d.number is not None]
    return {
        "TP": tp,
        "FP": fp,
        "FN": fn,
        "fp_paper_literal": fp_paper_literal,
        "P": p,
        "R": r,
        "f1": f1,
        "mAP": map_at(classified, gts, iou_thr, weighting="weighted"),
        "confusion": confusion,
    }


def property_accuracy(per_property_results: dict[str, dict]) -> float:
    """Fraction of properties whose end-to-end counts are flawless."""
    if not per_property_results:
        return 0.0
    clean = sum(1 for res in per_property_results.values() if res["FP"] == 0 and res["FN"] == 0)
    return clean / len(per_property_results)
