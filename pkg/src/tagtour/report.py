"""Evaluation report assembly and rendering.

Builds the full evaluation report from readings and a ground-truth
manifest, writes it as report.json, and renders the companion artifacts:
a per-class CSV plus matplotlib figures (precision/recall staircases,
per-class AP bars, and the 20x20 confusion heatmap).
"""

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .detector import BBox
from .errors import IoError, ParseError
from .metrics import (
    DetRecord,
    GtRecord,
    N_CLASSES,
    classification_metrics,
    end_to_end_eval,
    map_at,
    per_class_detection_metrics,
    precision_recall_points,
    property_accuracy,
)

COCO_THRESHOLDS = [round(0.5 + 0.05 * i, 2) for i in range(10)]


def _image_key(record: dict) -> str:
    face = record.get("face")
    return f"{record['image']}/{face}" if face else record["image"]


def readings_to_eval_records(readings: list[dict]) -> list[DetRecord]:
    out = []
    for r in readings:
        out.append(
            DetRecord(
                image=_image_key(r),
                bbox=BBox(*[float(x) for x in r["bbox"]]),
                confidence=float(r.get("det_confidence", r.get("confidence", 1.0))),
                number=r.get("number"),
            )
        )
    return out


def manifest_to_gt_records(manifest: dict):
    """Flatten a gt.json manifest into records plus image->property map."""
    gts: list[GtRecord] = []
    image_property: dict[str, str] = {}
    for prop in manifest.get("properties", []):
        for pano in prop.get("panoramas", []):
            image_property[pano["id"]] = prop["id"]
        for lab in prop.get("labels", []):
            gts.append(
                GtRecord(
                    image=f"{lab['image']}/{lab['face']}" if lab.get("face") else lab["image"],
                    bbox=BBox(*[float(x) for x in lab["bbox"]]),
                    number=int(lab["tag_number"]),
                )
            )
            image_property.setdefault(lab["image"], "unknown")
    return gts, image_property


def _property_of(image_key: str, image_property: dict[str, str]) -> str:
    return image_property.get(image_key.split("/")[0], "unknown")


def build_report(
    readings: list[dict],
    manifest: dict,
    iou_thr: float = 0.5,
    coco_range: bool = False,
    per_property: bool = True,
    config_hash: str | None = None,
) -> dict:
    preds = readings_to_eval_records(readings)
    gts, image_property = manifest_to_gt_records(manifest)
    classified = [p for p in preds if p.number is not None]

    thresholds = sorted({iou_thr, 0.95})
    map_at_block = {
        f"{thr:g}": {
            "macro": map_at(classified, gts, thr, "macro"),
            "weighted": map_at(classified, gts, thr, "weighted"),
        }
        for thr in thresholds
    }
    if coco_range:
        vals = [map_at(classified, gts, t, "weighted") for t in COCO_THRESHOLDS]
        map_at_block["coco_0.5:0.95"] = {"weighted": float(np.mean(vals))}

    e2e = end_to_end_eval(preds, gts, iou_thr)
    confusion = e2e.pop("confusion")
    try:
        cls_metrics = classification_metrics(confusion)
    except Exception:
        cls_metrics = None

    report = {
        "metadata": {
            "iou_threshold": iou_thr,
            "ap_interpolation": "all_point",
            "end_to_end_class_assignment": "read_class",
            "dataset_hash": manifest.get("config_hash"),
            "config_hash": config_hash,
        },
        "detection": {
            "per_class": {
                str(c): vals for c, vals in per_class_detection_metrics(classified, gts, iou_thr).items()
            },
            "mAP_at": map_at_block,
        },
        "classification": cls_metrics,
        "end_to_end": e2e,
        "confusion": confusion.tolist(),
    }

    if per_property:
        per_prop = {}
        prop_ids = sorted({_property_of(g.image, image_property) for g in gts})
        for pid in prop_ids:
            p_preds = [p for p in preds if _property_of(p.image, image_property) == pid]
            p_gts = [g for g in gts if _property_of(g.image, image_property) == pid]
            block = end_to_end_eval(p_preds, p_gts, iou_thr)
            block.pop("confusion")
            per_prop[pid] = block
        report["per_property"] = per_prop
        report["property_accuracy"] = property_accuracy(per_prop)
    return report


def _fig_pr_curves(classified, gts, iou_thr, path):
    fig, ax = plt.subplots(figsize=(7, 6))
    classes = sorted({g.number for g in gts})
    cmap = plt.get_cmap("tab20")
    for i, c in enumerate(classes):
        rec, pre = precision_recall_points(
            [d for d in classified if d.number == c], [g for g in gts if g.number == c], iou_thr
        )
        if rec.size == 0:
            continue
        ax.step(np.concatenate([[0.0], rec]), np.concatenate([[1.0], pre]), where="post",
                color=cmap(i % 20), label=f"tag {c}", linewidth=1.2)
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_xlim(0, 1.02)
    ax.set_ylim(0, 1.05)
    ax.set_title(f"Per-class precision/recall @ IoU {iou_thr:g}")
    ax.legend(fontsize=6, ncol=2, loc="lower left")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _fig_ap_bars(per_class: dict, path):
    classes = sorted(int(c) for c in per_class)
    aps = [per_class[str(c)]["AP"] for c in classes]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar([str(c) for c in classes], aps, color="#3b7dd8")
    ax.set_xlabel("tag number")
    ax.set_ylabel("AP")
    ax.set_ylim(0, 1.05)
    ax.set_title("Average precision per tag")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _fig_confusion(confusion, path):
    m = np.asarray(confusion, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(6.5, 6))
    im = ax.imshow(m, cmap="viridis")
    ax.set_xlabel("read tag")
    ax.set_ylabel("true tag")
    ax.set_xticks(range(N_CLASSES), [str(i + 1) for i in range(N_CLASSES)], fontsize=6)
    ax.set_yticks(range(N_CLASSES), [str(i + 1) for i in range(N_CLASSES)], fontsize=6)
    ax.set_title("Reading confusion")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(report: dict, readings: list[dict], manifest: dict, out_dir, iou_thr: float = 0.5) -> Path:
    """Write report.json, per_class.csv, and the figure PNGs into out_dir."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(json.dumps(report, indent=2) + "\n")

        per_class = report["detection"]["per_class"]
        with open(out_dir / "per_class.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["tag", "support", "AP", "P", "R", "f1"])
            for c in sorted(per_class, key=int):
                row = per_class[c]
                writer.writerow(
                    [c, row["support"], f"{row['AP']:.6f}", f"{row['P']:.6f}", f"{row['R']:.6f}", f"{row['f1']:.6f}"]
                )

        preds = readings_to_eval_records(readings)
        gts, _ = manifest_to_gt_records(manifest)
        classified = [p for p in preds if p.number is not None]
        _fig_pr_curves(classified, gts, iou_thr, out_dir / "pr_curves.png")
        _fig_ap_bars(per_class, out_dir / "ap_per_class.png")
        _fig_confusion(report["confusion"], out_dir / "confusion_matrix.png")
    except OSError as e:
        raise IoError(f"cannot write report into {out_dir}: {e}") from e
    return out_dir / "report.json"


def load_manifest(path) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid manifest JSON: {e}") from e
    if "properties" not in data:
        raise ParseError("manifest lacks a 'properties' list")
    return data
