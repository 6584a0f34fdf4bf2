import json
from pathlib import Path

import numpy as np
import pytest

from tagtour.detector import BBox, detect_tags
from tagtour.image_io import load_image
from tagtour.metrics import DetRecord, GtRecord, end_to_end_eval
from tagtour.projection import FACE_IDS, CubeFace
from tagtour.recognizer import classify_tag

NEUTRAL_WALL = (84, 158, 121)  # the synth backdrop tint; outside every palette band


def make_face(size=1024, color=NEUTRAL_WALL):
    return np.full((size, size, 3), color, np.uint8)


def paste(face, raster, x, y):
    h, w = raster.shape[:2]
    face[y : y + h, x : x + w] = raster
    return BBox(float(x), float(y), float(x + w), float(y + h))


def run_dataset_pipeline(dataset_dir):
    """Detect + read every face of a generated dataset.

    Returns (per_property eval blocks, all predictions, all gts).
    """
    dataset_dir = Path(dataset_dir)
    man = json.loads((dataset_dir / "gt.json").read_text())
    per_property = {}
    all_preds, all_gts = [], []
    for prop in man["properties"]:
        preds, gts = [], []
        for pano in prop["panoramas"]:
            stem = Path(pano["file"]).stem
            for fid in FACE_IDS:
                img = load_image(dataset_dir / prop["id"] / "faces" / f"{stem}_{fid}.png")
                face = CubeFace(fid, img)
                for det in detect_tags(face):
                    reading = classify_tag(face, det)
                    preds.append(
                        DetRecord(
                            image=f"{pano['id']}/{fid}",
                            bbox=det.bbox,
                            confidence=det.confidence,
                            number=reading.number,
                        )
                    )
        for lab in prop["labels"]:
            gts.append(GtRecord(image=f"{lab['image']}/{lab['face']}", bbox=BBox(*lab["bbox"]), number=lab["tag_number"]))
        per_property[prop["id"]] = end_to_end_eval(preds, gts, 0.5)
        all_preds.extend(preds)
        all_gts.extend(gts)
    return per_property, all_preds, all_gts


def pooled_prf(per_property):
    tp = sum(r["TP"] for r in per_property.values())
    fp = sum(r["FP"] for r in per_property.values())
    fn = sum(r["FN"] for r in per_property.values())
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f1


@pytest.fixture(scope="session")
def small_clean_dataset(tmp_path_factory):
    from tagtour.synth import DatasetConfig, generate_dataset

    out = tmp_path_factory.mktemp("ds") / "clean_small"
    cfg = DatasetConfig(n_properties=2, panos_per_property=(7, 7), seed=11)
    generate_dataset(cfg, out)
    return out
