"""Bi-colored numbered floor tags, panorama projection, and automatic
virtual-tour assembly for 360-degree imagery."""

from .color_scheme import TagArt, palette, render_tag, write_tag_sheet
from .detector import BBox, Detection, DetectorParams, detect_tags, import_detections
from .metrics import (
    average_precision,
    classification_metrics,
    end_to_end_eval,
    iou,
    map_at,
    match_detections,
    property_accuracy,
)
from .projection import (
    CubeFace,
    CubeFaceSet,
    FACE_IDS,
    cubemap_to_equirect,
    direction_to_equirect,
    direction_to_face_uv,
    equirect_to_cubemap,
    face_point_to_equirect,
    face_uv_to_direction,
)
from .recognizer import RecognizerParams, TagReading, classify_batch, classify_tag
from .synth import DatasetConfig, SceneSpec, TagPlacement, generate_dataset, render_scene
from .tour_builder import Hotspot, PanoramaRecord, TourGraph, backproject_reading, build_tour, export_tour, load_tour

__version__ = "0.1.0"
