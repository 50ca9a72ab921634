"""PoseTrack-style annotation JSON: loading with validation, canonical saving,
and conversion to and from the tracker/evaluator data structures.

Schema (all coordinates in pixels)::

    {
      "images": [{"id": int, "file_name": str, "width": int, "height": int}],
      "annotations": [{
          "id": int, "image_id": int,
          "keypoints": [x1, y1, c1, ..., xK, yK, cK],   # c = location probability, 0 = absent
          "availability": [a1, ..., aK],                 # optional, defaults to 1.0
          "bbox": [x, y, w, h],                          # optional
          "track_id": int,                               # optional
          "score": float,                                # optional
          "head_size": float                             # optional, ground truth only
      }],
      "categories": [{"name": "person", "keypoints": [...], "skeleton": [[i, j], ...],
                      "falloff": [...], "head_pair": [i, j]}]
    }
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .metrics import GroundTruthPerson, GroundTruthSequence, head_size_from_pose
from .skeleton import DEFAULT_SKELETON, BBox, Pose, SkeletonSpec, TrackedPose
from .tracker import FrameObservations


class AnnotationError(ValueError):
    pass


@dataclass
class ImageRecord:
    id: int
    file_name: str = ""
    width: int = 0
    height: int = 0


@dataclass
class AnnotationRecord:
    id: int
    image_id: int
    keypoints: list[float]
    availability: list[float] | None = None
    bbox: list[float] | None = None
    track_id: int | None = None
    score: float | None = None
    head_size: float | None = None


@dataclass
class AnnotationDocument:
    images: list[ImageRecord] = field(default_factory=list)
    annotations: list[AnnotationRecord] = field(default_factory=list)
    categories: list[dict] = field(default_factory=list)

    def frames(self) -> list[int]:
        return sorted(im.id for im in self.images)

    def by_image(self) -> dict[int, list[AnnotationRecord]]:
        out: dict[int, list[AnnotationRecord]] = {im.id: [] for im in self.images}
        for ann in self.annotations:
            out[ann.image_id].append(ann)
        return out


def _num(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise AnnotationError(f"{where}: expected a number, got {v!r}")
    if not math.isfinite(v):
        raise AnnotationError(f"{where}: non-finite value")
    return float(v)


def _int(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise AnnotationError(f"{where}: expected an integer, got {v!r}")
    return v


def _list(v, where: str, length: int | None = None) -> list:
    if not isinstance(v, list):
        raise AnnotationError(f"{where}: expected a list")
    if length is not None and len(v) != length:
        raise AnnotationError(f"{where}: expected {length} values, got {len(v)}")
    return v


def skeleton_from_categories(categories: Sequence[Mapping]) -> SkeletonSpec:
    if not categories:
        return DEFAULT_SKELETON
    cat = categories[0]
    names = cat.get("keypoints", DEFAULT_SKELETON.joint_names)
    kw: dict[str, Any] = {"joint_names": names}
    if "falloff" in cat:
        kw["falloff"] = cat["falloff"]
    elif len(names) == DEFAULT_SKELETON.K:
        kw["falloff"] = DEFAULT_SKELETON.falloff
    else:
        raise AnnotationError("categories[0]: custom joint list needs a 'falloff' entry")
    if "head_pair" in cat:
        kw["head_pair"] = cat["head_pair"]
    if "skeleton" in cat:
        kw["edges"] = cat["skeleton"]
    elif len(names) != DEFAULT_SKELETON.K:
        kw["edges"] = ()
    try:
        return SkeletonSpec(**kw)
    except (ValueError, TypeError) as exc:
        raise AnnotationError(f"categories[0]: {exc}") from None


def skeleton_category(spec: SkeletonSpec) -> dict:
    return {"name": "person", "keypoints": list(spec.joint_names),
            "skeleton": [list(e) for e in spec.edges], "falloff": list(spec.falloff),
            "head_pair": list(spec.head_pair)}


def document_from_dict(raw: Any) -> AnnotationDocument:
    if not isinstance(raw, dict):
        raise AnnotationError("top level must be an object")
    categories = raw.get("categories", [])
    _list(categories, "categories")
    spec = skeleton_from_categories(categories)
    K = spec.K

    images = []
    for i, im in enumerate(_list(raw.get("images"), "images")):
        where = f"images[{i}]"
        if not isinstance(im, dict) or "id" not in im:
            raise AnnotationError(f"{where}: expected an object with an 'id'")
        images.append(ImageRecord(
            _int(im["id"], f"{where}.id"), str(im.get("file_name", "")),
            _int(im.get("width", 0), f"{where}.width"), _int(im.get("height", 0), f"{where}.height")))
    image_ids = {im.id for im in images}
    if len(image_ids) != len(images):
        raise AnnotationError("images: duplicate image ids")

    annotations = []
    seen_ids = set()
    for i, a in enumerate(_list(raw.get("annotations", []), "annotations")):
        where = f"annotations[{i}]"
        if not isinstance(a, dict):
            raise AnnotationError(f"{where}: expected an object")
        for key in ("id", "image_id", "keypoints"):
            if key not in a:
                raise AnnotationError(f"{where}: missing '{key}'")
        ann_id = _int(a["id"], f"{where}.id")
        if ann_id in seen_ids:
            raise AnnotationError(f"{where}.id: duplicate annotation id {ann_id}")
        seen_ids.add(ann_id)
        image_id = _int(a["image_id"], f"{where}.image_id")
        if image_id not in image_ids:
            raise AnnotationError(f"{where}.image_id: refers to unknown image {image_id}")
        kps = [_num(v, f"{where}.keypoints[{k}]")
               for k, v in enumerate(_list(a["keypoints"], f"{where}.keypoints", 3 * K))]
        for k in range(K):
            if not 0.0 <= kps[3 * k + 2] <= 1.0:
                raise AnnotationError(f"{where}.keypoints[{3 * k + 2}]: confidence outside [0, 1]")
        avl = None
        if a.get("availability") is not None:
            avl = [_num(v, f"{where}.availability[{k}]")
                   for k, v in enumerate(_list(a["availability"], f"{where}.availability", K))]
            if any(not 0.0 <= v <= 1.0 for v in avl):
                raise AnnotationError(f"{where}.availability: values outside [0, 1]")
        bbox = None
        if a.get("bbox") is not None:
            bbox = [_num(v, f"{where}.bbox[{k}]") for k, v in enumerate(_list(a["bbox"], f"{where}.bbox", 4))]
            if bbox[2] < 0 or bbox[3] < 0:
                raise AnnotationError(f"{where}.bbox: negative width or height")
        track_id = a.get("track_id")
        if track_id is not None:
            track_id = _int(track_id, f"{where}.track_id")
        score = a.get("score")
        if score is not None:
            score = _num(score, f"{where}.score")
        head = a.get("head_size")
        if head is not None:
            head = _num(head, f"{where}.head_size")
            if head <= 0:
                raise AnnotationError(f"{where}.head_size: must be positive")
        annotations.append(AnnotationRecord(ann_id, image_id, kps, avl, bbox, track_id, score, head))
    return AnnotationDocument(images, annotations, categories)


def document_to_dict(doc: AnnotationDocument) -> dict:
    anns = []
    for a in doc.annotations:
        d = {"id": a.id, "image_id": a.image_id, "keypoints": list(a.keypoints)}
        for key in ("availability", "bbox", "track_id", "score", "head_size"):
            v = getattr(a, key)
            if v is not None:
                d[key] = list(v) if isinstance(v, list) else v
        anns.append(d)
    return {
        "images": [{"id": im.id, "file_name": im.file_name, "width": im.width,
                    "height": im.height} for im in doc.images],
        "annotations": anns,
        "categories": doc.categories,
    }


def load_annotations(path) -> AnnotationDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise AnnotationError(f"{path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise AnnotationError(f"{path}: not valid UTF-8") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AnnotationError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return document_from_dict(raw)
    except AnnotationError as exc:
        raise AnnotationError(f"{path}: {exc}") from None


def dumps_annotations(doc: AnnotationDocument) -> str:
    # Re-validate so that nothing unloadable is ever written.
    document_from_dict(document_to_dict(doc))
    try:
        return json.dumps(document_to_dict(doc), sort_keys=True, indent=1, allow_nan=False) + "\n"
    except ValueError as exc:
        raise AnnotationError(f"cannot serialise document: {exc}") from None


def save_annotations(doc: AnnotationDocument, path):
    text = dumps_annotations(doc)
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise AnnotationError(f"{path}: {exc.strerror}") from None


def pose_from_record(a: AnnotationRecord, K: int) -> Pose:
    kp = np.asarray(a.keypoints, dtype=float).reshape(K, 3)
    p_loc = kp[:, 2]
    p_avl = np.ones(K) if a.availability is None else np.asarray(a.availability, dtype=float)
    bbox = None if a.bbox is None else BBox.from_xywh(*a.bbox)
    return Pose(kp[:, :2], p_loc, p_avl, p_loc > 0, bbox)


def record_from_pose(pose: Pose, ann_id: int, image_id: int, track_id=None,
                     head_size=None, with_availability: bool = True) -> AnnotationRecord:
    kps = []
    for (x, y), c, on in zip(pose.xy, pose.p_loc, pose.present):
        kps += [float(x), float(y), float(c)] if on else [0.0, 0.0, 0.0]
    avl = [float(v) if on else 0.0 for v, on in zip(pose.p_avl, pose.present)]
    return AnnotationRecord(ann_id, image_id, kps, avl if with_availability else None,
                            [float(v) for v in pose.bbox.as_xywh()], track_id,
                            pose.score, head_size)


def document_to_observations(doc: AnnotationDocument, features: Mapping | None = None,
                             flows=None) -> list[FrameObservations]:
    """One FrameObservations per image, in image-id order.

    ``features`` maps (image_id, annotation_id) to a vector; ``flows`` maps a
    frame to its incoming FlowField.
    """
    K = skeleton_from_categories(doc.categories).K
    grouped = doc.by_image()
    out = []
    for im in sorted(doc.images, key=lambda r: r.id):
        anns = grouped[im.id]
        feats = None
        if features is not None:
            feats = [features.get((im.id, a.id)) for a in anns]
        size = (im.width, im.height) if im.width > 0 and im.height > 0 else None
        out.append(FrameObservations(
            im.id, [pose_from_record(a, K) for a in anns], feats,
            None if flows is None else flows.get(im.id), size, [a.id for a in anns]))
    return out


def document_to_predictions(doc: AnnotationDocument) -> dict[int, list[TrackedPose]]:
    K = skeleton_from_categories(doc.categories).K
    out: dict[int, list[TrackedPose]] = {}
    for image_id, anns in sorted(doc.by_image().items()):
        frame = []
        for a in anns:
            if a.track_id is None:
                raise AnnotationError(f"annotation {a.id}: prediction without track_id")
            frame.append(TrackedPose(a.track_id, pose_from_record(a, K)))
        out[image_id] = frame
    return out


def document_to_ground_truth(doc: AnnotationDocument) -> GroundTruthSequence:
    spec = skeleton_from_categories(doc.categories)
    frames: dict[int, list[GroundTruthPerson]] = {}
    for image_id, anns in sorted(doc.by_image().items()):
        people = []
        for a in anns:
            if a.track_id is None:
                raise AnnotationError(f"annotation {a.id}: ground truth without track_id")
            pose = pose_from_record(a, spec.K)
            head = a.head_size
            if head is None:
                i, j = spec.head_pair
                if not (pose.present[i] and pose.present[j]):
                    raise AnnotationError(f"annotation {a.id}: no head_size and head joints not visible")
                head = head_size_from_pose(pose, spec)
            if not head > 0:
                raise AnnotationError(f"annotation {a.id}: zero head size")
            people.append(GroundTruthPerson(a.track_id, pose, head))
        frames[image_id] = people
    return GroundTruthSequence(frames)


def tracks_to_document(results: Mapping[int, Sequence[TrackedPose]], images: Sequence[ImageRecord],
                       spec: SkeletonSpec = DEFAULT_SKELETON) -> AnnotationDocument:
    known = {im.id for im in images}
    imgs = list(images) + [ImageRecord(t) for t in sorted(results) if t not in known]
    anns = []
    for t in sorted(results):
        for tp in results[t]:
            anns.append(record_from_pose(tp.pose, len(anns) + 1, t, tp.track_id))
    return AnnotationDocument(sorted(imgs, key=lambda r: r.id), anns, [skeleton_category(spec)])
