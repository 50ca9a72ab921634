"""Geometric primitives: skeleton layout, keypoints, poses, boxes and the
similarity measures (IoU, OKS) that the rest of the package builds on."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

DEFAULT_MARGIN = 0.10
SCALE_FLOOR = 1.0

POSETRACK_JOINTS = (
    "right_ankle", "right_knee", "right_hip", "left_hip", "left_knee",
    "left_ankle", "right_wrist", "right_elbow", "right_shoulder",
    "left_shoulder", "left_elbow", "left_wrist", "head_bottom", "nose",
    "head_top",
)

# COCO per-joint sigmas; head_bottom/head_top borrow the ear value.
POSETRACK_SIGMAS = (
    0.089, 0.087, 0.107, 0.107, 0.087, 0.089, 0.062, 0.072, 0.079,
    0.079, 0.072, 0.062, 0.035, 0.026, 0.035,
)

# Limb edges used for drawing.
POSETRACK_EDGES = (
    (0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (6, 7), (7, 8), (8, 9),
    (9, 10), (10, 11), (8, 12), (9, 12), (2, 8), (3, 9), (12, 13), (13, 14),
)


class SkeletonMismatchError(ValueError):
    """Raised when poses do not conform to the skeleton they are used with."""


@dataclass(frozen=True)
class SkeletonSpec:
    """Joint layout: names, per-joint falloff constants and the head segment.

    The falloff ``k_i`` follows the COCO convention ``k_i = 2 * sigma_i``.
    """

    joint_names: tuple[str, ...] = POSETRACK_JOINTS
    falloff: tuple[float, ...] = tuple(2 * s for s in POSETRACK_SIGMAS)
    head_pair: tuple[int, int] = (12, 14)
    edges: tuple[tuple[int, int], ...] = POSETRACK_EDGES

    def __post_init__(self):
        object.__setattr__(self, "joint_names", tuple(self.joint_names))
        object.__setattr__(self, "falloff", tuple(float(k) for k in self.falloff))
        object.__setattr__(self, "head_pair", tuple(int(i) for i in self.head_pair))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        K = len(self.joint_names)
        if K < 1:
            raise SkeletonMismatchError("skeleton needs at least one joint")
        if len(self.falloff) != K:
            raise SkeletonMismatchError(
                f"falloff has {len(self.falloff)} entries, expected {K}")
        if any(not (k > 0 and math.isfinite(k)) for k in self.falloff):
            raise SkeletonMismatchError("falloff constants must be positive")
        a, b = self.head_pair
        if a == b or not (0 <= a < K and 0 <= b < K):
            raise SkeletonMismatchError(f"invalid head pair {self.head_pair}")
        for i, j in self.edges:
            if not (0 <= i < K and 0 <= j < K):
                raise SkeletonMismatchError(f"edge ({i}, {j}) out of range")

    @property
    def K(self) -> int:
        return len(self.joint_names)

    @property
    def falloff_array(self) -> np.ndarray:
        return np.asarray(self.falloff, dtype=float)


@dataclass(frozen=True)
class BBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        vals = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite box {vals}")
        if self.x_max < self.x_min or self.y_max < self.y_min:
            raise ValueError(f"inverted box {vals}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_xywh(self) -> list[float]:
        return [self.x_min, self.y_min, self.width, self.height]

    @classmethod
    def from_xywh(cls, x, y, w, h) -> "BBox":
        return cls(x, y, x + w, y + h)


class Keypoint(NamedTuple):
    x: float
    y: float
    p_loc: float = 1.0
    p_avl: float = 1.0

    @property
    def p_conf(self) -> float:
        return self.p_avl * self.p_loc


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Pose:
    """One person's keypoints plus box.

    ``xy`` is (K, 2); ``p_loc``, ``p_avl`` and ``present`` are (K,).
    Absent joints keep whatever coordinates they had but never count
    towards similarities, scores or metrics.
    """

    xy: np.ndarray
    p_loc: np.ndarray
    p_avl: np.ndarray
    present: np.ndarray
    bbox: BBox = field(default=None)

    def __post_init__(self):
        xy = _frozen(self.xy).reshape(-1, 2)
        K = len(xy)
        p_loc = _frozen(self.p_loc).reshape(-1)
        p_avl = _frozen(self.p_avl).reshape(-1)
        present = np.array(self.present, dtype=bool).reshape(-1)
        present.setflags(write=False)
        if not (len(p_loc) == len(p_avl) == len(present) == K):
            raise SkeletonMismatchError("keypoint arrays disagree in length")
        for name, p in (("p_loc", p_loc), ("p_avl", p_avl)):
            if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
                raise ValueError(f"{name} must lie in [0, 1]")
        if np.any(~np.isfinite(xy[present])):
            raise ValueError("non-finite keypoint coordinates")
        object.__setattr__(self, "xy", xy)
        object.__setattr__(self, "p_loc", p_loc)
        object.__setattr__(self, "p_avl", p_avl)
        object.__setattr__(self, "present", present)
        if self.bbox is None:
            if present.any():
                box = bbox_from_points(xy[present], DEFAULT_MARGIN)
            else:
                box = BBox(0.0, 0.0, 0.0, 0.0)
            object.__setattr__(self, "bbox", box)

    @classmethod
    def create(cls, xy, p_loc=None, p_avl=None, present=None, bbox=None) -> "Pose":
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        K = len(xy)
        p_loc = np.ones(K) if p_loc is None else p_loc
        p_avl = np.ones(K) if p_avl is None else p_avl
        present = np.ones(K, dtype=bool) if present is None else present
        return cls(xy, p_loc, p_avl, present, bbox)

    @classmethod
    def from_keypoints(cls, keypoints: Sequence[Keypoint | None], bbox=None) -> "Pose":
        K = len(keypoints)
        xy = np.zeros((K, 2))
        p_loc = np.zeros(K)
        p_avl = np.zeros(K)
        present = np.zeros(K, dtype=bool)
        for i, kp in enumerate(keypoints):
            if kp is None:
                continue
            xy[i] = kp.x, kp.y
            p_loc[i], p_avl[i], present[i] = kp.p_loc, kp.p_avl, True
        return cls(xy, p_loc, p_avl, present, bbox)

    @property
    def K(self) -> int:
        return len(self.xy)

    @property
    def p_conf(self) -> np.ndarray:
        return self.p_avl * self.p_loc

    @property
    def score(self) -> float:
        """Mean fused confidence over present keypoints (0 if none)."""
        if not self.present.any():
            return 0.0
        return float(np.mean(self.p_conf[self.present]))

    @property
    def num_present(self) -> int:
        return int(self.present.sum())

    def keypoints(self) -> list[Keypoint | None]:
        return [
            Keypoint(float(x), float(y), float(pl), float(pa)) if on else None
            for (x, y), pl, pa, on in zip(self.xy, self.p_loc, self.p_avl, self.present)
        ]

    def replace(self, **changes) -> "Pose":
        kw = dict(xy=self.xy, p_loc=self.p_loc, p_avl=self.p_avl,
                  present=self.present, bbox=self.bbox)
        kw.update(changes)
        return Pose(**kw)


def iou(a: BBox, b: BBox) -> float:
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    inter = max(iw, 0.0) * max(ih, 0.0)
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    return inter / union


def object_scale(pose: Pose) -> float:
    """sqrt of the box area, floored at ``SCALE_FLOOR`` pixels."""
    return max(math.sqrt(pose.bbox.area), SCALE_FLOOR)


def check_pose(pose: Pose, spec: SkeletonSpec):
    if pose.K != spec.K:
        raise SkeletonMismatchError(
            f"pose has {pose.K} keypoints but skeleton defines {spec.K}")


def kernel_mean(p: Pose, q: Pose, spec: SkeletonSpec, mask: np.ndarray) -> float:
    """Mean of exp(-d_i^2 / (2 s^2 k_i^2)) over ``mask``; 0 if the mask is empty.

    s^2 is the geometric mean of both poses' squared scales, which keeps the
    kernel symmetric in (p, q).
    """
    if not mask.any():
        return 0.0
    s2 = object_scale(p) * object_scale(q)
    d2 = np.sum((p.xy[mask] - q.xy[mask]) ** 2, axis=1)
    k = spec.falloff_array[mask]
    return float(np.mean(np.exp(-d2 / (2.0 * s2 * k * k))))


def oks(p: Pose, q: Pose, spec: SkeletonSpec, visibility_threshold: float = 0.0) -> float:
    """Object keypoint similarity over joints present and confident in both poses."""
    check_pose(p, spec)
    check_pose(q, spec)
    mask = (p.present & q.present
            & (p.p_conf > visibility_threshold) & (q.p_conf > visibility_threshold))
    return kernel_mean(p, q, spec, mask)


def bbox_from_points(points, margin: float = DEFAULT_MARGIN) -> BBox:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("cannot bound an empty point set")
    x0, y0 = pts.min(axis=0)
    x1, y1 = pts.max(axis=0)
    mx, my = margin * (x1 - x0), margin * (y1 - y0)
    return BBox(float(x0 - mx), float(y0 - my), float(x1 + mx), float(y1 + my))


def bbox_from_keypoints(keypoints: Sequence[Keypoint | None], margin: float = DEFAULT_MARGIN) -> BBox:
    """Minimum bounding rectangle of the present keypoints, grown by ``margin``
    times the extent on each side."""
    pts = [(kp.x, kp.y) for kp in keypoints if kp is not None]
    if not pts:
        raise ValueError("no keypoints present")
    return bbox_from_points(pts, margin)


DEFAULT_SKELETON = SkeletonSpec()


class TrackedPose(NamedTuple):
    track_id: int
    pose: Pose
