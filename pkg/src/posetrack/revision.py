"""Box revision for trajectories the detector missed.

Unmatched tracks are carried into the current frame with optical flow, boxed
by the minimum bounding rectangle of the warped keypoints, filtered by their
average keypoint confidence and de-duplicated against current detections with
a shared-keypoint overlap measure. OKS-based NMS for the detection stage lives
here too, as does the dense flow file format.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol, Sequence

import numpy as np

from .skeleton import (DEFAULT_MARGIN, BBox, Pose, SkeletonSpec, bbox_from_points,
                       check_pose, iou, kernel_mean, oks)

FLOW_MAGIC = b"PEH1"


@dataclass(frozen=True)
class RevisionConfig:
    score_threshold: float = 0.35
    overlap_threshold: float = 0.5
    iou_gate: float = 0.1
    conf_threshold: float = 0.35
    nms_oks_threshold: float = 0.6
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        for name in ("score_threshold", "overlap_threshold", "iou_gate",
                     "conf_threshold", "nms_oks_threshold", "margin"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")


class FlowField:
    """Dense displacement field for one frame transition (t-1 -> t).

    ``vectors`` has shape (H, W, 2) holding (dx, dy) per pixel.
    """

    def __init__(self, vectors):
        v = np.asarray(vectors, dtype=np.float64)
        if v.ndim != 3 or v.shape[2] != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError(f"flow vectors must be (H, W, 2), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("flow contains non-finite values")
        self.vectors = v

    @property
    def width(self) -> int:
        return self.vectors.shape[1]

    @property
    def height(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def uniform(cls, width: int, height: int, dx: float, dy: float) -> "FlowField":
        v = np.empty((height, width, 2))
        v[..., 0] = dx
        v[..., 1] = dy
        return cls(v)

    def sample(self, points) -> np.ndarray:
        """Bilinear flow at (N, 2) points; out-of-grid points clamp to the edge."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        x = np.clip(pts[:, 0], 0, self.width - 1)
        y = np.clip(pts[:, 1], 0, self.height - 1)
        x0 = np.floor(x).astype(int)
        y0 = np.floor(y).astype(int)
        x1 = np.minimum(x0 + 1, self.width - 1)
        y1 = np.minimum(y0 + 1, self.height - 1)
        fx = (x - x0)[:, None]
        fy = (y - y0)[:, None]
        v = self.vectors
        top = v[y0, x0] * (1 - fx) + v[y0, x1] * fx
        bottom = v[y1, x0] * (1 - fx) + v[y1, x1] * fx
        return top * (1 - fy) + bottom * fy

    def __eq__(self, other):
        return isinstance(other, FlowField) and np.array_equal(self.vectors, other.vectors)


def flow_path(directory, frame: int) -> Path:
    """File holding the transition frame-1 -> frame."""
    return Path(directory) / f"flow_{frame:06d}.bin"


def write_flow(flow: FlowField, path):
    data = np.ascontiguousarray(flow.vectors, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(FLOW_MAGIC)
        fh.write(struct.pack("<II", flow.width, flow.height))
        fh.write(data.tobytes())


def read_flow(path) -> FlowField:
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != FLOW_MAGIC:
        raise ValueError(f"{path}: not a flow file (bad magic)")
    w, h = struct.unpack("<II", raw[4:12])
    expected = 12 + w * h * 8
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes for {w}x{h}, got {len(raw)}")
    vec = np.frombuffer(raw, dtype="<f4", offset=12).reshape(h, w, 2)
    return FlowField(vec.astype(np.float64))


def warp_pose(pose: Pose, flow: FlowField) -> Pose:
    """Translate every keypoint by the flow sampled at its location."""
    moved = pose.xy + flow.sample(pose.xy)
    return pose.replace(xy=moved)


def translate_pose(pose: Pose, dx: float, dy: float) -> Pose:
    return pose.replace(xy=pose.xy + np.array([dx, dy]))


class FlowProvider(Protocol):
    def warp(self, history: Sequence[Pose], frame: int) -> Pose | None:
        """Carry the newest pose in ``history`` (oldest first) from frame-1 to
        ``frame``; None when no flow is available."""


class IdentityFlowProvider:
    def warp(self, history, frame):
        return history[-1]


class ConstantVelocityFlowProvider:
    """Uniform per-track displacement equal to the last observed step."""

    def warp(self, history, frame):
        last = history[-1]
        if len(history) < 2:
            return last
        prev = history[-2]
        shared = last.present & prev.present
        if not shared.any():
            return last
        dx, dy = np.mean(last.xy[shared] - prev.xy[shared], axis=0)
        return translate_pose(last, dx, dy)


class FieldFlowProvider:
    """Dense flow fields held in memory, keyed by target frame."""

    def __init__(self, fields: dict[int, FlowField] | None = None):
        self.fields = dict(fields or {})

    def field(self, frame: int) -> FlowField | None:
        return self.fields.get(frame)

    def warp(self, history, frame):
        f = self.field(frame)
        return None if f is None else warp_pose(history[-1], f)


class DenseFileFlowProvider(FieldFlowProvider):
    """Loads ``flow_%06d.bin`` files on demand from a directory."""

    def __init__(self, directory):
        super().__init__()
        self.directory = Path(directory)

    def field(self, frame):
        if frame not in self.fields:
            p = flow_path(self.directory, frame)
            self.fields[frame] = read_flow(p) if p.exists() else None
        return self.fields[frame]


@dataclass(frozen=True)
class Candidate:
    bbox: BBox
    pose: Pose
    track_id: int | None = None

    @property
    def score(self) -> float:
        return self.pose.score


def propose_box(warped: Pose, margin: float = DEFAULT_MARGIN, track_id=None) -> Candidate | None:
    """Minimum bounding rectangle around the present warped keypoints.

    Poses with fewer than two present keypoints are not revivable; None is
    returned for them.
    """
    if warped.num_present < 2:
        return None
    box = bbox_from_points(warped.xy[warped.present], margin)
    return Candidate(box, warped.replace(bbox=box), track_id)


def score_filter(candidates: Sequence[Candidate], cfg: RevisionConfig = RevisionConfig()) -> list[Candidate]:
    return [c for c in candidates if c.score > cfg.score_threshold]


def overlap_similarity(p: Pose, q: Pose, spec: SkeletonSpec, cfg: RevisionConfig = RevisionConfig()) -> float:
    """Shared-keypoint overlap of two poses.

    Zero unless the boxes overlap with IoU above ``cfg.iou_gate``; otherwise
    the OKS kernel averaged over joints whose confidence exceeds
    ``cfg.conf_threshold`` in both poses (zero if there are none).
    """
    check_pose(p, spec)
    check_pose(q, spec)
    if iou(p.bbox, q.bbox) <= cfg.iou_gate:
        return 0.0
    th = cfg.conf_threshold
    mask = p.present & q.present & (p.p_conf > th) & (q.p_conf > th)
    return kernel_mean(p, q, spec, mask)


def _score_order(scores) -> list[int]:
    return sorted(range(len(scores)), key=lambda i: (-scores[i], i))


def suppress_candidates(candidates: Sequence[Candidate], detections: Sequence[Pose],
                        spec: SkeletonSpec, cfg: RevisionConfig = RevisionConfig()) -> list[Candidate]:
    """Drop candidates that duplicate a detection or a stronger candidate.

    Candidates are visited by descending score; the survivors are returned in
    their input order.
    """
    kept: list[int] = []
    for i in _score_order([c.score for c in candidates]):
        c = candidates[i]
        rivals = list(detections) + [candidates[k].pose for k in kept]
        if any(overlap_similarity(c.pose, r, spec, cfg) > cfg.overlap_threshold for r in rivals):
            continue
        kept.append(i)
    return [candidates[i] for i in sorted(kept)]


def greedy_nms(scores: Sequence[float], similarity: Callable[[int, int], float],
               threshold: float) -> list[int]:
    """Indices kept by greedy NMS, in descending-score order."""
    kept: list[int] = []
    for i in _score_order(list(scores)):
        if all(similarity(i, k) <= threshold for k in kept):
            kept.append(i)
    return kept


def oks_nms(poses: Sequence[Pose], spec: SkeletonSpec, threshold: float = 0.6,
            visibility_threshold: float = 0.0) -> list[Pose]:
    """Greedy NMS with OKS as the overlap measure; survivors keep input order."""
    kept = greedy_nms([p.score for p in poses],
                      lambda i, k: oks(poses[i], poses[k], spec, visibility_threshold),
                      threshold)
    return [poses[i] for i in sorted(kept)]
