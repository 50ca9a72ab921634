"""Online multi-person pose tracker.

Per frame: confidence filtering, OKS-NMS, gated Hungarian association against
active tracks, flow-based revival of tracks the detector missed, gallery
retrieval for leftover detections, and fresh id allocation for the rest.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .association import DEFAULT_MATCH_THRESHOLD, associate
from .confidence import filter_keypoints
from .reid import Gallery, ReidConfig
from .revision import (FieldFlowProvider, FlowField, FlowProvider, RevisionConfig,
                       ConstantVelocityFlowProvider, greedy_nms, propose_box,
                       score_filter, suppress_candidates)
from .skeleton import (DEFAULT_SKELETON, Pose, SkeletonSpec, TrackedPose,
                       check_pose, oks)

ACTIVE = "active"
LOST = "lost"


@dataclass(frozen=True)
class TrackerConfig:
    match_threshold: float = DEFAULT_MATCH_THRESHOLD
    oks_visibility_threshold: float = 0.0
    revision: RevisionConfig = RevisionConfig()
    reid: ReidConfig = ReidConfig()
    enable_revision: bool = True
    enable_reid: bool = True
    # "fused" filters on p_avl * p_loc, "location" drops availability entirely.
    confidence_source: str = "fused"
    history_depth: int = 2

    def __post_init__(self):
        if not 0.0 <= self.match_threshold <= 1.0:
            raise ValueError("match_threshold outside [0, 1]")
        if not 0.0 <= self.oks_visibility_threshold <= 1.0:
            raise ValueError("oks_visibility_threshold outside [0, 1]")
        if self.confidence_source not in ("fused", "location"):
            raise ValueError(f"unknown confidence_source {self.confidence_source!r}")
        if self.history_depth < 1:
            raise ValueError("history_depth must be at least 1")

    @property
    def conf_threshold(self) -> float:
        return self.revision.conf_threshold

    @property
    def nms_oks_threshold(self) -> float:
        return self.revision.nms_oks_threshold

    @property
    def revival_margin(self) -> float:
        return self.revision.margin

    def with_threshold(self, conf_threshold: float) -> "TrackerConfig":
        return replace(self, revision=replace(self.revision, conf_threshold=conf_threshold))


@dataclass
class FrameObservations:
    frame: int
    detections: list[Pose]
    features: list[np.ndarray | None] | None = None
    flow: FlowField | None = None
    frame_size: tuple[int, int] | None = None
    detection_ids: list[int] | None = None


@dataclass
class Track:
    id: int
    pose: Pose
    history: deque
    last_frame: int
    last_detected: int
    state: str = ACTIVE
    lost_since: int | None = None
    feature: np.ndarray | None = None


class PoseTracker:
    def __init__(self, spec: SkeletonSpec = DEFAULT_SKELETON, cfg: TrackerConfig = TrackerConfig(),
                 flow_provider: FlowProvider | None = None):
        self.spec = spec
        self.cfg = cfg
        self.flow_provider = flow_provider or ConstantVelocityFlowProvider()
        self.tracks: dict[int, Track] = {}
        self.gallery = Gallery()
        self.next_id = 1
        self.last_frame: int | None = None

    def _prepare(self, obs: FrameObservations) -> tuple[list[Pose], list]:
        K = self.spec.K
        feats = obs.features if obs.features is not None else [None] * len(obs.detections)
        if len(feats) != len(obs.detections):
            raise ValueError(f"frame {obs.frame}: {len(feats)} features for "
                             f"{len(obs.detections)} detections")
        dets, kept_feats = [], []
        for det, feat in zip(obs.detections, feats):
            check_pose(det, self.spec)
            if self.cfg.confidence_source == "location":
                det = det.replace(p_avl=np.ones(K))
            det = filter_keypoints(det, self.cfg.conf_threshold)
            if det.num_present == 0:
                continue
            dets.append(det)
            kept_feats.append(feat)
        th_v = self.cfg.oks_visibility_threshold
        kept = sorted(greedy_nms([d.score for d in dets],
                                 lambda i, k: oks(dets[i], dets[k], self.spec, th_v),
                                 self.cfg.nms_oks_threshold))
        return [dets[i] for i in kept], [kept_feats[i] for i in kept]

    def _new_track(self, pose: Pose, frame: int, feature) -> Track:
        tr = Track(self.next_id, pose, deque([pose], maxlen=self.cfg.history_depth),
                   frame, frame, feature=feature)
        self.tracks[tr.id] = tr
        self.next_id += 1
        return tr

    def _update(self, tr: Track, pose: Pose, frame: int, feature, detected: bool):
        tr.pose = pose
        tr.history.append(pose)
        tr.last_frame = frame
        if detected:
            tr.last_detected = frame
        if feature is not None:
            tr.feature = np.asarray(feature, dtype=float)
        tr.state = ACTIVE
        tr.lost_since = None

    def _warp(self, tr: Track, obs: FrameObservations) -> Pose | None:
        if obs.flow is not None:
            warped = FieldFlowProvider({obs.frame: obs.flow}).warp(tr.history, obs.frame)
        else:
            warped = self.flow_provider.warp(tr.history, obs.frame)
        if warped is None:
            return None
        size = obs.frame_size
        if size is None and obs.flow is not None:
            size = (obs.flow.width, obs.flow.height)
        if size is not None:
            w, h = size
            x, y = warped.xy[:, 0], warped.xy[:, 1]
            inside = (x >= 0) & (x < w) & (y >= 0) & (y < h)
            warped = warped.replace(present=warped.present & inside)
        return warped

    def step(self, obs: FrameObservations) -> list[TrackedPose]:
        if self.last_frame is not None and obs.frame <= self.last_frame:
            raise ValueError(f"frame {obs.frame} does not follow frame {self.last_frame}")
        cfg, t = self.cfg, obs.frame
        dets, feats = self._prepare(obs)

        active = [tr for _, tr in sorted(self.tracks.items()) if tr.state == ACTIVE]
        res = associate([tr.pose for tr in active], dets, self.spec,
                        cfg.oks_visibility_threshold, cfg.match_threshold,
                        row_ids=[tr.id for tr in active])
        for tid, j, _ in res.matches:
            self._update(self.tracks[tid], dets[j], t, feats[j], detected=True)

        revived = set()
        if cfg.enable_revision:
            candidates = []
            for tid in res.unmatched_tracks:
                tr = self.tracks[tid]
                # Only poses that came from a detection are carried forward.
                if tr.last_detected != tr.last_frame:
                    continue
                warped = self._warp(tr, obs)
                if warped is None:
                    continue
                cand = propose_box(warped, cfg.revival_margin, tid)
                if cand is not None:
                    candidates.append(cand)
            candidates = score_filter(candidates, cfg.revision)
            for cand in suppress_candidates(candidates, dets, self.spec, cfg.revision):
                self._update(self.tracks[cand.track_id], cand.pose, t, None, detected=False)
                revived.add(cand.track_id)

        for j in res.unmatched_detections:
            tid = None
            if cfg.enable_reid and feats[j] is not None and len(self.gallery):
                tid = self.gallery.retrieve(feats[j], cfg.reid)
            if tid is not None and tid in self.tracks:
                tr = self.tracks[tid]
                tr.history.clear()
                self._update(tr, dets[j], t, feats[j], detected=True)
            else:
                self._new_track(dets[j], t, feats[j])

        for tid in res.unmatched_tracks:
            if tid in revived:
                continue
            tr = self.tracks[tid]
            tr.state = LOST
            tr.lost_since = t
            if cfg.enable_reid and tr.feature is not None:
                self.gallery.insert(tid, tr.feature, tr.last_frame)

        self.gallery.prune(t, cfg.reid)
        for tid in [i for i, tr in self.tracks.items()
                    if tr.state == LOST and i not in self.gallery]:
            del self.tracks[tid]

        self.last_frame = t
        return [TrackedPose(tid, tr.pose) for tid, tr in sorted(self.tracks.items())
                if tr.state == ACTIVE]


def run(sequence: Iterable[FrameObservations], spec: SkeletonSpec = DEFAULT_SKELETON,
        cfg: TrackerConfig = TrackerConfig(),
        flow_provider: FlowProvider | None = None) -> dict[int, list[TrackedPose]]:
    """Track a whole sequence; returns {frame: [(track_id, pose), ...]}."""
    tracker = PoseTracker(spec, cfg, flow_provider)
    return {obs.frame: tracker.step(obs) for obs in sequence}
