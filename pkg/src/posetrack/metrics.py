"""Per-joint CLEAR-MOT (MOTA) and average-precision evaluation.

A predicted keypoint matches a ground-truth keypoint of the same joint class
when it lies within ``tau_factor`` times that person's head segment length
(PCKh-style, 0.5 by default).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .association import hungarian_assign
from .skeleton import DEFAULT_SKELETON, Pose, SkeletonSpec, TrackedPose

DEFAULT_TAU = 0.5


class GroundTruthPerson(NamedTuple):
    track_id: int
    pose: Pose  # ``present`` doubles as the visibility flag
    head_size: float


@dataclass
class GroundTruthSequence:
    frames: dict[int, list[GroundTruthPerson]] = field(default_factory=dict)

    def __post_init__(self):
        for t, people in self.frames.items():
            ids = [p.track_id for p in people]
            if len(set(ids)) != len(ids):
                raise ValueError(f"frame {t}: duplicate ground-truth ids")
            for p in people:
                if not p.head_size > 0:
                    raise ValueError(f"frame {t}: head size of id {p.track_id} must be positive")


def head_size_from_pose(pose: Pose, spec: SkeletonSpec = DEFAULT_SKELETON) -> float:
    a, b = spec.head_pair
    return float(np.linalg.norm(pose.xy[a] - pose.xy[b]))


def _within_matching(dist: np.ndarray, radius: np.ndarray) -> list[tuple[int, int]]:
    """Max-cardinality, then min-total-distance matching among pairs with
    dist[i, j] <= radius[j]."""
    if dist.size == 0:
        return []
    valid = dist <= radius[None, :]
    if not valid.any():
        return []
    big = 1.0 + float(np.sum(dist[valid]))
    w = np.where(valid, big - dist, 0.0)
    return [(i, j) for i, j in hungarian_assign(w) if valid[i, j]]


def _joint_arrays(people, joint, with_radius, tau):
    idx = [k for k, p in enumerate(people) if p.pose.present[joint]]
    xy = np.array([people[k].pose.xy[joint] for k in idx]).reshape(-1, 2)
    radius = np.array([tau * people[k].head_size for k in idx]) if with_radius else None
    return idx, xy, radius


def _pairwise(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=2))


def match_joints(predictions: Sequence[TrackedPose], ground_truth: Sequence[GroundTruthPerson],
                 tau_factor: float = DEFAULT_TAU, spec: SkeletonSpec = DEFAULT_SKELETON
                 ) -> list[list[tuple[int, int, float]]]:
    """For each joint class, (prediction index, gt index, distance) triples."""
    out = []
    for j in range(spec.K):
        pi, pxy, _ = _joint_arrays(predictions, j, False, tau_factor)
        gi, gxy, rad = _joint_arrays(ground_truth, j, True, tau_factor)
        d = _pairwise(pxy, gxy)
        out.append([(pi[a], gi[b], float(d[a, b])) for a, b in _within_matching(d, rad)])
    return out


def _ratio(num, den):
    return None if den == 0 else 1.0 - num / den


@dataclass
class MotaReport:
    joint_names: list[str]
    fp: list[int]
    fn: list[int]
    idsw: list[int]
    num_gt: list[int]

    @property
    def joint_mota(self) -> list[float | None]:
        return [_ratio(a + b + c, g) for a, b, c, g in zip(self.fp, self.fn, self.idsw, self.num_gt)]

    @property
    def total_fp(self) -> int:
        return sum(self.fp)

    @property
    def total_fn(self) -> int:
        return sum(self.fn)

    @property
    def total_idsw(self) -> int:
        return sum(self.idsw)

    @property
    def total_gt(self) -> int:
        return sum(self.num_gt)

    @property
    def has_ground_truth(self) -> bool:
        return self.total_gt > 0

    @property
    def mota(self) -> float | None:
        """None signals the "no ground truth" state."""
        return _ratio(self.total_fp + self.total_fn + self.total_idsw, self.total_gt)

    def to_dict(self) -> dict:
        return {
            "joints": [
                {"joint": n, "fp": a, "fn": b, "idsw": c, "gt": g, "mota": m}
                for n, a, b, c, g, m in zip(self.joint_names, self.fp, self.fn,
                                            self.idsw, self.num_gt, self.joint_mota)
            ],
            "total": {"fp": self.total_fp, "fn": self.total_fn, "idsw": self.total_idsw,
                      "gt": self.total_gt, "mota": self.mota},
        }


@dataclass
class ApReport:
    joint_names: list[str]
    ap: list[float | None]  # None where the joint has no ground truth

    @property
    def has_ground_truth(self) -> bool:
        return any(a is not None for a in self.ap)

    @property
    def mean_ap(self) -> float:
        vals = [a for a in self.ap if a is not None]
        return float(np.mean(vals)) if vals else 0.0

    def to_dict(self) -> dict:
        return {"joints": [{"joint": n, "ap": a} for n, a in zip(self.joint_names, self.ap)],
                "total": {"map": self.mean_ap}}


def _frames(predictions, gt):
    return sorted(set(predictions) | set(gt.frames))


def mota(predictions: Mapping[int, Sequence[TrackedPose]], gt: GroundTruthSequence,
         tau_factor: float = DEFAULT_TAU, spec: SkeletonSpec = DEFAULT_SKELETON) -> MotaReport:
    """CLEAR-MOT counts per joint class.

    A ground-truth identity keeps its previous predicted partner while that
    pair is still within range; remaining keypoints are matched with the
    Hungarian method, and a match to a different partner than last time is an
    identity switch.
    """
    K = spec.K
    fp, fn, idsw, ngt = [0] * K, [0] * K, [0] * K, [0] * K
    mapping: list[dict[int, int]] = [{} for _ in range(K)]
    for t in _frames(predictions, gt):
        preds = list(predictions.get(t, []))
        gts = gt.frames.get(t, [])
        for j in range(K):
            pi, pxy, _ = _joint_arrays(preds, j, False, tau_factor)
            gi, gxy, rad = _joint_arrays(gts, j, True, tau_factor)
            d = _pairwise(pxy, gxy)
            pred_ids = [preds[k].track_id for k in pi]
            gt_ids = [gts[k].track_id for k in gi]
            m = mapping[j]
            used_p, used_g = set(), set()
            for b, g_id in enumerate(gt_ids):
                prev = m.get(g_id)
                if prev is None or prev not in pred_ids:
                    continue
                a = pred_ids.index(prev)
                if a not in used_p and d[a, b] <= rad[b]:
                    used_p.add(a)
                    used_g.add(b)
            rest_p = [a for a in range(len(pi)) if a not in used_p]
            rest_g = [b for b in range(len(gi)) if b not in used_g]
            sub = _within_matching(d[np.ix_(rest_p, rest_g)], rad[rest_g])
            for a, b in sub:
                a, b = rest_p[a], rest_g[b]
                g_id, p_id = gt_ids[b], pred_ids[a]
                if g_id in m and m[g_id] != p_id:
                    idsw[j] += 1
                m[g_id] = p_id
                used_p.add(a)
                used_g.add(b)
            fp[j] += len(pi) - len(used_p)
            fn[j] += len(gi) - len(used_g)
            ngt[j] += len(gi)
    return MotaReport(list(spec.joint_names), fp, fn, idsw, ngt)


def average_precision(tp_flags: Sequence[bool], num_positives: int) -> float | None:
    """Area under the interpolated precision/recall curve of a ranked list."""
    if num_positives == 0:
        return None
    if len(tp_flags) == 0:
        return 0.0
    tp = np.cumsum(np.asarray(tp_flags, dtype=float))
    n = np.arange(1, len(tp_flags) + 1)
    recall = np.concatenate([[0.0], tp / num_positives, [1.0]])
    precision = np.concatenate([[0.0], tp / n, [0.0]])
    for i in range(len(precision) - 2, -1, -1):
        precision[i] = max(precision[i], precision[i + 1])
    steps = np.nonzero(recall[1:] != recall[:-1])[0]
    return float(np.sum((recall[steps + 1] - recall[steps]) * precision[steps + 1]))


def map_eval(predictions: Mapping[int, Sequence[TrackedPose]], gt: GroundTruthSequence,
             tau_factor: float = DEFAULT_TAU, spec: SkeletonSpec = DEFAULT_SKELETON) -> ApReport:
    """Per-joint AP with predictions ranked by pose score over the sequence."""
    aps = []
    frames = _frames(predictions, gt)
    for j in range(spec.K):
        ranked = []
        npos = 0
        for t in frames:
            for k, tp in enumerate(predictions.get(t, [])):
                if tp.pose.present[j]:
                    ranked.append((-tp.pose.score, t, k, tp.pose.xy[j]))
            npos += sum(1 for g in gt.frames.get(t, []) if g.pose.present[j])
        ranked.sort(key=lambda r: r[:3])
        claimed: set[tuple[int, int]] = set()
        flags = []
        for _, t, _, xy in ranked:
            best, best_d = None, math.inf
            for b, g in enumerate(gt.frames.get(t, [])):
                if not g.pose.present[j] or (t, b) in claimed:
                    continue
                dd = float(np.linalg.norm(xy - g.pose.xy[j]))
                if dd <= tau_factor * g.head_size and dd < best_d:
                    best, best_d = b, dd
            if best is not None:
                claimed.add((t, best))
            flags.append(best is not None)
        aps.append(average_precision(flags, npos))
    return ApReport(list(spec.joint_names), aps)


def _fmt(v, pct=True):
    if v is None:
        return "n/a"
    return f"{100 * v:.1f}" if pct else str(v)


def format_report(mota_report: MotaReport, ap_report: ApReport) -> str:
    lines = [f"{'joint':<16}{'AP':>8}{'MOTA':>8}{'FP':>8}{'FN':>8}{'IDSW':>8}{'GT':>8}"]
    for k, name in enumerate(mota_report.joint_names):
        lines.append(f"{name:<16}{_fmt(ap_report.ap[k]):>8}{_fmt(mota_report.joint_mota[k]):>8}"
                     f"{mota_report.fp[k]:>8}{mota_report.fn[k]:>8}{mota_report.idsw[k]:>8}"
                     f"{mota_report.num_gt[k]:>8}")
    lines.append(f"{'total':<16}{_fmt(ap_report.mean_ap):>8}{_fmt(mota_report.mota):>8}"
                 f"{mota_report.total_fp:>8}{mota_report.total_fn:>8}{mota_report.total_idsw:>8}"
                 f"{mota_report.total_gt:>8}")
    if not mota_report.has_ground_truth:
        lines.append("no ground truth: MOTA undefined")
    return "\n".join(lines) + "\n"


def report_json(mota_report: MotaReport, ap_report: ApReport) -> str:
    doc = {"mota": mota_report.to_dict(), "ap": ap_report.to_dict()}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
