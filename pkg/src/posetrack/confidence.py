"""Heatmap encoding/decoding, the two training objectives as reference
functions, confidence fusion and keypoint filtering.

Heatmaps are plain ``(H, W)`` float arrays indexed ``[row, col]`` = ``[y, x]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .skeleton import Pose

FOCAL_EPS = 1e-7


@dataclass(frozen=True)
class LossConfig:
    alpha: float = 0.25
    gamma: float = 2.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")


@dataclass(frozen=True)
class GaussianSpec:
    sigma: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


def render_gaussian(center, spec: GaussianSpec, width: int, height: int) -> np.ndarray:
    """Untruncated 2D Gaussian sampled at integer pixel centres."""
    if width < 1 or height < 1:
        raise ValueError("heatmap needs at least one pixel")
    cx, cy = center
    u = np.arange(width, dtype=float)
    v = np.arange(height, dtype=float)
    d2 = (u[None, :] - cx) ** 2 + (v[:, None] - cy) ** 2
    return spec.amplitude * np.exp(-d2 / (2.0 * spec.sigma ** 2))


def decode_heatmap(heatmap) -> tuple[tuple[int, int], float]:
    """Location of the highest response and its value clamped to [0, 1].

    Ties go to the smallest row-major index.
    """
    m = np.asarray(heatmap, dtype=float)
    if m.ndim != 2 or m.size == 0:
        raise ValueError("heatmap must be a non-empty 2D array")
    idx = int(np.argmax(m))
    y, x = divmod(idx, m.shape[1])
    return (x, y), float(min(max(m.flat[idx], 0.0), 1.0))


def heatmap_mse_loss(predicted, target) -> float:
    """Mean squared error over K heatmaps of identical size, normalised by K*W*H."""
    M = np.asarray(predicted, dtype=float)
    G = np.asarray(target, dtype=float)
    if M.shape != G.shape or M.ndim != 3:
        raise ValueError(f"shape mismatch: {M.shape} vs {G.shape}")
    return float(np.sum((M - G) ** 2) / M.size)


def focal_loss(p: float, y: int, cfg: LossConfig = LossConfig()) -> float:
    if y not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {y!r}")
    p = min(max(float(p), FOCAL_EPS), 1.0 - FOCAL_EPS)
    if y == 1:
        return -cfg.alpha * (1.0 - p) ** cfg.gamma * math.log(p)
    return -(1.0 - cfg.alpha) * p ** cfg.gamma * math.log(1.0 - p)


def fuse_confidence(p_avl, p_loc):
    """Keypoint confidence as availability times location probability.

    Works on scalars or arrays.
    """
    a = np.asarray(p_avl, dtype=float)
    b = np.asarray(p_loc, dtype=float)
    for name, v in (("p_avl", a), ("p_loc", b)):
        if np.any(~np.isfinite(v)) or np.any(v < 0) or np.any(v > 1):
            raise ValueError(f"{name} out of [0, 1]")
    out = a * b
    return float(out) if out.ndim == 0 else out


def filter_keypoints(pose: Pose, threshold: float, source: str = "fused") -> Pose:
    """Mark keypoints with confidence <= ``threshold`` as absent.

    ``source="fused"`` filters on p_avl * p_loc; ``source="location"`` uses
    p_loc alone (the availability-free baseline).
    """
    if source == "fused":
        conf = pose.p_conf
    elif source == "location":
        conf = pose.p_loc
    else:
        raise ValueError(f"unknown confidence source {source!r}")
    keep = pose.present & (conf > threshold)
    return pose.replace(present=keep)
