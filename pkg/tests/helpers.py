"""Small builders shared by the test modules and the acceptance script."""
from __future__ import annotations

import numpy as np

from posetrack import DEFAULT_SKELETON, BBox, Pose
from posetrack.synth import TEMPLATE

K = DEFAULT_SKELETON.K


def figure(cx, cy, height=80.0, p_loc=0.9, p_avl=1.0, present=None, bbox=None) -> Pose:
    """Template stick figure centred at (cx, cy)."""
    xy = np.array([cx, cy]) + TEMPLATE * height
    return Pose(xy, np.full(K, p_loc), np.full(K, p_avl),
                np.ones(K, bool) if present is None else present, bbox)


def partial(points: dict[int, tuple[float, float]], bbox=(0.0, 0.0, 10.0, 10.0),
            p_loc=1.0, p_avl=1.0) -> Pose:
    """Pose with only the listed joints present and a fixed box."""
    xy = np.zeros((K, 2))
    present = np.zeros(K, bool)
    for j, (x, y) in points.items():
        xy[j] = x, y
        present[j] = True
    return Pose(xy, np.full(K, p_loc), np.full(K, p_avl), present, BBox(*bbox))


def random_pose(rng: np.random.Generator, width=320.0, height=240.0) -> Pose:
    h = rng.uniform(30, 120)
    c = rng.uniform([h / 2, h / 2], [width - h / 2, height - h / 2])
    xy = c + TEMPLATE * h + rng.normal(0, 2.0, (K, 2))
    return Pose(xy, rng.uniform(0.05, 1, K), rng.uniform(0.05, 1, K), rng.random(K) < 0.85)
