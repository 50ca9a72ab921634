"""Appearance gallery for lost tracks and Euclidean nearest-neighbour retrieval."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class ReidConfig:
    # Only meaningful for a fixed feature scale; calibrate to the feature source.
    distance_threshold: float = 100.0
    max_age: int = 30

    def __post_init__(self):
        if not self.distance_threshold > 0:
            raise ValueError("distance_threshold must be positive")
        if self.max_age < 1:
            raise ValueError("max_age must be at least 1")


@dataclass
class GalleryEntry:
    track_id: int
    feature: np.ndarray
    last_seen: int


class Gallery:
    """One feature per lost track; re-inserting an id replaces its entry."""

    def __init__(self, dim: int | None = None):
        self.dim = dim
        self.entries: dict[int, GalleryEntry] = {}

    def __len__(self):
        return len(self.entries)

    def __contains__(self, track_id):
        return track_id in self.entries

    def _check(self, feature) -> np.ndarray:
        f = np.asarray(feature, dtype=float).reshape(-1)
        if self.dim is None:
            self.dim = len(f)
        if len(f) != self.dim:
            raise ValueError(f"feature has dimension {len(f)}, gallery expects {self.dim}")
        if not np.all(np.isfinite(f)):
            raise ValueError("feature contains non-finite values")
        return f

    def insert(self, track_id: int, feature, frame: int) -> "Gallery":
        self.entries[track_id] = GalleryEntry(track_id, self._check(feature), frame)
        return self

    def distances(self, query) -> tuple[list[int], np.ndarray]:
        q = self._check(query)
        ids = list(self.entries)
        if not ids:
            return ids, np.zeros(0)
        feats = np.stack([self.entries[i].feature for i in ids])
        return ids, np.sqrt(np.sum((feats - q) ** 2, axis=1))

    def retrieve(self, query, cfg: ReidConfig = ReidConfig()) -> int | None:
        """Closest entry strictly within the distance threshold, removed on a hit.

        Distance ties go to the older ``last_seen``, then the smaller id.
        """
        ids, dist = self.distances(query)
        if not ids:
            return None
        best = min(range(len(ids)),
                   key=lambda k: (dist[k], self.entries[ids[k]].last_seen, ids[k]))
        if not dist[best] < cfg.distance_threshold:
            return None
        return self.entries.pop(ids[best]).track_id

    def prune(self, current_frame: int, cfg: ReidConfig = ReidConfig()) -> "Gallery":
        stale = [i for i, e in self.entries.items() if current_frame - e.last_seen > cfg.max_age]
        for i in stale:
            del self.entries[i]
        return self


def read_features(path) -> dict[tuple[int, int], np.ndarray]:
    """Parse ``frame_id, detection_id, v1, ..., vD`` lines."""
    out: dict[tuple[int, int], np.ndarray] = {}
    dim = None
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split(",")]
        try:
            frame, det = int(parts[0]), int(parts[1])
            vec = np.array([float(p) for p in parts[2:]])
        except (ValueError, IndexError) as exc:
            raise ValueError(f"{path}:{lineno}: malformed feature record ({exc})") from None
        if len(vec) == 0 or not np.all(np.isfinite(vec)):
            raise ValueError(f"{path}:{lineno}: feature must be non-empty and finite")
        if dim is None:
            dim = len(vec)
        elif len(vec) != dim:
            raise ValueError(f"{path}:{lineno}: dimension {len(vec)} != {dim}")
        if (frame, det) in out:
            raise ValueError(f"{path}:{lineno}: duplicate record for frame {frame} detection {det}")
        out[(frame, det)] = vec
    return out


def write_features(records: dict[tuple[int, int], np.ndarray], path):
    lines = []
    for (frame, det), vec in sorted(records.items()):
        vals = ", ".join(repr(float(v)) for v in np.asarray(vec).reshape(-1))
        lines.append(f"{frame}, {det}, {vals}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
