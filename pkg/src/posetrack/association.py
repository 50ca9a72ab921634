"""Track-to-detection association: OKS weight matrix, maximum-weight
one-to-one assignment (Hungarian method) and threshold gating."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .skeleton import Pose, SkeletonSpec, oks

DEFAULT_MATCH_THRESHOLD = 0.2


@dataclass
class SimilarityMatrix:
    row_ids: list
    col_ids: list
    weights: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.row_ids), len(self.col_ids)


@dataclass
class AssignmentResult:
    matches: list[tuple[Hashable, Hashable, float]] = field(default_factory=list)
    unmatched_tracks: list = field(default_factory=list)
    unmatched_detections: list = field(default_factory=list)


def build_similarity(tracks: Sequence[Pose], detections: Sequence[Pose],
                     spec: SkeletonSpec, visibility_threshold: float = 0.0,
                     row_ids=None, col_ids=None) -> SimilarityMatrix:
    row_ids = list(range(len(tracks))) if row_ids is None else list(row_ids)
    col_ids = list(range(len(detections))) if col_ids is None else list(col_ids)
    w = np.zeros((len(tracks), len(detections)))
    for i, t in enumerate(tracks):
        for j, d in enumerate(detections):
            w[i, j] = oks(t, d, spec, visibility_threshold)
    return SimilarityMatrix(row_ids, col_ids, w)


def _min_cost_rows(cost: np.ndarray) -> np.ndarray:
    """Shortest-augmenting-path Hungarian method for an (n, m) cost matrix
    with n <= m. Returns the column assigned to every row."""
    n, m = cost.shape
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    owner = np.zeros(m + 1, dtype=int)  # 1-based row owning each column, 0 = free
    way = np.zeros(m + 1, dtype=int)
    for i in range(1, n + 1):
        owner[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = owner[j0]
            reduced = cost[i0 - 1] - u[i0] - v[1:]
            free = ~used[1:]
            better = free & (reduced < minv[1:])
            minv[1:][better] = reduced[better]
            way[1:][better] = j0
            cand = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(cand)) + 1
            delta = cand[j1 - 1]
            u[owner[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1
    cols = np.full(n, -1)
    for j in range(1, m + 1):
        if owner[j]:
            cols[owner[j] - 1] = j - 1
    return cols


def _max_weight(w: np.ndarray) -> tuple[float, dict[int, int]]:
    """Maximum-weight assignment of min(rows, cols) pairs as {row: col}."""
    n, m = w.shape
    if n == 0 or m == 0:
        return 0.0, {}
    if n <= m:
        cols = _min_cost_rows(-w)
        pairs = {i: int(c) for i, c in enumerate(cols)}
    else:
        rows = _min_cost_rows(-w.T)
        pairs = {int(r): j for j, r in enumerate(rows)}
    return math.fsum(w[i, j] for i, j in pairs.items()), pairs


def hungarian_assign(weights) -> list[tuple[int, int]]:
    """Maximum total weight one-to-one assignment of min(rows, cols) pairs.

    Among optimal assignments the one whose row-sorted pair sequence is
    lexicographically smallest is returned, so results are reproducible.
    """
    if isinstance(weights, SimilarityMatrix):
        weights = weights.weights
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2:
        raise ValueError("weights must be a 2D matrix")
    if w.size == 0:
        return []
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    n, m = w.shape
    tol = 1e-9 * max(1.0, float(np.abs(w).max())) * min(n, m)

    target, sol = _max_weight(w)
    rows = list(range(n))
    cols = list(range(m))
    chosen: list[tuple[int, int]] = []
    for r in range(n):
        rest_rows = [i for i in rows if i != r]
        current = sol.get(r)
        options = list(cols)
        if len(rest_rows) >= len(cols):
            options.append(None)
        for opt in options:
            if opt == current:
                break
            if opt is None:
                sub_val, sub = _max_weight(w[np.ix_(rest_rows, cols)])
                val = sub_val
            else:
                rest_cols = [j for j in cols if j != opt]
                sub_val, sub = _max_weight(w[np.ix_(rest_rows, rest_cols)])
                val = w[r, opt] + sub_val
            if val >= target - tol:
                sub_cols = cols if opt is None else rest_cols
                sol = {rest_rows[a]: sub_cols[b] for a, b in sub.items()}
                if opt is not None:
                    sol[r] = opt
                current = opt
                break
        rows = rest_rows
        if current is not None:
            chosen.append((r, current))
            cols = [j for j in cols if j != current]
            target -= w[r, current]
        sol.pop(r, None)
    return chosen


def gate(assignment, m: SimilarityMatrix, threshold: float = DEFAULT_MATCH_THRESHOLD) -> AssignmentResult:
    """Keep assigned pairs with weight >= ``threshold``; demote the rest."""
    res = AssignmentResult()
    matched_rows, matched_cols = set(), set()
    for i, j in sorted(assignment):
        wij = float(m.weights[i, j])
        if wij < threshold:
            continue
        res.matches.append((m.row_ids[i], m.col_ids[j], wij))
        matched_rows.add(i)
        matched_cols.add(j)
    res.unmatched_tracks = [rid for i, rid in enumerate(m.row_ids) if i not in matched_rows]
    res.unmatched_detections = [cid for j, cid in enumerate(m.col_ids) if j not in matched_cols]
    return res


def associate(tracks, detections, spec, visibility_threshold=0.0,
              threshold=DEFAULT_MATCH_THRESHOLD, row_ids=None, col_ids=None) -> AssignmentResult:
    m = build_similarity(tracks, detections, spec, visibility_threshold, row_ids, col_ids)
    return gate(hungarian_assign(m), m, threshold)
