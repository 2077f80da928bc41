"""Cost construction and matching.

Appearance costs are cosine distances between a detection embedding and a
track's pooled buffer feature; motion feasibility is enforced with a
chi-square Mahalanobis gate; spatial matching uses IoU cost. Infeasible
cost entries are marked with the INFEASIBLE sentinel and are never selected
by the assignment solver.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linear_sum_assignment

from .kalman import CHI2_GATE_4DOF
from .model import BoundingBox

INFEASIBLE = np.inf

# Relative tolerance for treating two assignment totals as tied. Distinct
# sums of real-world costs differ by far more than this; exact ties (equal
# IoU, duplicated embeddings) are caught reliably.
_TIE_RTOL = 1e-9

# Largest matrix solved by exhaustive enumeration; larger ones go through
# scipy plus a lexicographic refinement pass.
_ENUM_LIMIT = 5


class FeatureBuffer:
    """FIFO buffer of the most recent appearance embeddings of one track.

    Pushing onto a full buffer evicts the oldest entry, so the buffer acts
    as a temporal sliding window over the object's appearance. The
    average-pooled vector over the window is what enters association.
    """

    def __init__(self, capacity: int = 5):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._entries: list[np.ndarray] = []

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def entries(self) -> tuple:
        return tuple(self._entries)

    def push(self, feature) -> None:
        """Append `feature`, evicting the oldest entry when full."""
        feature = np.asarray(feature, dtype=float)
        if feature.ndim != 1:
            raise ValueError("feature must be a 1-d vector")
        if self._entries and feature.shape != self._entries[0].shape:
            raise ValueError(
                f"feature dimension {feature.shape[0]} does not match "
                f"buffered dimension {self._entries[0].shape[0]}"
            )
        self._entries.append(feature)
        if len(self._entries) > self.capacity:
            self._entries.pop(0)

    def pooled(self) -> np.ndarray:
        """Average-pool the buffered features and renormalize to unit norm.

        If the entries cancel to a (numerically) zero mean, the newest
        entry is returned instead so the result is always a valid unit
        vector.
        """
        if not self._entries:
            raise ValueError("cannot pool an empty feature buffer")
        mean = np.mean(self._entries, axis=0)
        norm = np.linalg.norm(mean)
        if norm < 1e-9:
            return self._entries[-1].copy()
        return mean / norm

    def clear(self) -> None:
        self._entries.clear()


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection-over-union of two boxes, in [0, 1]."""
    inter_w = min(a.right, b.right) - max(a.left, b.left)
    inter_h = min(a.bottom, b.bottom) - max(a.top, b.top)
    if inter_w <= 0 or inter_h <= 0:
        return 0.0
    inter = inter_w * inter_h
    return inter / (a.area + b.area - inter)


def appearance_cost(tracks, detections, kalman, max_dist: float) -> np.ndarray:
    """Gated cosine-cost matrix between track buffers and detections.

    cost[i, j] = 1 - <pooled(track_i), embedding_j>, clamped to [0, 2].
    Entries above `max_dist` or failing the Mahalanobis gate are
    INFEASIBLE.
    """
    cost = np.zeros((len(tracks), len(detections)))
    if cost.size == 0:
        return cost
    embeddings = np.stack([det.embedding for det in detections])
    measurements = np.stack([det.box.to_center() for det in detections])
    for i, track in enumerate(tracks):
        pooled = track.features.pooled()
        cost[i, :] = np.clip(1.0 - embeddings @ pooled, 0.0, 2.0)
        gate = kalman.gating_distance(track.mean, track.covariance, measurements)
        cost[i, gate > CHI2_GATE_4DOF] = INFEASIBLE
    cost[cost > max_dist] = INFEASIBLE
    return cost


def iou_cost(tracks, detections, max_iou_distance: float) -> np.ndarray:
    """IoU-cost matrix between predicted track boxes and detection boxes."""
    cost = np.zeros((len(tracks), len(detections)))
    for i, track in enumerate(tracks):
        box = track.to_box()
        for j, det in enumerate(detections):
            cost[i, j] = 1.0 - iou(box, det.box)
    cost[cost > max_iou_distance] = INFEASIBLE
    return cost


def _enumerate_assignment(cost: np.ndarray):
    """Exhaustive optimal assignment for small matrices.

    Maximizes the number of feasible pairs, then minimizes their total
    cost, then picks the lexicographically smallest pair set. Near-equal
    totals (within _TIE_RTOL) are treated as ties so the index rule, not
    round-off, decides.
    """
    n, m = cost.shape
    rows = cost.tolist()
    best = None  # (count, total, pairs)
    if n <= m:
        candidates = itertools.permutations(range(m), n)

        def make_pairs(perm):
            return [(i, perm[i]) for i in range(n)]
    else:
        candidates = itertools.permutations(range(n), m)

        def make_pairs(perm):
            return sorted((perm[j], j) for j in range(m))

    for perm in candidates:
        pairs = make_pairs(perm)
        feasible = [(i, j) for i, j in pairs if rows[i][j] != INFEASIBLE]
        count = len(feasible)
        total = sum(rows[i][j] for i, j in feasible)
        if best is None:
            best = (count, total, feasible)
            continue
        b_count, b_total, b_pairs = best
        if count != b_count:
            if count > b_count:
                best = (count, total, feasible)
            continue
        tol = _TIE_RTOL * max(1.0, abs(b_total))
        if total < b_total - tol:
            best = (count, total, feasible)
        elif abs(total - b_total) <= tol and feasible < b_pairs:
            best = (count, total, feasible)
    return best[2] if best else []


def _masked(cost: np.ndarray) -> tuple[np.ndarray, float]:
    """Replace INFEASIBLE entries by a finite penalty dominating any

    feasible total, so a full linear_sum_assignment solve maximizes the
    feasible pair count first and minimizes feasible cost second.
    """
    finite = cost[cost != INFEASIBLE]
    max_cost = float(finite.max()) if finite.size else 0.0
    penalty = (max_cost + 1.0) * (min(cost.shape) + 1)
    masked = cost.copy()
    masked[masked == INFEASIBLE] = penalty
    return masked, penalty


def _refine_lexicographic(cost: np.ndarray, masked: np.ndarray, optimum: float):
    """Find the lexicographically smallest optimal assignment.

    Fixes rows in ascending order, testing candidate columns in ascending
    order and keeping a candidate only when an optimal completion still
    exists (checked with a reduced solve).
    """
    n, m = cost.shape
    tol = _TIE_RTOL * max(1.0, abs(optimum))
    fixed: list[tuple[int, int]] = []
    fixed_total = 0.0
    free_rows = list(range(n))
    free_cols = list(range(m))

    def completion_total(rows_left, cols_left):
        if not rows_left or not cols_left:
            return 0.0
        sub = masked[np.ix_(rows_left, cols_left)]
        r, c = linear_sum_assignment(sub)
        return float(sub[r, c].sum())

    for i in range(n):
        chosen = None
        for j in free_cols:
            if cost[i, j] == INFEASIBLE:
                continue
            rows_left = [r for r in free_rows if r != i]
            cols_left = [c for c in free_cols if c != j]
            rest = completion_total(rows_left, cols_left)
            if fixed_total + masked[i, j] + rest <= optimum + tol:
                chosen = j
                break
        if chosen is not None:
            fixed.append((i, chosen))
            fixed_total += masked[i, chosen]
            free_rows.remove(i)
            free_cols.remove(chosen)
    return fixed


def solve_assignment(cost: np.ndarray):
    """Minimum-cost one-to-one assignment over feasible entries.

    Returns ``(matches, unmatched_rows, unmatched_cols)``. The matching
    has maximum feasible cardinality and, among those, minimum total cost;
    ties resolve to the lowest (row, column) indices. Matches are sorted
    by row index.
    """
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape if cost.ndim == 2 else (len(cost), 0)
    if n == 0 or m == 0 or not np.isfinite(cost).any():
        return [], list(range(n)), list(range(m))

    if max(n, m) <= _ENUM_LIMIT:
        matches = _enumerate_assignment(cost)
    else:
        masked, _ = _masked(cost)
        rows, cols = linear_sum_assignment(masked)
        optimum = float(masked[rows, cols].sum())
        matches = _refine_lexicographic(cost, masked, optimum)

    matches = sorted(matches)
    matched_rows = {i for i, _ in matches}
    matched_cols = {j for _, j in matches}
    unmatched_rows = [i for i in range(n) if i not in matched_rows]
    unmatched_cols = [j for j in range(m) if j not in matched_cols]
    return matches, unmatched_rows, unmatched_cols


def matching_cascade(tracks, detections, config, kalman):
    """Appearance matching that prioritizes recently updated tracks.

    Iterates over time-since-update depths 1..max_age; at each depth the
    tracks last updated that many frames ago compete for the detections
    still unmatched. All `tracks` must be confirmed.

    Returns ``(matches, unmatched_tracks, unmatched_detections)`` with
    indices into the input lists.
    """
    unmatched_dets = list(range(len(detections)))
    matches: list[tuple[int, int]] = []
    for depth in range(config.max_age):
        if not unmatched_dets:
            break
        level = [i for i, t in enumerate(tracks)
                 if t.time_since_update == depth + 1]
        if not level:
            continue
        cost = appearance_cost(
            [tracks[i] for i in level],
            [detections[j] for j in unmatched_dets],
            kalman, config.max_dist)
        level_matches, _, level_unmatched = solve_assignment(cost)
        matches.extend(
            (level[r], unmatched_dets[c]) for r, c in level_matches)
        unmatched_dets = [unmatched_dets[c] for c in level_unmatched]
    matched_tracks = {t for t, _ in matches}
    unmatched_tracks = [i for i in range(len(tracks)) if i not in matched_tracks]
    return sorted(matches), unmatched_tracks, unmatched_dets
