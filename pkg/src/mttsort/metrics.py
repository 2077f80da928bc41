"""Tracking evaluation: CLEAR counts (MOTA), IDF1, the HOTA family,
fragmentations, and the scalar fitness score used by the optimizer.

All final ratios are built from integer event counts, and means use
math.fsum, so results are bit-reproducible and safe to compare against
enumeration oracles.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, fields

import numpy as np
from scipy.optimize import linear_sum_assignment

from .association import INFEASIBLE, iou, solve_assignment
from .model import BoundingBox

# Per-frame GT/prediction overlap threshold for CLEAR and identity metrics.
MATCH_IOU = 0.5

# Localization thresholds HOTA integrates over.
ALPHAS = [k * 0.05 for k in range(1, 20)]


@dataclass(frozen=True)
class GtEntry:
    """One annotated (or predicted) box: frame, trajectory identity, box."""

    frame: int
    identity: int
    box: BoundingBox


@dataclass(frozen=True)
class EvalReport:
    hota: float
    mota: float
    idf1: float
    det_re: float
    det_pr: float
    det_a: float
    ass_a: float
    fn_count: int
    fp_count: int
    idsw_count: int
    frag_count: int


def results_to_entries(results) -> list[GtEntry]:
    """Flatten tracker FrameResults into (frame, identity, box) records."""
    return [GtEntry(frame=res.frame, identity=tid, box=box)
            for res in results
            for tid, box, _ in res.records]


def _by_frame(entries) -> dict[int, list[tuple[int, BoundingBox]]]:
    frames: dict[int, list[tuple[int, BoundingBox]]] = {}
    for e in entries:
        frames.setdefault(e.frame, []).append((e.identity, e.box))
    for items in frames.values():
        items.sort(key=lambda item: item[0])
    return frames


def _require_gt(gt):
    if not gt:
        raise ValueError("evaluation requires at least one ground-truth box")


def clear_match(gt_frame, pred_frame, prior_correspondence):
    """Match one frame's GT against predictions, CLEAR style.

    `gt_frame` and `pred_frame` are lists of (identity, box); the prior
    correspondence maps each GT identity to the predicted id it was most
    recently matched with. Correspondences still overlapping with
    IoU >= 0.5 are kept; the remainder is matched by minimum (1 - IoU)
    assignment subject to the same threshold.

    Returns (matches, fn, fp, idsw) where matches is a list of
    (gt_identity, pred_identity) and idsw counts matches whose predicted
    id differs from the prior one.
    """
    gt_frame = sorted(gt_frame, key=lambda item: item[0])
    pred_frame = sorted(pred_frame, key=lambda item: item[0])
    pred_boxes = dict(pred_frame)

    matches: list[tuple[int, int]] = []
    used_preds: set[int] = set()
    remaining_gt = []
    for gid, box in gt_frame:
        pid = prior_correspondence.get(gid)
        if (pid is not None and pid in pred_boxes and pid not in used_preds
                and iou(box, pred_boxes[pid]) >= MATCH_IOU):
            matches.append((gid, pid))
            used_preds.add(pid)
        else:
            remaining_gt.append((gid, box))
    remaining_pred = [(pid, box) for pid, box in pred_frame
                      if pid not in used_preds]

    if remaining_gt and remaining_pred:
        cost = np.zeros((len(remaining_gt), len(remaining_pred)))
        for i, (_, gbox) in enumerate(remaining_gt):
            for j, (_, pbox) in enumerate(remaining_pred):
                overlap = iou(gbox, pbox)
                cost[i, j] = 1.0 - overlap if overlap >= MATCH_IOU else INFEASIBLE
        assigned, _, _ = solve_assignment(cost)
        matches.extend((remaining_gt[i][0], remaining_pred[j][0])
                       for i, j in assigned)

    matches.sort()
    matched_gt = {g for g, _ in matches}
    matched_pred = {p for _, p in matches}
    fn = sum(1 for gid, _ in gt_frame if gid not in matched_gt)
    fp = sum(1 for pid, _ in pred_frame if pid not in matched_pred)
    idsw = sum(1 for gid, pid in matches
               if prior_correspondence.get(gid) not in (None, pid))
    return matches, fn, fp, idsw


def _clear_sequence(gt, pred):
    """Accumulate CLEAR counts and fragmentations over a whole sequence."""
    gt_frames = _by_frame(gt)
    pred_frames = _by_frame(pred)
    frames = sorted(set(gt_frames) | set(pred_frames))

    prior: dict[int, int] = {}
    fn = fp = idsw = frag = 0
    ever_matched: set[int] = set()
    gap_open: set[int] = set()
    for f in frames:
        gt_here = gt_frames.get(f, [])
        pred_here = pred_frames.get(f, [])
        matches, fn_f, fp_f, idsw_f = clear_match(gt_here, pred_here, prior)
        fn += fn_f
        fp += fp_f
        idsw += idsw_f
        matched = {g for g, _ in matches}
        for gid, pid in matches:
            prior[gid] = pid
        for gid, _ in gt_here:
            if gid in matched:
                if gid in gap_open:
                    frag += 1
                    gap_open.discard(gid)
                ever_matched.add(gid)
            elif gid in ever_matched:
                gap_open.add(gid)
    return fn, fp, idsw, frag


def mota(gt, pred) -> float:
    """Multiple object tracking accuracy: 1 - (FN + FP + IDSW) / |GT|."""
    _require_gt(gt)
    fn, fp, idsw, _ = _clear_sequence(gt, pred)
    return 1.0 - (fn + fp + idsw) / len(gt)


def fragmentation_count(gt, pred) -> int:
    """How often a GT trajectory's coverage is interrupted and resumed."""
    return _clear_sequence(gt, pred)[3]


def idf1(gt, pred) -> float:
    """Identity F1 under the best single global GT<->prediction mapping.

    A GT and a predicted trajectory co-occur on every frame where their
    boxes overlap with IoU >= 0.5; IDTP is the total co-occurrence of the
    best one-to-one mapping.
    """
    _require_gt(gt)
    gt_frames = _by_frame(gt)
    pred_frames = _by_frame(pred)
    cooccur: Counter = Counter()
    for f, gt_here in gt_frames.items():
        for gid, gbox in gt_here:
            for pid, pbox in pred_frames.get(f, []):
                if iou(gbox, pbox) >= MATCH_IOU:
                    cooccur[(gid, pid)] += 1

    gt_ids = sorted({e.identity for e in gt})
    pred_ids = sorted({e.identity for e in pred})
    idtp = 0
    if cooccur and pred_ids:
        counts = np.zeros((len(gt_ids), len(pred_ids)), dtype=int)
        for (gid, pid), c in cooccur.items():
            counts[gt_ids.index(gid), pred_ids.index(pid)] = c
        rows, cols = linear_sum_assignment(counts, maximize=True)
        idtp = int(counts[rows, cols].sum())
    idfn = len(gt) - idtp
    idfp = len(pred) - idtp
    return 2 * idtp / (2 * idtp + idfp + idfn)


def _frame_overlaps(gt, pred):
    """Per-frame (gt_ids, pred_ids, iou matrix) shared by the HOTA sweep."""
    gt_frames = _by_frame(gt)
    pred_frames = _by_frame(pred)
    frames = sorted(set(gt_frames) | set(pred_frames))
    out = []
    for f in frames:
        gt_here = gt_frames.get(f, [])
        pred_here = pred_frames.get(f, [])
        ious = np.zeros((len(gt_here), len(pred_here)))
        for i, (_, gbox) in enumerate(gt_here):
            for j, (_, pbox) in enumerate(pred_here):
                ious[i, j] = iou(gbox, pbox)
        out.append(([g for g, _ in gt_here], [p for p, _ in pred_here], ious))
    return out


def hota(gt, pred):
    """HOTA and its components, averaged over the 19 localization levels.

    Per level alpha: frames are matched maximizing match count then total
    IoU over pairs with IoU >= alpha. DetA = TP/(TP+FN+FP). Each matched
    pair c = (g, p) scores A(c) = TPA/(TPA+FNA+FPA), where TPA counts
    frames matching g with p and the FNA/FPA terms count the remaining
    appearances of g and of p; AssA is the mean of A over matches and
    HOTA_alpha = sqrt(DetA * AssA).

    Returns (hota, det_a, ass_a, det_re, det_pr).
    """
    _require_gt(gt)
    per_frame = _frame_overlaps(gt, pred)
    gt_count = Counter(e.identity for e in gt)
    pred_count = Counter(e.identity for e in pred)

    hota_levels, deta_levels, assa_levels = [], [], []
    detre_levels, detpr_levels = [], []
    for alpha in ALPHAS:
        tp = fn = fp = 0
        pair_count: Counter = Counter()
        events: list[tuple[int, int]] = []
        for g_ids, p_ids, ious in per_frame:
            cost = np.where(ious >= alpha, 1.0 - ious, INFEASIBLE)
            matches, unmatched_g, unmatched_p = solve_assignment(cost)
            tp += len(matches)
            fn += len(unmatched_g)
            fp += len(unmatched_p)
            for i, j in matches:
                pair = (g_ids[i], p_ids[j])
                pair_count[pair] += 1
                events.append(pair)
        det_a = tp / (tp + fn + fp) if tp + fn + fp else 0.0
        det_re = tp / (tp + fn) if tp + fn else 0.0
        det_pr = tp / (tp + fp) if tp + fp else 0.0
        if tp:
            ass_a = math.fsum(
                pair_count[(g, p)] / (gt_count[g] + pred_count[p] - pair_count[(g, p)])
                for g, p in events) / tp
        else:
            ass_a = 0.0
        hota_levels.append(math.sqrt(det_a * ass_a))
        deta_levels.append(det_a)
        assa_levels.append(ass_a)
        detre_levels.append(det_re)
        detpr_levels.append(det_pr)

    n = len(ALPHAS)
    return (math.fsum(hota_levels) / n,
            math.fsum(deta_levels) / n,
            math.fsum(assa_levels) / n,
            math.fsum(detre_levels) / n,
            math.fsum(detpr_levels) / n)


def evaluate(gt, pred) -> EvalReport:
    """Full evaluation of a predicted sequence against ground truth."""
    _require_gt(gt)
    fn, fp, idsw, frag = _clear_sequence(gt, pred)
    hota_value, det_a, ass_a, det_re, det_pr = hota(gt, pred)
    return EvalReport(
        hota=hota_value,
        mota=1.0 - (fn + fp + idsw) / len(gt),
        idf1=idf1(gt, pred),
        det_re=det_re,
        det_pr=det_pr,
        det_a=det_a,
        ass_a=ass_a,
        fn_count=fn,
        fp_count=fp,
        idsw_count=idsw,
        frag_count=frag,
    )


def score(report: EvalReport) -> float:
    """Aggregate fitness: HOTA + MOTA + IDF1, equally weighted."""
    return report.hota + report.mota + report.idf1


def average_reports(reports) -> EvalReport:
    """Mean of the rate fields across sub-scenes; error counts are summed."""
    if not reports:
        raise ValueError("cannot average an empty list of reports")
    values = {}
    for f in fields(EvalReport):
        column = [getattr(r, f.name) for r in reports]
        if f.name.endswith("_count"):
            values[f.name] = sum(column)
        else:
            values[f.name] = math.fsum(column) / len(column)
    return EvalReport(**values)
