"""
Detection evaluation: IoU matching, precision/recall, envelope-interpolated AP.
"""
import csv
from dataclasses import dataclass
from functools import partial
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from mlgc.errors import InputError, UndefinedMetricError
from mlgc.metric import phi_matrix, similarity_matrix
from mlgc.models import FlaggedDetection, MetricModel, PRCurve, PRPoint
from mlgc.schemas import Box, CandidateSet, Config, DetectionsRecord, GroundTruth, ImageLabels, Report
from mlgc.workers import map_ordered

logger = logging.getLogger(__name__)


def iou(a: Box, b: Box) -> float:
    ix = max(0.0, min(a.x + a.w, b.x + b.w) - max(a.x, b.x))
    iy = max(0.0, min(a.y + a.h, b.y + b.h) - max(a.y, b.y))
    inter = ix * iy
    if inter <= 0.0:
        return 0.0
    union = a.area + b.area - inter
    return min(1.0, inter / union)


@dataclass(frozen=True)
class MatchResult:
    tp: tuple           # per detection, input order
    gt_matched: tuple   # per ground-truth box


def match_detections(
    dets: Sequence[Tuple[Box, float]],
    gts: Sequence[Box],
    iou_threshold: float,
) -> MatchResult:
    """
    Greedy matching in score-descending order (ties by input order); each
    detection claims the unmatched ground truth with the highest IoU.
    """
    order = sorted(range(len(dets)), key=lambda i: -dets[i][1])
    tp = [False] * len(dets)
    matched = [False] * len(gts)

    for i in order:
        box = dets[i][0]
        best, best_iou = -1, -1.0
        for g, gt in enumerate(gts):
            if matched[g]:
                continue
            overlap = iou(box, gt)
            if overlap >= iou_threshold and overlap > best_iou:
                best, best_iou = g, overlap
        if best >= 0:
            matched[best] = True
            tp[i] = True

    return MatchResult(tp=tuple(tp), gt_matched=tuple(matched))


def average_precision(flagged: Sequence[FlaggedDetection], total_gt: int) -> PRCurve:
    if total_gt < 1:
        raise UndefinedMetricError("average precision is undefined without ground truth")
    if not flagged:
        return PRCurve(points=(), ap=0.0)

    order = sorted(range(len(flagged)), key=lambda i: -flagged[i].score)
    scores = np.array([flagged[i].score for i in order])
    hits = np.array([flagged[i].tp for i in order], dtype=float)

    tp = np.cumsum(hits)
    fp = np.cumsum(1.0 - hits)
    recall = tp / total_gt
    precision = tp / (tp + fp)

    # precision envelope, then integrate over the recall steps
    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    for i in range(mpre.size - 1, 0, -1):
        mpre[i - 1] = max(mpre[i - 1], mpre[i])
    steps = np.flatnonzero(mrec[1:] != mrec[:-1])
    ap = float(np.sum((mrec[steps + 1] - mrec[steps]) * mpre[steps + 1]))

    points = tuple(
        PRPoint(threshold=float(s), recall=float(r), precision=float(p))
        for s, r, p in zip(scores, recall, precision)
    )
    return PRCurve(points=points, ap=min(1.0, max(0.0, ap)))


# ------------------------
# CORPUS COMPARISON
# ------------------------

def _flag_image(item: Tuple[DetectionsRecord, Tuple[Box, ...]], iou_threshold: float) -> List[FlaggedDetection]:
    record, gt_boxes = item
    dets = [(d.box, d.score) for d in record.detections]
    result = match_detections(dets, gt_boxes, iou_threshold)
    return [FlaggedDetection(score=s, tp=hit) for (_, s), hit in zip(dets, result.tp)]


def flag_corpus(
    records: Sequence[DetectionsRecord],
    gt_by_image: Dict[str, Tuple[Box, ...]],
    iou_threshold: float,
    jobs: int = 1,
) -> List[FlaggedDetection]:
    work = partial(_flag_image, iou_threshold=iou_threshold)
    pairs = [(r, gt_by_image.get(r.image_id, ())) for r in records]
    per_image = map_ordered(work, pairs, jobs=jobs, desc="match")
    return [f for flags in per_image for f in flags]


@dataclass(frozen=True)
class Comparison:
    report: Report
    baseline: PRCurve
    refined: PRCurve


def compare(
    baseline: Sequence[DetectionsRecord],
    refined: Sequence[DetectionsRecord],
    gts: Sequence[GroundTruth],
    cfg: Config,
    jobs: int = 1,
) -> Comparison:
    base_ids = [r.image_id for r in baseline]
    ref_ids = [r.image_id for r in refined]
    if sorted(base_ids) != sorted(ref_ids):
        missing = sorted(set(base_ids) ^ set(ref_ids))
        raise InputError(f"baseline and refined cover different images: {missing[:5]}")

    gt_by_image = {gt.image_id: gt.boxes for gt in gts}
    n_gt = sum(len(boxes) for boxes in gt_by_image.values())

    curve_b = average_precision(flag_corpus(baseline, gt_by_image, cfg.iou_threshold, jobs), n_gt)
    curve_r = average_precision(flag_corpus(refined, gt_by_image, cfg.iou_threshold, jobs), n_gt)
    report = Report(
        ap_baseline=curve_b.ap,
        ap_refined=curve_r.ap,
        delta=curve_r.ap - curve_b.ap,
        n_images=len(base_ids),
        n_gt=n_gt,
    )
    logger.info(
        "AP baseline %.4f refined %.4f delta %+.4f over %d image(s), %d ground truth",
        report.ap_baseline, report.ap_refined, report.delta, report.n_images, n_gt,
    )
    return Comparison(report=report, baseline=curve_b, refined=curve_r)


def write_pr_csv(curve: PRCurve, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["threshold", "recall", "precision"])
        for pt in curve.points:
            writer.writerow([repr(pt.threshold), repr(pt.recall), repr(pt.precision)])


# ------------------------
# SIMILARITY DISCRIMINATION
# ------------------------

def pair_discrimination_ap(
    sets: Sequence[CandidateSet],
    labels: Sequence[ImageLabels],
    model: MetricModel,
) -> float:
    """
    Per image, rank face-face pairs (positives) against face-background pairs
    (negatives) by learned similarity; mean AP over images with a positive pair.
    """
    label_by_image = {lab.image_id: lab.labels for lab in labels}
    per_image = []

    for cset in sets:
        image_labels = label_by_image.get(cset.image_id)
        if image_labels is None:
            raise InputError(f"no labels for image {cset.image_id}")
        if len(image_labels) != cset.n:
            raise InputError(
                f"{len(image_labels)} labels for {cset.n} candidates", image_id=cset.image_id
            )
        faces = [i for i, lab in enumerate(image_labels) if lab == 1]
        if len(faces) < 2:
            continue
        background = [i for i, lab in enumerate(image_labels) if lab == 0]

        s = similarity_matrix(model, phi_matrix(cset)).entries
        # negatives go first so the stable sort ranks them ahead of tied positives
        flagged = [FlaggedDetection(score=float(s[i, j]), tp=False) for i in faces for j in background]
        flagged += [
            FlaggedDetection(score=float(s[i, j]), tp=True)
            for a, i in enumerate(faces) for j in faces[a + 1:]
        ]
        n_pos = len(faces) * (len(faces) - 1) // 2
        per_image.append(average_precision(flagged, n_pos).ap)

    if not per_image:
        raise UndefinedMetricError("no image has two face candidates")
    return float(np.mean(per_image))
