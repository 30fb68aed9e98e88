"""
Per-image refinement: similarity -> edge weights -> Laplacian -> partition ->
group voting. Kept candidates keep their original base scores.
"""
from functools import partial
import logging
from pathlib import Path
from typing import List, Sequence

import numpy as np

from mlgc import graph, spectral
from mlgc.errors import CorpusError, InputError, InvariantViolation, MLGCError, ModelFeatureError
from mlgc.metric import N_GEOMETRY, phi_matrix, similarity_matrix
from mlgc.models import GroupVerdict, MetricModel, Partition, RefinedDetections, Verdict
from mlgc.schemas import CandidateSet, Config, DetectionRecord, DetectionsRecord, GroupRecord
from mlgc.utils.json_utils import dumps
from mlgc.workers import map_ordered

logger = logging.getLogger(__name__)


# ------------------------
# VOTING
# ------------------------

def tally(group_id: int, members: Sequence[int], scores: Sequence[float], cfg: Config) -> GroupVerdict:
    if len(members) == 0:
        raise InvariantViolation(f"group {group_id} has no members")

    member_scores = np.array([scores[m] for m in members], dtype=float)
    votes_for = int((member_scores >= cfg.vote_threshold).sum())
    votes_against = len(member_scores) - votes_for

    if votes_for > votes_against:
        verdict = Verdict.FACE
    elif votes_for < votes_against:
        verdict = Verdict.NONFACE
    else:
        # exact tie goes to the mean score
        face = member_scores.mean() >= cfg.vote_threshold
        verdict = Verdict.FACE if face else Verdict.NONFACE
    return GroupVerdict(group_id, verdict, votes_for, votes_against)


def vote_group(members: Sequence[int], scores: Sequence[float], cfg: Config) -> Verdict:
    return tally(0, members, scores, cfg).verdict


def apply_votes(image_id: str, p: Partition, scores: Sequence[float], cfg: Config, eigenvalues=()) -> RefinedDetections:
    verdicts = tuple(tally(g, p.members(g), scores, cfg) for g in range(p.k))
    face_groups = {v.group_id for v in verdicts if v.verdict == Verdict.FACE}
    kept = tuple(
        (i, float(scores[i])) for i in range(p.n) if int(p.assign[i]) in face_groups
    )
    return RefinedDetections(
        image_id=image_id,
        kept=kept,
        group_verdicts=verdicts,
        eigenvalues=tuple(float(v) for v in eigenvalues),
    )


# ------------------------
# SINGLE IMAGE
# ------------------------

def _dump_matrices(dump_dir, image_id: str, **matrices) -> None:
    out = Path(dump_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, entries in matrices.items():
            graph.write_matrix(entries, out / f"{image_id}.{name}.txt")
    except OSError as e:
        raise InputError(f"cannot dump matrices to {out}: {e.strerror or e}", image_id=image_id)


def refine_image(cset: CandidateSet, model: MetricModel, cfg: Config, dump_dir=None) -> RefinedDetections:
    if cset.n == 0:
        return RefinedDetections(image_id=cset.image_id)

    expected = N_GEOMETRY + cset.d_deep
    if model.feature_dim != expected:
        raise ModelFeatureError(
            f"model expects {model.feature_dim} features but candidates give {expected}",
            image_id=cset.image_id,
        )

    scores = cset.scores
    if cset.n == 1:
        return apply_votes(cset.image_id, Partition(k=1, assign=[0]), scores, cfg, eigenvalues=(0.0,))

    s = similarity_matrix(model, phi_matrix(cset))
    kernel_input = graph.rescale_similarity(s) if cfg.rescale_similarity else s
    w = graph.edge_weights(kernel_input, cfg)
    lap = graph.laplacian(w)
    p, eigenvalues = spectral.cluster_with_spectrum(lap, cfg)

    if dump_dir is not None:
        _dump_matrices(dump_dir, cset.image_id, S=s.entries, W=w.entries, L=lap.entries)

    result = apply_votes(cset.image_id, p, scores, cfg, eigenvalues=eigenvalues)
    logger.debug(
        "%s: n=%d k=%d kept=%d", cset.image_id, cset.n, p.k, len(result.kept)
    )
    return result


def baseline_detections(cset: CandidateSet, cfg: Config) -> RefinedDetections:
    """Single-threshold first stage: every candidate scoring at least vote_threshold."""
    kept = tuple(
        (i, c.score) for i, c in enumerate(cset.candidates) if c.score >= cfg.vote_threshold
    )
    return RefinedDetections(image_id=cset.image_id, kept=kept)


# ------------------------
# CORPUS
# ------------------------

def _refine_or_report(cset: CandidateSet, model: MetricModel, cfg: Config, dump_dir=None):
    try:
        return refine_image(cset, model, cfg, dump_dir=dump_dir), None
    except MLGCError as e:
        return None, (cset.image_id, e.detail)


def refine_corpus(
    sets: Sequence[CandidateSet],
    model: MetricModel,
    cfg: Config,
    jobs: int = 1,
    dump_dir=None,
) -> List[RefinedDetections]:
    """
    Refine every image independently, results in input order. Failed images
    are logged and skipped; a CorpusError listing them is raised at the end.
    """
    work = partial(_refine_or_report, model=model, cfg=cfg, dump_dir=dump_dir)
    outcomes = map_ordered(work, list(sets), jobs=jobs, desc="refine")

    results, failures = [], []
    for result, failure in outcomes:
        if failure is not None:
            logger.error("image %s failed: %s", *failure)
            failures.append(failure)
        else:
            results.append(result)

    if failures:
        raise CorpusError(failures, results)
    return results


# ------------------------
# OUTPUT RECORDS
# ------------------------

def to_record(result: RefinedDetections, cset: CandidateSet) -> DetectionsRecord:
    detections = []
    for i, score in result.kept:
        box = cset.candidates[i].box
        detections.append(DetectionRecord(x=box.x, y=box.y, w=box.w, h=box.h, score=score))
    groups = [
        GroupRecord(id=v.group_id, verdict=v.verdict, size=v.size)
        for v in result.group_verdicts
    ]
    return DetectionsRecord(image_id=result.image_id, detections=detections, groups=groups)


def eigenvalue_line(result: RefinedDetections) -> str:
    return dumps({"image_id": result.image_id, "eigenvalues": list(result.eigenvalues)})
