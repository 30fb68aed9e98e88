"""
Deterministic synthetic corpora with planted face crowds.

Each image gets a crowd latent (center, base face size, texture prototype).
Faces sit around the latent and share its unit-norm texture prototype;
background candidates are scattered uniformly with weak independent textures.
`score_overlap` sets the share of faces scored below the threshold and of
background scored above it.
"""
import logging
from typing import List, Tuple

import numpy as np

from mlgc.schemas import Box, Candidate, CandidateSet, GenSpec, GroundTruth, ImageLabels

logger = logging.getLogger(__name__)

IMAGE_W = 1024.0
IMAGE_H = 768.0
FACE_ASPECT = 1.25          # h / w
FACE_SIZE_RANGE = (12.0, 48.0)
BG_SIZE_RANGE = (8.0, 120.0)
PROTOTYPE_MIX = 0.3         # weight of the per-image direction against the shared face direction
BG_TEXTURE_SCALE = 0.2      # expected norm of a background texture
JITTER_CLIP = 2.0


def _unit(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    return v / norm if norm > 0 else v


def _score_ranges(tau: float):
    return {
        "face_high": (tau + 0.1 * (1 - tau), tau + 0.9 * (1 - tau)),
        "face_low": (0.7 * tau, 0.98 * tau),
        "bg_low": (0.0, 0.7 * tau),
        "bg_high": (tau, tau + 0.2 * (1 - tau)),
    }


def _scores(rng: np.random.Generator, count: int, overlap: float, high_key: str, low_key: str,
            crossing_high: bool, ranges) -> np.ndarray:
    n_cross = int(round(overlap * count))
    crossing = np.zeros(count, dtype=bool)
    crossing[rng.permutation(count)[:n_cross]] = True

    lo_hi = np.array([ranges[high_key], ranges[low_key]])
    # faces cross downwards, background crosses upwards
    pick = np.where(crossing == crossing_high, 0, 1) if count else np.zeros(0, dtype=int)
    u = rng.uniform(size=count)
    values = lo_hi[pick, 0] + u * (lo_hi[pick, 1] - lo_hi[pick, 0])
    return np.clip(values, 0.0, 1.0)


def _clipped_normal(rng: np.random.Generator, size) -> np.ndarray:
    return np.clip(rng.standard_normal(size), -JITTER_CLIP, JITTER_CLIP)


def _image(rng: np.random.Generator, spec: GenSpec, face_axis: np.ndarray, image_id: str):
    spread, d = spec.cluster_spread, spec.d_deep
    ranges = _score_ranges(spec.score_threshold)

    # crowd latent
    cx0 = IMAGE_W * rng.uniform(0.3, 0.7)
    cy0 = IMAGE_H * rng.uniform(0.3, 0.7)
    s0 = float(np.exp(rng.uniform(*np.log(FACE_SIZE_RANGE))))
    prototype = _unit(face_axis + PROTOTYPE_MIX * _unit(rng.standard_normal(d))) if d else np.zeros(0)

    # true face boxes
    nf = spec.faces_per_image
    z = rng.standard_normal((nf, 3))
    fw = s0 * np.exp(spread * z[:, 2])
    fh = FACE_ASPECT * fw
    fcx = cx0 + spread * IMAGE_W * z[:, 0]
    fcy = cy0 + spread * IMAGE_H * z[:, 1]
    truth = [Box(x=fcx[i] - fw[i] / 2, y=fcy[i] - fh[i] / 2, w=fw[i], h=fh[i]) for i in range(nf)]

    # face candidates: localization jitter around the true box
    j = _clipped_normal(rng, (nf, 3))
    cw = fw * np.exp(spread * j[:, 2])
    ch = fh * np.exp(spread * j[:, 2])
    ccx = fcx + spread * fw * j[:, 0]
    ccy = fcy + spread * fh * j[:, 1]
    # feature_noise is the expected norm of the perturbation, not a per-dimension std
    face_tex = prototype[None, :] + spec.feature_noise * rng.standard_normal((nf, d)) / np.sqrt(max(d, 1))
    face_scores = _scores(rng, nf, spec.score_overlap, "face_high", "face_low", False, ranges)

    # background candidates
    nb = spec.bg_per_image
    bw = np.exp(rng.uniform(*np.log(BG_SIZE_RANGE), size=nb))
    bh = bw * rng.uniform(0.6, 1.6, size=nb)
    bx = rng.uniform(0.0, IMAGE_W, size=nb) - bw / 2
    by = rng.uniform(0.0, IMAGE_H, size=nb) - bh / 2
    bg_tex = BG_TEXTURE_SCALE * rng.standard_normal((nb, d)) / np.sqrt(max(d, 1))
    bg_scores = _scores(rng, nb, spec.score_overlap, "bg_high", "bg_low", True, ranges)

    rows = [
        (Candidate(box=Box(x=ccx[i] - cw[i] / 2, y=ccy[i] - ch[i] / 2, w=cw[i], h=ch[i]),
                   score=float(face_scores[i]), features=tuple(face_tex[i].tolist())), 1)
        for i in range(nf)
    ] + [
        (Candidate(box=Box(x=bx[i], y=by[i], w=bw[i], h=bh[i]),
                   score=float(bg_scores[i]), features=tuple(bg_tex[i].tolist())), 0)
        for i in range(nb)
    ]
    order = rng.permutation(len(rows))

    cset = CandidateSet(
        image_id=image_id,
        image_w=IMAGE_W,
        image_h=IMAGE_H,
        candidates=tuple(rows[k][0] for k in order),
    )
    labels = ImageLabels(image_id=image_id, labels=tuple(rows[k][1] for k in order))
    return cset, labels, GroundTruth(image_id=image_id, boxes=tuple(truth))


def generate(spec: GenSpec) -> Tuple[List[CandidateSet], List[ImageLabels], List[GroundTruth]]:
    seeds = np.random.SeedSequence(spec.seed).spawn(spec.n_images + 1)
    # one face direction shared by every crowd in the corpus
    face_axis = _unit(np.random.default_rng(seeds[0]).standard_normal(spec.d_deep))

    sets, labels, gts = [], [], []
    for idx in range(spec.n_images):
        cset, lab, gt = _image(np.random.default_rng(seeds[idx + 1]), spec, face_axis, f"img{idx:04d}")
        sets.append(cset)
        labels.append(lab)
        gts.append(gt)

    logger.info(
        "generated %d image(s), %d face(s) and %d background candidate(s) each",
        spec.n_images, spec.faces_per_image, spec.bg_per_image,
    )
    return sets, labels, gts
