import logging
from pathlib import Path

from mlgc import storage
from mlgc.errors import InputError
from mlgc.synthgen import generate

logger = logging.getLogger(__name__)

CANDIDATES_FILE = "candidates.jsonl"
GROUND_TRUTH_FILE = "ground_truth.jsonl"
LABELS_FILE = "labels.jsonl"


def register(subparsers) -> None:
    parser = subparsers.add_parser("generate", help="write a synthetic corpus")
    parser.add_argument("--spec", required=True, help="generator spec JSON")
    parser.add_argument("--out-dir", required=True, help="directory for the corpus files")
    parser.set_defaults(handler=handle)


def handle(args) -> None:
    spec = storage.load_genspec(args.spec)
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise InputError(f"cannot create {out}: {e.strerror or e}")

    sets, labels, gts = generate(spec)
    storage.write_candidate_sets(sets, out / CANDIDATES_FILE)
    storage.write_ground_truth(gts, out / GROUND_TRUTH_FILE)
    storage.write_labels(labels, out / LABELS_FILE)
    logger.info("wrote corpus to %s", out)
