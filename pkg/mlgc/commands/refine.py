import logging
from pathlib import Path

from mlgc import storage
from mlgc.errors import CorpusError, InputError
from mlgc.refine import baseline_detections, eigenvalue_line, refine_corpus, to_record

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("refine", help="group candidates and vote per group")
    parser.add_argument("--candidates", required=True)
    parser.add_argument("--model", required=True)
    parser.add_argument("--config", default=None)
    parser.add_argument("--out", required=True)
    parser.add_argument("--baseline-out", default=None, help="also write single-threshold detections")
    parser.add_argument("--dump-eigvals", default=None)
    parser.add_argument("--dump-matrices", default=None, help="directory for S/W/L matrix dumps")
    parser.add_argument("--jobs", type=int, default=1)
    parser.set_defaults(handler=handle)


def _write_eigenvalues(results, path) -> None:
    try:
        with Path(path).open("w", encoding="utf-8") as f:
            for result in results:
                f.write(eigenvalue_line(result) + "\n")
    except OSError as e:
        raise InputError(f"cannot write {path}: {e.strerror or e}")


def _write_outputs(results, by_id, args) -> None:
    storage.write_detections((to_record(r, by_id[r.image_id]) for r in results), args.out)
    if args.dump_eigvals:
        _write_eigenvalues(results, args.dump_eigvals)


def handle(args) -> None:
    cfg = storage.load_config(args.config)
    sets = storage.read_candidate_sets(args.candidates)
    model = storage.read_model(args.model)
    by_id = {s.image_id: s for s in sets}

    if args.baseline_out:
        storage.write_detections(
            (to_record(baseline_detections(s, cfg), s) for s in sets), args.baseline_out
        )

    try:
        results = refine_corpus(sets, model, cfg, jobs=args.jobs, dump_dir=args.dump_matrices)
    except CorpusError as e:
        # keep what succeeded on disk before reporting
        _write_outputs(e.results, by_id, args)
        raise

    _write_outputs(results, by_id, args)
    kept = sum(len(r.kept) for r in results)
    logger.info("refined %d image(s), %d detection(s) kept", len(results), kept)
