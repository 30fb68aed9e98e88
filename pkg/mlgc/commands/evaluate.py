import logging

from mlgc import storage
from mlgc.errors import InputError
from mlgc.evaluation import compare, pair_discrimination_ap, write_pr_csv

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("eval", help="compare baseline and refined detections")
    parser.add_argument("--baseline", required=True)
    parser.add_argument("--refined", required=True)
    parser.add_argument("--gt", required=True)
    parser.add_argument("--config", default=None)
    parser.add_argument("--report", required=True)
    parser.add_argument("--pr-csv", default=None, help="precision/recall points of the refined run")
    parser.add_argument("--labels", default=None, help="candidate labels, enables pair_ap")
    parser.add_argument("--candidates", default=None)
    parser.add_argument("--model", default=None)
    parser.add_argument("--jobs", type=int, default=1)
    parser.set_defaults(handler=handle)


def _pair_ap(args):
    given = [args.labels, args.candidates, args.model]
    if not any(given):
        return None
    if not all(given):
        raise InputError("--labels, --candidates and --model must be given together")
    return pair_discrimination_ap(
        storage.read_candidate_sets(args.candidates),
        storage.read_labels(args.labels),
        storage.read_model(args.model),
    )


def handle(args) -> None:
    cfg = storage.load_config(args.config)
    comparison = compare(
        storage.read_detections(args.baseline),
        storage.read_detections(args.refined),
        storage.read_ground_truth(args.gt),
        cfg,
        jobs=args.jobs,
    )

    report = comparison.report
    pair_ap = _pair_ap(args)
    if pair_ap is not None:
        report = report.model_copy(update={"pair_ap": pair_ap})
        logger.info("pair discrimination AP %.4f", pair_ap)

    storage.write_report(report, args.report)
    if args.pr_csv:
        write_pr_csv(comparison.refined, args.pr_csv)
