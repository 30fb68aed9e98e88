import logging

from mlgc import storage
from mlgc.metric import train_metric
from mlgc.pairs import build_training_pairs, training_pool

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="learn the pairwise similarity metric")
    parser.add_argument("--candidates", required=True)
    parser.add_argument("--config", default=None)
    parser.add_argument("--model-out", required=True)
    parser.add_argument("--dump-pairs", default=None, help="write the generated training pairs")
    parser.set_defaults(handler=handle)


def handle(args) -> None:
    cfg = storage.load_config(args.config)
    sets = storage.read_candidate_sets(args.candidates)

    samples = build_training_pairs(sets, cfg)
    if args.dump_pairs:
        storage.write_pairs(samples, args.dump_pairs)

    model = train_metric(samples, cfg, pool=training_pool(sets))
    storage.write_model(model, args.model_out)
    logger.info("model with %d weights written to %s", model.feature_dim, args.model_out)
