"""
File persistence for every artifact the pipeline reads or writes.
Candidates, ground truth, labels and detections are JSON Lines; config,
generator spec, model and report are single JSON objects.
"""
from contextlib import contextmanager
import logging
from pathlib import Path
from typing import Iterable, List, Type, TypeVar

from pydantic import BaseModel, ValidationError

from mlgc import schemas
from mlgc.errors import InputError, SchemaError
from mlgc.models import MetricModel, PairSample
from mlgc.utils.json_utils import iter_jsonl, read_json, write_json, write_jsonl

logger = logging.getLogger(__name__)

T = TypeVar("T", bound=BaseModel)


def _describe(e: ValidationError) -> str:
    first = e.errors()[0]
    where = ".".join(str(p) for p in first.get("loc", ())) or "record"
    return f"{where}: {first.get('msg', 'invalid value')}"


def _read_records(path, schema: Type[T]) -> List[T]:
    """Validated records in file order; every image_id may appear on one line only."""
    records = []
    first_line: dict[str, int] = {}
    for line_no, obj in iter_jsonl(path):
        try:
            record = schema.model_validate(obj)
        except ValidationError as e:
            raise SchemaError(f"{Path(path).name} line {line_no}: {_describe(e)}")

        seen = first_line.setdefault(record.image_id, line_no)
        if seen != line_no:
            raise SchemaError(
                f"{Path(path).name} line {line_no}: duplicate image_id (first on line {seen})",
                image_id=record.image_id,
            )
        records.append(record)
    logger.debug("read %d %s record(s) from %s", len(records), schema.__name__, path)
    return records


@contextmanager
def _writing(path):
    try:
        yield
    except OSError as e:
        raise InputError(f"cannot write {path}: {e.strerror or e}")


# ------------------------
# CANDIDATES
# ------------------------

def read_candidate_sets(path) -> List[schemas.CandidateSet]:
    return _read_records(path, schemas.CandidateSet)


def write_candidate_sets(sets: Iterable[schemas.CandidateSet], path) -> None:
    with _writing(path):
        write_jsonl(path, (s.to_record() for s in sets))


# ------------------------
# GROUND TRUTH / LABELS
# ------------------------

def read_ground_truth(path) -> List[schemas.GroundTruth]:
    return _read_records(path, schemas.GroundTruth)


def write_ground_truth(gts: Iterable[schemas.GroundTruth], path) -> None:
    with _writing(path):
        write_jsonl(path, (gt.model_dump(mode="json") for gt in gts))


def read_labels(path) -> List[schemas.ImageLabels]:
    return _read_records(path, schemas.ImageLabels)


def write_labels(labels: Iterable[schemas.ImageLabels], path) -> None:
    with _writing(path):
        write_jsonl(path, (lab.model_dump(mode="json") for lab in labels))


# ------------------------
# DETECTIONS (refine output)
# ------------------------

def read_detections(path) -> List[schemas.DetectionsRecord]:
    return _read_records(path, schemas.DetectionsRecord)


def write_detections(records: Iterable[schemas.DetectionsRecord], path) -> None:
    with _writing(path):
        write_jsonl(path, (r.model_dump(mode="json") for r in records))


# ------------------------
# PAIR DUMP
# ------------------------

def write_pairs(samples: Iterable[PairSample], path) -> None:
    rows = (
        schemas.PairRecord(
            feature=[float(v) for v in s.feature],
            label=s.label,
            image_id=s.image_id,
            i=s.i,
            j=s.j,
        ).model_dump(mode="json")
        for s in samples
    )
    with _writing(path):
        write_jsonl(path, rows)


# ------------------------
# SINGLE-OBJECT FILES
# ------------------------

def _read_object(path, schema: Type[T]) -> T:
    try:
        return schema.model_validate(read_json(path))
    except ValidationError as e:
        raise SchemaError(f"{Path(path).name}: {_describe(e)}")


def load_config(path=None) -> schemas.Config:
    """Absent file or absent fields take defaults."""
    if path is None:
        return schemas.Config()
    return _read_object(path, schemas.Config)


def load_genspec(path) -> schemas.GenSpec:
    return _read_object(path, schemas.GenSpec)


def model_to_record(model: MetricModel) -> schemas.MetricModelRecord:
    return schemas.MetricModelRecord(
        weights=[float(v) for v in model.weights],
        bias=model.bias,
        platt_scale=model.platt_scale,
        feature_dim=model.feature_dim,
        standardize_mean=[float(v) for v in model.standardize_mean],
        standardize_std=[float(v) for v in model.standardize_std],
    )


def record_to_model(record: schemas.MetricModelRecord) -> MetricModel:
    return MetricModel(
        weights=record.weights,
        bias=record.bias,
        platt_scale=record.platt_scale,
        standardize_mean=record.standardize_mean,
        standardize_std=record.standardize_std,
    )


def read_model(path) -> MetricModel:
    return record_to_model(_read_object(path, schemas.MetricModelRecord))


def write_model(model: MetricModel, path) -> None:
    with _writing(path):
        write_json(path, model_to_record(model).model_dump(mode="json"))


def write_report(report: schemas.Report, path) -> None:
    with _writing(path):
        write_json(path, report.model_dump(mode="json", exclude_none=True))
