import json

import pytest

from mlgc import storage
from mlgc.errors import InputError, ParseError, SchemaError
from mlgc.models import MetricModel
from mlgc.schemas import Config, DetectionRecord, DetectionsRecord, GroupRecord, Report


def _write_lines(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def _candidate(features, score=0.5):
    return {"x": 1.0, "y": 2.0, "w": 3.0, "h": 4.0, "score": score, "features": features}


class TestCandidateFiles:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text("", encoding="utf-8")
        assert storage.read_candidate_sets(path) == []

    def test_single_candidate(self, tmp_path):
        path = tmp_path / "c.jsonl"
        record = {"image_id": "a", "image_w": 100, "image_h": 80, "candidates": [_candidate([1, 2, 3, 4])]}
        _write_lines(path, [json.dumps(record)])

        sets = storage.read_candidate_sets(path)
        assert len(sets) == 1
        assert sets[0].n == 1
        assert sets[0].d_deep == 4
        assert sets[0].candidates[0].box.w == 3.0

    def test_mixed_feature_lengths_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        record = {
            "image_id": "a", "image_w": 100, "image_h": 80,
            "candidates": [_candidate([1, 2, 3, 4]), _candidate([1, 2, 3, 4, 5])],
        }
        _write_lines(path, [json.dumps(record)])
        with pytest.raises(SchemaError):
            storage.read_candidate_sets(path)

    def test_round_trip_preserves_values_and_order(self, tmp_path, make_cset):
        cset = make_cset(
            [(0.5, 1.25, 10.0, 12.0, 0.9, [0.1, -0.2]),
             (30.0, 40.0, 5.0, 6.0, 0.2, [1e-17, 3.0]),
             (-4.0, 7.0, 8.0, 9.0, 0.55, [2.0, 0.0])],
            image_id="round",
        )
        path = tmp_path / "c.jsonl"
        storage.write_candidate_sets([cset], path)
        assert storage.read_candidate_sets(path) == [cset]

    def test_round_trip_empty_list(self, tmp_path):
        path = tmp_path / "c.jsonl"
        storage.write_candidate_sets([], path)
        assert path.read_text(encoding="utf-8") == ""

    def test_malformed_line_names_line(self, tmp_path):
        path = tmp_path / "c.jsonl"
        good = json.dumps({"image_id": "a", "image_w": 1, "image_h": 1, "candidates": []})
        _write_lines(path, [good, "{not json"])
        with pytest.raises(ParseError) as info:
            storage.read_candidate_sets(path)
        assert info.value.line == 2

    def test_invalid_utf8_names_line(self, tmp_path):
        path = tmp_path / "c.jsonl"
        good = json.dumps({"image_id": "a", "image_w": 1, "image_h": 1, "candidates": []})
        path.write_bytes(good.encode() + b"\n" + b'{"image_id": "b\xc3("}\n')
        with pytest.raises(ParseError) as info:
            storage.read_candidate_sets(path)
        assert info.value.line == 2
        assert "invalid UTF-8" in str(info.value)

    def test_duplicate_image_id_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        first = json.dumps({"image_id": "a", "image_w": 1, "image_h": 1, "candidates": []})
        other = json.dumps({"image_id": "b", "image_w": 1, "image_h": 1, "candidates": []})
        _write_lines(path, [first, other, first])
        with pytest.raises(SchemaError) as info:
            storage.read_candidate_sets(path)
        assert info.value.image_id == "a"
        assert "line 3" in str(info.value) and "first on line 1" in str(info.value)

    def test_duplicate_detections_rejected(self, tmp_path):
        path = tmp_path / "d.jsonl"
        _write_lines(path, [json.dumps({"image_id": "x"}), json.dumps({"image_id": "x"})])
        with pytest.raises(SchemaError):
            storage.read_detections(path)

    @pytest.mark.parametrize(
        "candidate",
        [
            {"x": 0, "y": 0, "w": 0, "h": 1, "score": 0.5},
            {"x": 0, "y": 0, "w": 1, "h": 1, "score": 1.5},
            {"x": 0, "y": 0, "w": 1, "h": 1, "score": 0.5, "extra": 1},
        ],
    )
    def test_invalid_candidate_rejected(self, tmp_path, candidate):
        path = tmp_path / "c.jsonl"
        _write_lines(path, [json.dumps({"image_id": "a", "image_w": 1, "image_h": 1, "candidates": [candidate]})])
        with pytest.raises(SchemaError):
            storage.read_candidate_sets(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            storage.read_candidate_sets(tmp_path / "absent.jsonl")


class TestConfigFiles:
    def test_absent_config_gives_defaults(self):
        assert storage.load_config(None) == Config()

    def test_partial_config(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"delta": 0.4, "weight_mode": "literal"}), encoding="utf-8")
        cfg = storage.load_config(path)
        assert cfg.delta == 0.4
        assert cfg.rescale_similarity is True
        assert cfg.weight_mode.value == "literal"
        assert cfg.k_max == 10

    @pytest.mark.parametrize(
        "override",
        [{"top_frac": 0.7, "bottom_frac": 0.5}, {"delta": 0}, {"k_max": 0}, {"unknown": 1}],
    )
    def test_invalid_config(self, tmp_path, override):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(override), encoding="utf-8")
        with pytest.raises(SchemaError):
            storage.load_config(path)

    def test_invalid_utf8_config(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_bytes(b'{"delta": "\xff"}')
        with pytest.raises(ParseError) as info:
            storage.load_config(path)
        assert "cfg.json" in str(info.value)


class TestModelAndOutputs:
    def test_model_round_trip(self, tmp_path):
        model = MetricModel(
            weights=[0.5, -1.25, 3.0], bias=0.1, platt_scale=2.0,
            standardize_mean=[0.0, 1.0, 2.0], standardize_std=[1.0, 0.5, 4.0],
        )
        path = tmp_path / "model.json"
        storage.write_model(model, path)
        loaded = storage.read_model(path)

        assert loaded.feature_dim == 3
        assert list(loaded.weights) == [0.5, -1.25, 3.0]
        assert loaded.bias == 0.1
        assert list(loaded.standardize_std) == [1.0, 0.5, 4.0]

    def test_model_length_mismatch(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text(json.dumps({
            "weights": [1.0], "bias": 0.0, "platt_scale": 1.0, "feature_dim": 2,
            "standardize_mean": [0.0], "standardize_std": [1.0],
        }), encoding="utf-8")
        with pytest.raises(SchemaError):
            storage.read_model(path)

    def test_detections_round_trip(self, tmp_path):
        record = DetectionsRecord(
            image_id="a",
            detections=[DetectionRecord(x=1, y=2, w=3, h=4, score=0.7)],
            groups=[GroupRecord(id=0, verdict="face", size=1), GroupRecord(id=1, verdict="nonface", size=2)],
        )
        path = tmp_path / "d.jsonl"
        storage.write_detections([record], path)
        assert storage.read_detections(path) == [record]

    def test_report_omits_pair_ap_when_absent(self, tmp_path):
        path = tmp_path / "report.json"
        storage.write_report(Report(ap_baseline=0.5, ap_refined=0.6, delta=0.1, n_images=2, n_gt=3), path)
        assert "pair_ap" not in json.loads(path.read_text(encoding="utf-8"))
