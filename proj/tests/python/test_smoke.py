import os
from pathlib import Path

import pytest

import dvca

DATA = Path(os.environ.get("DVCA_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))
SCENARIOS = DATA / "scenarios"
BENCH = DATA / "bench"


def test_nominal_run_passes():
    r = dvca.run(SCENARIOS / "cs2.json")
    assert r["verdict"]["passed"]
    assert r["message_count"] == sum(r["rows"].values())
    assert len(r["digest"]) == 64


def test_run_is_deterministic():
    a = dvca.run(SCENARIOS / "cs1.json", BENCH / "cs1_pred_wrong.json")
    b = dvca.run(SCENARIOS / "cs1.json", BENCH / "cs1_pred_wrong.json")
    assert not a["verdict"]["passed"]
    assert a["digest"] == b["digest"]


def test_attribute_prediction_fault():
    r = dvca.attribute(SCENARIOS / "cs1.json", BENCH / "cs1_pred_wrong.json")
    assert r["component"] == "Prediction"
    assert r["focus"]["component"] == "Prediction"
    assert r["reduction_rate"] > 0.998


def test_passing_scenario_raises():
    with pytest.raises(dvca.NoViolation):
        dvca.attribute(SCENARIOS / "cs2.json")
    assert issubclass(dvca.NoViolation, dvca.DvcaError)


def test_missing_file_raises():
    with pytest.raises(dvca.DvcaError):
        dvca.run(SCENARIOS / "missing.json")


def test_tarantula():
    scores = dict(dvca.tarantula({"a": 1, "c": 1}, {"a": 1, "b": 1}, 1, 1))
    assert scores == pytest.approx({"a": 0.5, "b": 1.0, "c": 0.0}, abs=1e-12)
    with pytest.raises(dvca.DvcaError):
        dvca.tarantula({}, {}, 0, 0)


def test_box_distance_and_rate():
    assert dvca.box_distance((0, 0), 0.0, (0.5, 0.5), (3, 0), 0.0, (0.5, 0.5)) == pytest.approx(2.0)
    assert dvca.reduction_rate(200) == pytest.approx(0.995)


def test_oracle_override():
    r = dvca.run(SCENARIOS / "cs2.json", oracle={"safe_distance": 0.3, "enabled": ["Mission"]})
    assert r["verdict"]["passed"]
