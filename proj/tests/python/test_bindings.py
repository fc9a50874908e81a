import math

import numpy as np
import pytest

import headglance as hg


@pytest.fixture(scope="module")
def small():
    return hg.generate_dataset("mixed", n_subjects=6, seed=3)


def test_constants():
    assert len(hg.GLANCE_REGIONS) == 16
    assert "center-stack" in hg.GLANCE_REGIONS
    assert hg.TASKS[2] == "radio-on-off"


def test_dataset_views(small):
    rot = small.rotations()
    assert rot.shape == (len(small), 3)
    assert rot.dtype == np.float64
    assert len(small.labels()) == len(small)
    assert small.subjects == [f"s{201 + i}" for i in range(6)]
    assert small.count("forward") > 0.9 * len(small)
    assert set(small.task_ids()) == set(hg.TASKS)
    assert small.provenance == "synthetic:seed=3"


def test_generation_is_deterministic(small):
    again = hg.generate_dataset("mixed", n_subjects=6, seed=3)
    assert np.array_equal(again.rotations(), small.rotations())
    other = hg.generate_dataset("mixed", n_subjects=6, seed=4)
    assert not np.array_equal(other.rotations(), small.rotations())


def test_scenario_json_round_trip():
    text = hg.default_scenario_json("all_owl", 3, 9)
    a = hg.generate_from_scenario(text)
    b = hg.generate_dataset("all_owl", 3, 9)
    assert np.allclose(a.rotations(), b.rotations(), atol=1e-5)
    assert a.labels() == b.labels()


def test_save_and_load(tmp_path, small):
    for name in ("d.csv", "d.json"):
        path = tmp_path / name
        small.save(path)
        back = hg.load_dataset(path)
        assert len(back) == len(small)
        assert np.allclose(back.rotations(), small.rotations(), atol=5e-7)


def test_errors_map_to_exception_types(tmp_path):
    with pytest.raises(hg.DataError):
        hg.load_dataset(tmp_path / "missing.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("subject_id,task_id,timestamp_ms,rot_x,rot_y,rot_z,glance\ns1,t,0,0,0,0,dashboard\n")
    with pytest.raises(hg.DataError, match="dashboard"):
        hg.load_dataset(bad)
    with pytest.raises(hg.PreconditionError):
        hg.metrics(0, 0, 0, 0)
    assert issubclass(hg.DataError, hg.Error)
    assert issubclass(hg.Error, RuntimeError)


def test_metrics():
    m = hg.metrics(40, 10, 20, 30)
    assert m["ac"] == pytest.approx(0.7)
    assert m["kp"] == pytest.approx(0.4)
    assert m["fs"] == pytest.approx(80 / 110)


def test_run_experiment(small):
    r = hg.run_experiment(small, classifier="knn", condition="balanced", iterations=3, seed=1, jobs=2)
    assert r["audit_ok"]
    assert r["pair"] == "forward/center-stack"
    assert len(r["iterations"]) == 3
    assert 0.0 <= r["mean"]["ac"] <= 1.0
    serial = hg.run_experiment(small, classifier="knn", condition="balanced", iterations=3, seed=1, jobs=1)
    assert serial["mean"] == r["mean"]
    hmm = hg.run_experiment(small, classifier="hmm", condition="original", iterations=2, seed=1)
    assert hmm["unit"] == "sequences"


def test_pca(small):
    p = hg.fit_pca(small)
    assert sum(p["explained_variance_ratio"]) == pytest.approx(1.0, abs=1e-9)
    c = np.array(p["components"])
    assert np.allclose(c @ c.T, np.eye(3), atol=1e-9)


def test_pose_round_trip():
    pts = hg.project_face(-10.0, 25.0, 5.0)
    assert pts.shape == (7, 2)
    fit = hg.estimate_pose(pts)
    assert fit["rot_x"] == pytest.approx(-10.0, abs=1e-4)
    assert fit["rot_y"] == pytest.approx(25.0, abs=1e-4)
    assert fit["rot_z"] == pytest.approx(5.0, abs=1e-4)
    with pytest.raises(hg.NumericalError):
        hg.estimate_pose(np.zeros((7, 2)))


def test_profiles():
    ds = hg.generate_dataset("mixed", n_subjects=12, seed=7)
    out = hg.profile_subjects(ds)
    assert out["n"] == len(out["profiles"])
    assert -1.0 <= out["pearson_r"] <= 1.0
    assert all(p["mover_type"] in {"owl", "lizard", "unassigned"} for p in out["profiles"])
    assert not math.isnan(out["p_value"])


def test_config_validation(source_dir):
    assert hg.validate_experiment_config((source_dir / "configs" / "quick.json").read_text()) == 8
    with pytest.raises(hg.DataError, match="unknown key"):
        hg.validate_experiment_config('{"dataset": {}, "pairs": [], "classifiers": [], "conditions": [], "split": {}, "x": 1}')
