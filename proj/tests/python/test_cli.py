import csv
import json
import subprocess

import pytest


def run(cli, *args, check=True):
    proc = subprocess.run([cli, *map(str, args)], capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(f"{args} exited {proc.returncode}: {proc.stderr}")
    return proc


@pytest.fixture(scope="module")
def synth_dir(cli, tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    run(cli, "synth", "--profile", "mixed", "--subjects", "6", "--seed", "4", "--out", out)
    return out


def test_synth_outputs(synth_dir):
    rows = list(csv.DictReader((synth_dir / "dataset.csv").open()))
    assert len(rows) == 6 * 1584
    assert list(rows[0]) == ["subject_id", "task_id", "timestamp_ms", "rot_x", "rot_y", "rot_z", "glance"]
    manifest = json.loads((synth_dir / "manifest.json").read_text())
    assert manifest["command"] == "synth"
    assert manifest["seed"] == 4
    assert "dataset.csv" in manifest["outputs"]


def test_synth_scenario_file_reproduces(cli, synth_dir, tmp_path):
    run(cli, "synth", "--scenario", synth_dir / "scenario.json", "--out", tmp_path)
    assert (tmp_path / "dataset.csv").read_bytes() == (synth_dir / "dataset.csv").read_bytes()


def test_run_summary_and_determinism(cli, source_dir, tmp_path):
    config = source_dir / "configs" / "quick.json"
    a, b = tmp_path / "a", tmp_path / "b"
    out = run(cli, "run", "--config", config, "--jobs", "1", "--out", a).stdout
    run(cli, "run", "--config", config, "--jobs", "2", "--out", b)
    for name in ("report.csv", "summary.csv", "summary.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert "k-Nearest Neighbor" in out
    summary = list(csv.DictReader((a / "summary.csv").open()))
    metric_cells = sum(1 for r in summary for k, v in r.items() if k not in ("pair", "classifier") and v)
    assert metric_cells == 4 * 2 * 3
    audit = json.loads((a / "audit.json").read_text())
    assert len(audit) == 8
    flags = ("split_disjoint", "train_normalized", "balanced_counts", "confusion_totals", "metric_recount")
    assert all(entry[f] for entry in audit for f in flags)


def test_missing_dataset_is_a_validation_error(cli, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "dataset": {"file": "nope.csv"},
        "pairs": [["forward", "center-stack"]],
        "classifiers": ["knn"],
        "conditions": ["original"],
        "split": {"iterations": 2},
    }))
    proc = run(cli, "run", "--config", cfg, "--out", tmp_path / "o", check=False)
    assert proc.returncode == 3
    err = json.loads(proc.stderr.strip().splitlines()[-1])
    assert err["error"] == "validation"
    assert "nope.csv" in err["message"]


def test_bad_config_and_usage_errors(cli, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"dataset": {"file": "x.csv"}, "bogus": 1}')
    assert run(cli, "run", "--config", cfg, check=False).returncode == 3
    assert run(cli, "run", check=False).returncode == 2
    assert run(cli, "frobnicate", check=False).returncode == 2


def test_pca_and_diffs(cli, synth_dir, tmp_path):
    data = synth_dir / "dataset.csv"
    run(cli, "pca", "--dataset", data, "--iterations", "5", "--components", "2", "--out", tmp_path / "pca")
    header = (tmp_path / "pca" / "projection.csv").read_text().splitlines()[0]
    assert header.endswith("pc_1,pc_2")
    comps = json.loads((tmp_path / "pca" / "components.json").read_text())
    assert len(comps["components"]) == 3
    run(cli, "diffs", "--dataset", data, "--series", "s201", "--out", tmp_path / "diffs")
    corr = json.loads((tmp_path / "diffs" / "correlation.json").read_text())
    assert -1 <= corr["pearson_r"] <= 1
    assert (tmp_path / "diffs" / "series_s201.csv").exists()


def test_pose_pipeline(cli, tmp_path):
    import headglance as hg

    lines = ["frame_id,analyst_id,landmark_role,x_px,y_px,missing_flag"]
    roles = ["right-eye-outer", "right-eye-inner", "left-eye-outer", "left-eye-inner", "nose-tip", "mouth-right", "mouth-left"]
    for frame, yaw in enumerate([0, 10, 20, 30]):
        pts = hg.project_face(0.0, float(yaw), 0.0)
        for analyst, dx in (("a", 0.0), ("b", 1.0)):
            for role, (x, y) in zip(roles, pts):
                lines.append(f"{frame},{analyst},{role},{x + dx:.6f},{y:.6f},0")
    (tmp_path / "lm.csv").write_text("\n".join(lines) + "\n")
    (tmp_path / "spans.csv").write_text("start_ms,end_ms,glance\n0,100,forward\n100,1000,center-stack\n")
    run(cli, "pose", "--landmarks", tmp_path / "lm.csv", "--glance-spans", tmp_path / "spans.csv",
        "--subject", "s1", "--task", "radio-on-off", "--out", tmp_path / "out")
    rows = list(csv.DictReader((tmp_path / "out" / "rotations.csv").open()))
    assert [round(float(r["rot_y"])) for r in rows] == [0, 10, 20, 30]
    summary = json.loads((tmp_path / "out" / "reduction_summary.json").read_text())
    assert summary["merged"] == 4
    labelled = list(csv.DictReader((tmp_path / "out" / "dataset.csv").open()))
    assert [r["glance"] for r in labelled] == ["forward", "forward", "center-stack", "center-stack"]
