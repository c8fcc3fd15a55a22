import itertools
import json
import os
import subprocess

import numpy as np
import pytest

import skillchair as sc


def brute_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p, n in itertools.product(pos, neg))
    return wins / (len(pos) * len(neg))


def test_feature_names():
    assert len(sc.FEATURE_NAMES) == 13
    assert sc.FEATURE_NAMES[0] == "axn"
    assert sc.FEATURE_NAMES[6] == "lb"


def test_roc_auc_matches_pair_counting():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(2, 60))
        scores = rng.integers(0, 5, size=n).astype(float)
        labels = rng.integers(0, 2, size=n)
        labels[0], labels[1] = 0, 1
        assert sc.roc_auc(scores, labels.tolist()) == brute_auc(scores, labels)
    curve = sc.roc_curve(np.array([0.1, 0.9, 0.5]), [0, 1, 1])
    assert curve[0] == (0.0, 0.0)
    assert curve[-1] == (1.0, 1.0)


def test_feature_functions():
    spike = np.zeros(18000)
    spike[7] = 10.0
    assert sc.active_portion(spike) == 1.0 / 18000.0
    assert sc.quiescent_dispersion(spike) == 0.0
    assert sc.lean_back_portion(np.full(100, np.cos(np.radians(20.0)))) == 1.0
    with pytest.raises(sc.SkillchairError) as err:
        sc.active_portion(np.array([1.0]))
    assert err.value.code == "EmptySeries"


def test_simulate_extract_and_fit():
    logs = sc.simulate(high_count=2, low_count=2, duration_seconds=600)
    assert [l.player_id for l in logs] == ["p01", "p02", "p03", "p04"]
    assert sorted(l.skill for l in logs) == [0, 0, 1, 1]
    samples = logs[0].samples
    assert samples.shape[1] == 10
    assert np.all(np.diff(samples[:, 0]) > 0)
    rebuilt = sc.PlayerLog(logs[0].player_id, logs[0].skill, samples)
    assert rebuilt == logs[0]

    ds = sc.build_dataset(logs)
    assert ds.features.shape == (ds.rows, 13)
    assert set(ds.labels) == {0, 1}
    model = sc.fit_model("lr", ds.features, ds.labels)
    scores = model.score(ds.features)
    assert scores.shape == (ds.rows,)
    again = sc.load_model(model.to_json())
    assert np.array_equal(again.score(ds.features), scores)
    with pytest.raises(sc.SkillchairError) as err:
        sc.fit_model("knn", ds.features[:3], ds.labels[:3], knn={"k": 10})
    assert err.value.code == "KTooLarge"


def test_player_log_validation():
    bad = np.zeros((3, 10))
    bad[:, 0] = [0.0, 0.02, 0.01]
    with pytest.raises(sc.SkillchairError) as err:
        sc.PlayerLog("p1", 0, bad)
    assert err.value.code == "UnsortedLog"
    with pytest.raises(sc.SkillchairError):
        sc.PlayerLog("p1", 2, np.zeros((1, 10)))


def test_evaluate_and_files(tmp_path):
    logs = sc.simulate(high_count=3, low_count=3, duration_seconds=720, seed=5)
    sc.write_logs(logs, tmp_path / "logs")
    assert sc.read_logs(tmp_path / "logs") == logs
    ds = sc.build_dataset(logs)
    sc.write_dataset_csv(ds, tmp_path / "f.csv")
    assert sc.read_dataset_csv(tmp_path / "f.csv") == ds
    report = sc.evaluate(ds, {"models": ["lr", "knn"], "evaluation": {"repeats": 6, "holdout": 2, "seed": 1}})
    assert [m["model"] for m in report["models"]] == ["lr", "knn"]
    assert len(report["models"][0]["auc_per_repeat"]) == 6
    assert "Logistic Regression" in sc.format_auc_table(report)
    with pytest.raises(sc.SkillchairError) as err:
        sc.evaluate(ds, {"evaluation": {"holdout": 1}})
    assert err.value.code == "InfeasibleSplit"


def test_run_is_deterministic(tmp_path):
    cfg = {
        "population": {"high_count": 3, "low_count": 3, "duration_seconds": 900},
        "evaluation": {"repeats": 5, "holdout": 2, "seed": 3},
        "models": ["lr", "svm"],
        "output": str(tmp_path / "a"),
    }
    first, table = sc.run(cfg)
    cfg["output"] = str(tmp_path / "b")
    second, _ = sc.run(cfg)
    assert first == second
    assert "Support Vector Machine" in table
    assert (tmp_path / "a" / "report.json").read_text() == (tmp_path / "b" / "report.json").read_text()


@pytest.mark.skipif(not os.environ.get("SKILLCHAIR_CLI"), reason="CLI path not provided")
def test_cli_report_round_trip(tmp_path):
    cli = os.environ["SKILLCHAIR_CLI"]
    out = subprocess.run(
        [cli, "run", "--players", "6", "--duration-minutes", "12", "--repeats", "3", "--holdout", "2",
         "--models", "lr", "--out", str(tmp_path)],
        capture_output=True, text=True, check=True)
    assert "Logistic Regression" in out.stdout
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["models"][0]["model"] == "lr"
