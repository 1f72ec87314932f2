import json
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cssf.errors import ConfigError, SolverFailure
from cssf.harness import (ExperimentConfig, compute_roc, local_peaks_ok, preset_dict,
                          resolve_config, run_experiment)
from cssf.harness.cli import main
from cssf.harness.experiments import load_roc_csv
from cssf.recovery import DetectionSet


def _fixed(indices):
    return lambda g: DetectionSet(np.asarray(indices, dtype=int), np.ones(len(indices)))


def test_roc_hand_fixture():
    # pattern over 4 trials: all found, one missed, all found plus a false one, nothing
    pattern = [[0, 1], [0], [0, 1, 5], []]
    per = [(_fixed(pattern[i % 4]), [0, 1]) for i in range(200)]
    roc = compute_roc(per, [0.5])
    assert roc.points == ((0.5, 0.5, 0.25),)


def test_roc_extremes():
    perfect = [(np.array([1.0, 0.0, 0.8]), [0, 2])] * 5
    roc = compute_roc(perfect, [0.1, 0.5, 0.9])
    assert list(roc.pd) == [1.0, 1.0, 0.0] and list(roc.pfa) == [0.0, 0.0, 0.0]
    empty = [(np.zeros(3), [0])] * 3
    r2 = compute_roc(empty, [0.2])
    assert r2.pd[0] == 0 and r2.pfa[0] == 0
    missing = [(np.array([1.0, 0.5]), [-1])]
    assert compute_roc(missing, [0.9]).pd[0] == 0
    with pytest.raises(ValueError):
        compute_roc([], [0.5])
    with pytest.raises(ValueError):
        compute_roc(perfect, [])


def test_pd_at_pfa():
    per = [(np.array([1.0, 0.6, 0.3]), [0])] * 2
    roc = compute_roc(per, [0.2, 0.5, 0.7])
    assert roc.pd_at_pfa(0.0) == 1.0
    per = [(np.array([0.2, 1.0]), [0])]
    roc = compute_roc(per, [0.1, 0.5])
    assert roc.pd_at_pfa(0.5) == 0.0 and roc.pd_at_pfa(1.0) == 1.0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.floats(0, 1), min_size=4, max_size=4), min_size=1, max_size=10),
       st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8, unique=True))
def test_roc_monotone_in_threshold(scores, gammas):
    per = [(np.array(s), [0, 2]) for s in scores]
    roc = compute_roc(per, gammas)
    assert np.all(np.diff(roc.pd) <= 0) and np.all(np.diff(roc.pfa) <= 0)
    assert np.all((roc.pd >= 0) & (roc.pd <= 1))


def test_local_peaks():
    assert local_peaks_ok([0, 1, 0, 0.9, 0, 0.2, 0], [1, 3])
    assert not local_peaks_ok([0, 1, 0, 0.9, 0, 0.6, 0], [1, 3])
    assert not local_peaks_ok([0, 1, 0.95, 0.9, 0], [1, 3])


@pytest.mark.parametrize("over,msg", [
    ({"trials": 0}, "trials"),
    ({"gammas": []}, "empty"),
    ({"gammas": [0.0, 0.5]}, "thresholds"),
    ({"seed": -1}, "seed"),
    ({"workers": 0}, "workers"),
    ({"bogus": 1}, "unknown"),
    ({"radar": {"l_samples": -4}}, "radar"),
    ({"scene": {"curves": [{"label": "x", "estimator": "ml", "schedule": "linear",
                            "n_pulses": 3}]}}, "curve"),
])
def test_config_errors(over, msg):
    with pytest.raises(ConfigError, match=msg):
        resolve_config("custom", over)


def test_unknown_preset_and_roundtrip():
    with pytest.raises(ConfigError):
        preset_dict("nope")
    cfg = resolve_config("roc-joint")
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    d = cfg.to_dict()
    d["pipeline"] = None
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(d)


def _tiny(tmp_path, **kw):
    over = {"trials": 2, "seed": 5,
            "scene": {"curves": [{"label": "CS-LSFR-4", "estimator": "cs",
                                  "schedule": "linear", "n_pulses": 4},
                                 {"label": "MF-RSFR-4", "estimator": "mf",
                                  "schedule": "random", "n_pulses": 4}]}}
    over.update(kw)
    return resolve_config("custom", over)


def _read_all(d):
    return {f: open(os.path.join(d, f), "rb").read() for f in sorted(os.listdir(d))}


def test_determinism_and_worker_independence(tmp_path):
    cfg = _tiny(tmp_path)
    run_experiment(cfg, str(tmp_path / "a"))
    run_experiment(cfg, str(tmp_path / "b"))
    a, b = _read_all(tmp_path / "a"), _read_all(tmp_path / "b")
    assert a == b and set(a) == {"roc.csv", "summary.json", "manifest.json"}
    run_experiment(_tiny(tmp_path, workers=2), str(tmp_path / "c"))
    c = _read_all(tmp_path / "c")
    assert c["roc.csv"] == a["roc.csv"] and c["summary.json"] == a["summary.json"]
    curves = load_roc_csv(tmp_path / "a" / "roc.csv")
    assert set(curves) == {"CS-LSFR-4", "MF-RSFR-4"} and len(curves["CS-LSFR-4"].points) == 100


def test_single_noiseless_target_detected(tmp_path):
    cfg = _tiny(tmp_path, trials=1, radar={"noise_var": 0.0, "jammer": {"power": 0.0}},
                gammas=[0.1, 0.5, 0.9, 1.0])
    cfg.scene["ranges"] = [1045.0]
    summ = run_experiment(cfg, str(tmp_path / "o"))
    roc = load_roc_csv(tmp_path / "o" / "roc.csv")
    for c in roc.values():
        assert np.all(c.pd == 1.0)
    assert summ["curves"]["CS-LSFR-4"]["pd_at_pfa"]["0.05"] == 1.0


def test_cli_exit_codes_and_manifest_rerun(tmp_path, capsys):
    cfg_file = tmp_path / "over.json"
    cfg_file.write_text(json.dumps(_tiny(tmp_path).to_dict()))
    out = tmp_path / "run1"
    assert main(["run", "--preset", "custom", "--config", str(cfg_file), "--out", str(out)]) == 0
    out2 = tmp_path / "run2"
    assert main(["run", "--preset", "custom", "--config", str(out / "manifest.json"),
                 "--out", str(out2)]) == 0
    assert _read_all(out) == _read_all(out2)
    assert main(["run", "--preset", "custom", "--trials", "0", "--out", str(tmp_path / "x")]) == 2
    assert main(["run", "--preset", "roc-range", "--config", str(cfg_file),
                 "--out", str(tmp_path / "y")]) == 2
    (tmp_path / "bad.json").write_text("[1, 2]")
    assert main(["run", "--preset", "custom", "--config", str(tmp_path / "bad.json"),
                 "--out", str(tmp_path / "z")]) == 2
    with pytest.raises(SystemExit):
        main(["run", "--preset", "nope", "--out", str(tmp_path / "w")])


def test_cli_solver_failure_exit_code(tmp_path, monkeypatch):
    import cssf.harness.experiments as ex

    def boom(*a, **k):
        raise SolverFailure("forced")

    monkeypatch.setattr(ex, "dantzig_select", boom)
    cfg_file = tmp_path / "over.json"
    cfg_file.write_text(json.dumps(_tiny(tmp_path, trials=1).to_dict()))
    assert main(["run", "--preset", "custom", "--config", str(cfg_file),
                 "--out", str(tmp_path / "o")]) == 3


def test_cli_af_and_coherence(tmp_path, capsys):
    p = tmp_path / "af.csv"
    assert main(["af", "--m-t", "2", "--n-r", "2", "--pulses", "3", "--ranges", "0,15",
                 "--speeds", "0", "--out", str(p)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["samples"] == 2 and summary["peak"] == pytest.approx(2 * 3 * 2)
    assert main(["af", "--pulses", "0", "--out", str(p)]) == 2
    assert main(["coherence", "--delta-f", "4e6", "--pulses", "2,3", "--draws", "2",
                 "--out", str(tmp_path / "coh")]) == 0
    assert (tmp_path / "coh" / "coherence.csv").exists()
    assert main(["coherence", "--pulses", "0", "--draws", "1", "--out", str(tmp_path / "c2")]) == 2
