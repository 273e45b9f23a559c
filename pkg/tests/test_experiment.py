import csv
import os
from dataclasses import replace

import numpy as np
import pytest

from ris_mec import experiment as ex
from ris_mec.params import SystemParams

SMALL = ex.ExperimentConfig(params=SystemParams(K=3), sweep_values=(10, 20), trials=3)


def test_without_ris_ignores_element_count():
    cfg = ex.ExperimentConfig(sweep_axis="d", sweep_values=(280.0,), trials=1)
    a = ex.run_trial(replace(cfg, params=replace(cfg.params, N=10)), 280.0, 0, "without_ris")
    b = ex.run_trial(replace(cfg, params=replace(cfg.params, N=50)), 280.0, 0, "without_ris")
    assert a.latency == b.latency


def test_optimized_never_worse_than_random():
    for trial in range(8):
        rand = ex.run_trial(SMALL, 20, trial, "random_phase")
        opt = ex.run_trial(SMALL, 20, trial, "optimized")
        assert opt.latency <= rand.latency
        assert np.all(np.diff(opt.latency_history) <= 0)
        assert opt.outer_iters <= SMALL.outer_max_iter


def test_leakage_objective_runs():
    cfg = replace(SMALL, phase_objective="leakage", mu=0.5)
    res = ex.run_trial(cfg, 10, 0, "optimized")
    assert res.ok and res.latency > 0


def test_run_trial_needs_single_scheme():
    with pytest.raises(ValueError):
        ex.run_trial(SMALL, 10, 0)


def test_config_validation():
    with pytest.raises(ValueError):
        ex.ExperimentConfig(trials=0)
    with pytest.raises(ValueError):
        ex.ExperimentConfig(scheme="best")
    with pytest.raises(ValueError):
        ex.ExperimentConfig(sweep_values=(10.5,))
    with pytest.raises(ValueError):
        ex.ExperimentConfig(sweep_axis="d", sweep_values=(-5.0,))


def test_sweep_cardinality_and_order():
    rows = ex.sweep(replace(SMALL, sweep_values=(10,), trials=1))
    assert [r.scheme for r in rows] == list(ex.SCHEMES)
    rows = ex.sweep(SMALL)
    keys = [(ex.SCHEMES.index(r.scheme), r.sweep_value, r.trial) for r in rows]
    assert keys == sorted(keys) and len(rows) == 3 * 2 * 3


def test_failed_trial_is_flagged(monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("bad draw")
    monkeypatch.setattr(ex, "run_trial", boom)
    rows = ex.sweep(replace(SMALL, trials=1, sweep_values=(10,)))
    assert len(rows) == 3 and all(r.error == "bad draw" for r in rows)


def test_emit_empty_table(tmp_path):
    path = tmp_path / "out.csv"
    with pytest.raises(ValueError):
        ex.emit_results([], str(path))
    assert not path.exists()


def test_emit_unwritable_path(tmp_path):
    bad = tmp_path / "missing" / "out.csv"
    rows = ex.sweep(replace(SMALL, trials=1, sweep_values=(10,)))
    with pytest.raises(OSError, match="missing"):
        ex.emit_results(rows, str(bad))


def test_emit_layout_and_determinism(tmp_path):
    rows = ex.sweep(SMALL)
    p1, s1 = ex.emit_results(rows, str(tmp_path / "a.csv"))
    p2, s2 = ex.emit_results(ex.sweep(SMALL, workers=2), str(tmp_path / "b.csv"))
    assert open(p1, "rb").read() == open(p2, "rb").read()
    assert open(s1, "rb").read() == open(s2, "rb").read()
    with open(p1) as fh:
        table = list(csv.reader(fh))
    assert table[0] == ex.RESULT_HEADER and len(table) == 1 + 18
    with open(s1) as fh:
        summary = list(csv.reader(fh))
    assert summary[0] == ex.SUMMARY_HEADER and len(summary) == 1 + 6
    assert os.path.basename(s1) == "a_summary.csv"


def test_summary_statistics():
    rows = [ex.SchemeResult("optimized", "n", 10.0, t, latency=x) for t, x in enumerate([0.1, 0.2, 0.3])]
    (_, _, _, n, mean, half), = ex.summarize(rows)
    # t(0.975, 2) = 4.302652729911275, sample sd 100 ms
    assert n == 3 and mean == pytest.approx(200.0)
    assert half == pytest.approx(4.302652729911275 * 100.0 / np.sqrt(3))
