import csv
import json

import numpy as np
import pytest

from josephson_qrc import cli, experiments
from josephson_qrc.errors import ConfigError

TINY_QUANTUM = [
    "mixer.cutoff_a=3", "mixer.cutoff_b=3", "readout.max_na=1", "readout.max_nb=1",
    "mixer.drive_scale=0.001", "dataset.train_waveforms=3", "dataset.test_waveforms=2",
]
TINY_MG = ["experiment.task=mackey_glass", "experiment.reservoir=static", "dataset.train_len=60",
           "dataset.test_len=40", "dataset.delays=1-5", "dataset.mg_warmup=100"]


def run_cli(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def overrides(items):
    return [a for item in items for a in ("-s", item)]


@pytest.fixture(autouse=True)
def fresh_caches():
    experiments.clear_caches()
    yield
    experiments.clear_caches()


def test_run_quantum_writes_bundle(tmp_path, capsys):
    out = tmp_path / "q"
    code, text, _ = run_cli(["run", *overrides(TINY_QUANTUM), "-o", str(out)], capsys)
    assert code == 0, text
    for name in ("features.csv", "weights.csv", "predictions.csv", "metrics.csv", "manifest.json"):
        assert (out / name).exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["n_train"] == 24 and manifest["n_test"] == 16
    assert manifest["n_features"] == 5
    with open(out / "features.csv") as fh:
        header = next(csv.reader(fh))
    assert header == ["sample", "p_00", "p_01", "p_10", "p_11", "bias"]
    with open(out / "metrics.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert 0 <= float(rows[0]["accuracy"]) <= 1


def test_run_is_reproducible(tmp_path):
    cfg = cli.cfgmod.apply_overrides(cli.cfgmod.defaults(), TINY_MG)
    a = experiments.run_experiment(cfg, tmp_path / "a")
    experiments.clear_caches()
    b = experiments.run_experiment(cfg, tmp_path / "b")
    np.testing.assert_array_equal(a.predictions, b.predictions)
    assert (tmp_path / "a" / "metrics.csv").read_text() == (tmp_path / "b" / "metrics.csv").read_text()
    assert [m["delay"] for m in a.metrics] == [1, 2, 3, 4, 5]
    assert all(m["accuracy"] is None for m in a.metrics)


def test_sweep_neurons_for_baseline(tmp_path, capsys):
    out = tmp_path / "s"
    code, text, _ = run_cli(["sweep", "-s", "experiment.reservoir=sto", "-s", "dataset.train_waveforms=4",
                             "-s", "dataset.test_waveforms=4", "-s", "sweep.seeds=0,1",
                             "--axis", "neurons", "--values", "2,4", "-o", str(out)], capsys)
    assert code == 0, text
    with open(out / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["value"]) for r in rows] == [2.0, 4.0]
    assert all(r["n_seeds"] == "2" for r in rows)
    assert (out / "value_4_seed_1" / "metrics.csv").exists()


def test_quantum_sweep_rejects_non_square_neurons():
    cfg = cli.cfgmod.apply_overrides(cli.cfgmod.defaults(), ["sweep.axis=neurons", "sweep.values=8"])
    with pytest.raises(ConfigError):
        experiments.point_config(cfg, 8)


def test_sweep_multipliers():
    cfg = cli.cfgmod.defaults()
    cfg["sweep"]["axis"] = "kappa"
    cfg["sweep"]["values"] = [2.0]
    point = experiments.point_config(cfg, 2.0)
    assert point["mixer"]["kappa_a"] == 2 * cfg["mixer"]["kappa_a"]


def test_crossing_of_sweep_rows():
    rows = [{"value": 4, "accuracy_mean": 0.995}, {"value": 8, "accuracy_mean": 0.98},
            {"value": 12, "accuracy_mean": 0.99}]
    assert experiments.crossing(rows) == 12


def test_unknown_key_exits_2(capsys):
    code, _, err = run_cli(["run", "-s", "mixer.bogus=1"], capsys)
    assert code == 2 and "unknown key 'bogus'" in err


def test_missing_config_file_exits_2(tmp_path, capsys):
    code, _, err = run_cli(["run", "-c", str(tmp_path / "missing.cfg")], capsys)
    assert code == 2 and "config error" in err


def test_truncation_exits_3(tmp_path, capsys):
    args = [*overrides(TINY_QUANTUM), "-s", "mixer.drive_scale=0.02", "-s", "mixer.dt=2e-11"]
    code, _, err = run_cli(["run", *args, "-o", str(tmp_path)], capsys)
    assert code == 3 and "at sample" in err


def test_print_config(capsys):
    code, text, _ = run_cli(["run", "-s", "mixer.g=5e6", "--print-config"], capsys)
    assert code == 0 and "g = 5000000.0" in text


def test_calibrate_drive_command(capsys):
    code, text, _ = run_cli(["calibrate-drive", "-s", "mixer.cutoff_a=4", "-s", "mixer.cutoff_b=4",
                             "-s", "mixer.edge_budget=1e-3", "--x-max", "1"], capsys)
    assert code == 0
    assert "drive_scale = " in text and "edge population = 0.000" in text


def test_gen_data(tmp_path, capsys):
    code, text, _ = run_cli(["gen-data", *overrides(TINY_MG), "-o", str(tmp_path)], capsys)
    assert code == 0
    assert (tmp_path / "mackey_glass_train.csv").exists() and (tmp_path / "mackey_glass_test.csv").exists()


def test_backend_flag(tmp_path, capsys):
    previous = cli.backend.get().name
    try:
        code, _, _ = run_cli(["--backend", "python", "gen-data", *overrides(TINY_MG), "-o", str(tmp_path)],
                             capsys)
        assert code == 0 and cli.backend.get().name == "python"
    finally:
        cli.backend.use(previous)
