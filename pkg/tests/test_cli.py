import numpy as np

import condrisk.cli as cli
from condrisk.verify import TheoryCheckResult


def test_rwr_run_and_report_happy_path(toy_rwr_setup, capsys):
    assert cli.main(["rwr", "run", "--config", str(toy_rwr_setup / "cfg.toml")]) == 0
    out = capsys.readouterr().out
    assert "wrote 16 rows" in out
    results = toy_rwr_setup / "out" / "results.csv"
    assert cli.main(["report", "--input", str(results), "--format", "md"]) == 0
    assert "## toy" in capsys.readouterr().out
    dest = toy_rwr_setup / "report.csv"
    assert cli.main(["report", "--input", str(results), "--format", "csv",
                     "--output", str(dest)]) == 0
    assert dest.read_text().startswith("dataset,")


def test_config_error_exit_code(toy_rwr_setup, capsys):
    bad = toy_rwr_setup / "bad.toml"
    bad.write_text("mystery = 1\n")
    assert cli.main(["rwr", "run", "--config", str(bad)]) == 1
    assert "config error" in capsys.readouterr().err


def test_partial_failure_exit_code(toy_rwr_setup, capsys):
    (toy_rwr_setup / "data" / "toy.csv").unlink()
    assert cli.main(["rwr", "run", "--config", str(toy_rwr_setup / "cfg.toml")]) == 2
    assert "datasets skipped: toy" in capsys.readouterr().err


def test_report_missing_input_is_config_error(tmp_path, capsys):
    assert cli.main(["report", "--input", str(tmp_path / "absent.csv")]) == 1
    assert "cannot read results" in capsys.readouterr().err


def test_data_inspect(toy_rwr_setup, capsys):
    manifest = str(toy_rwr_setup / "manifest.toml")
    assert cli.main(["data", "inspect", "--manifest", manifest]) == 0
    assert "400 rows x 5 features" in capsys.readouterr().out
    assert cli.main(["data", "inspect", "--manifest", manifest, "nope"]) == 1


def test_data_inspect_reports_missing_files(toy_rwr_setup, capsys):
    (toy_rwr_setup / "data" / "toy.csv").unlink()
    assert cli.main(["data", "inspect", "--manifest",
                     str(toy_rwr_setup / "manifest.toml")]) == 0
    assert "missing" in capsys.readouterr().out


def test_data_fetch_file_url(tmp_path, capsys):
    src = tmp_path / "src.csv"
    src.write_text("1.0,2.0\n")
    (tmp_path / "m.toml").write_text(
        f'[datasets.demo]\npath = "demo.csv"\nurl = "file://{src}"\n')
    assert cli.main(["data", "fetch", "--manifest", str(tmp_path / "m.toml")]) == 0
    assert "demo: fetched" in capsys.readouterr().out


def test_data_fetch_reports_errors(tmp_path, capsys):
    (tmp_path / "m.toml").write_text(
        '[datasets.demo]\npath = "demo.csv"\nurl = "file:///does/not/exist"\n')
    assert cli.main(["data", "fetch", "--manifest", str(tmp_path / "m.toml")]) == 2
    assert "error" in capsys.readouterr().out


def test_verify_exit_codes(monkeypatch, capsys):
    ok = TheoryCheckResult(name="a", statistic=0.1, tolerance=0.5, passed=True, n=10, seed=0)
    bad = TheoryCheckResult(name="b", statistic=0.9, tolerance=0.5, passed=False, n=10, seed=0)
    monkeypatch.setattr(cli, "run_all_checks", lambda **kw: [ok])
    assert cli.main(["verify"]) == 0
    assert "PASS" in capsys.readouterr().out
    monkeypatch.setattr(cli, "run_all_checks", lambda **kw: [ok, bad])
    assert cli.main(["verify"]) == 3
    out = capsys.readouterr().out
    assert "FAIL" in out and "PASS" in out


def test_classify_run(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text('kind = "classify"\nn = 500\nd = 3\nnum_classes = 3\n'
                   'predictors = ["softmax_linear"]\nbackends = ["softmax_linear"]\n'
                   'include_temperature_scaled = false\nseeds = [0]\n'
                   'output_dir = "cls"\n')
    assert cli.main(["classify", "run", "--config", str(cfg)]) == 0
    assert (tmp_path / "cls" / "results.csv").exists()
    assert "wrote 8 rows" in capsys.readouterr().out


def test_plot_data_writes_csv(toy_rwr_setup):
    dest = toy_rwr_setup / "plot.csv"
    assert cli.main(["plot-data", "--config", str(toy_rwr_setup / "cfg.toml"),
                     "--dataset", "toy", "--regressor", "lr", "--calibrator", "rf",
                     "--fold", "0", "--output", str(dest)]) == 0
    lines = dest.read_text().splitlines()
    assert lines[0] == "target,prediction,sqrt_estimated_loss"
    targets = [float(l.split(",")[0]) for l in lines[1:]]
    assert targets == sorted(targets)


def test_plot_data_unknown_dataset(toy_rwr_setup, capsys):
    assert cli.main(["plot-data", "--config", str(toy_rwr_setup / "cfg.toml"),
                     "--dataset", "zzz", "--regressor", "lr", "--calibrator", "rf",
                     "--fold", "0"]) == 1
