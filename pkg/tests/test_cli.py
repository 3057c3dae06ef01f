"""Command-line interface: run, sweep, and error reporting."""

from pathlib import Path

import pytest

from mbqc_lab.cli import main


def _write_config(tmp_path, extra=""):
    text = ("experiment = channel-grid\n"
            "seed = 7\n"
            "beta_points = 6\n"
            f"output_dir = {tmp_path / 'out'}\n" + extra)
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return path


def test_run_produces_artifacts(tmp_path, capsys):
    code = main(["run", str(_write_config(tmp_path))])
    assert code == 0
    out = capsys.readouterr().out
    assert "channel-grid done in" in out
    run_dir = Path(out.rsplit("outputs in ", 1)[1].strip())
    assert run_dir.is_dir()
    assert any(run_dir.glob("*.csv"))
    assert any(run_dir.glob("*.json"))


def test_run_missing_config_file_exits_2(tmp_path, capsys):
    code = main(["run", str(tmp_path / "absent.cfg")])
    assert code == 2
    assert "config error" in capsys.readouterr().err


def test_run_invalid_config_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("experiment = exp1\nseed = 1\nnoise_p = 3.0\n")
    code = main(["run", str(path)])
    assert code == 2
    assert "noise_p" in capsys.readouterr().err


def test_sweep_with_overrides(tmp_path, capsys):
    code = main(["sweep", "--experiment", "channel-grid", "--seed", "3",
                 "--param", "beta_points=5",
                 "--param", f"output_dir={tmp_path / 'sweep'}"])
    assert code == 0
    out = capsys.readouterr().out
    assert "channel-grid done" in out
    run_dir = Path(out.rsplit("outputs in ", 1)[1].strip())
    assert any(run_dir.glob("*.csv"))


def test_sweep_rejects_malformed_param(capsys):
    code = main(["sweep", "--experiment", "channel-grid", "--seed", "3",
                 "--param", "nonsense"])
    assert code == 2
    assert "key=value" in capsys.readouterr().err


def test_verify_requires_subcommand():
    with pytest.raises(SystemExit):
        main([])
