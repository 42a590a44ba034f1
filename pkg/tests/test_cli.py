import subprocess
import sys

import pytest

from corrcomb.cli import main
from corrcomb.ingest import read_panel


def _files(tmp_path, synthetic_files):
    spf, act, _, _ = synthetic_files
    return ["--spf", str(spf), "--actuals", str(act)]


def test_demo(capsys):
    assert main(["demo", "bg1969"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert out[-1].split() == ["MSFE", "196.08", "187.67", "149.98", "103.46"]
    assert "20.1% lower" in out[0] and "31.0% lower" in out[0]
    assert out[2].split() == ["1953M01", "1", "-3", "-1", "-2.375"]


def test_demo_module_entry():
    r = subprocess.run([sys.executable, "-m", "corrcomb.cli", "demo", "bg1969"],
                       capture_output=True, text=True, check=True)
    assert r.stdout.strip().endswith("103.46")


def test_demo_out(tmp_path, capsys):
    assert main(["demo", "bg1969", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "bg1969.csv").read_text().splitlines()[1].startswith("1953M01,1.0,-3.0")
    assert "kernel_backend=" in (tmp_path / "manifest.txt").read_text()


def test_missing_file_exits_2(tmp_path, capsys):
    missing = tmp_path / "nope.csv"
    assert main(["evaluate", "--spf", str(missing), "--actuals", str(missing)]) == 2
    assert str(missing) in capsys.readouterr().err


def test_unknown_flag_exits_1(capsys):
    assert main(["evaluate", "--bogus"]) == 1


def test_unknown_config_key_exits_1(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("indicator = UNEMP\ncolour = blue\n")
    assert main(["evaluate", "--config", str(cfg)]) == 1
    assert "colour" in capsys.readouterr().err


def test_malformed_spf_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("YEAR,QUARTER,UNEMP2\n2000,1,4\n")
    act = tmp_path / "a.csv"
    act.write_text("2000Q1,4\n")
    assert main(["evaluate", "--spf", str(bad), "--actuals", str(act)]) == 2


def test_evaluate_byte_identical(tmp_path, synthetic_files, capsys):
    args = _files(tmp_path, synthetic_files) + ["--out"]
    cfg = tmp_path / "run.cfg"
    cfg.write_text("masks = 1990Q1--2009Q4; 1995Q1--2005Q4\nexclusion = none\n")
    out = tmp_path / "r1"
    snapshots = []
    for _ in range(2):
        assert main(["evaluate", "--config", str(cfg), *args, str(out)]) == 0
        snapshots.append({p.name: p.read_bytes() for p in out.iterdir()})
    assert snapshots[0] == snapshots[1]
    text = (tmp_path / "r1" / "factor_grid_UNEMP.csv").read_text().splitlines()
    assert text[0].startswith("period,0.1,0.2,") and text[0].count(",") == 14
    assert "note.horizon_mapping=UNEMP2 -> h=1" in (tmp_path / "r1" / "manifest.txt").read_text()


def test_ingest_roundtrip(tmp_path, synthetic_files, capsys):
    spf, _, panel, _ = synthetic_files
    assert main(["ingest", "--spf", str(spf), "--out", str(tmp_path)]) == 0
    back = read_panel(tmp_path / "panel_UNEMP.csv")
    assert back.entries == panel.entries


def test_compare_and_acf(tmp_path, synthetic_files, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("compare_mask = 1990Q1--2019Q4\neval_start = 2000Q1\n")
    args = ["--config", str(cfg), *_files(tmp_path, synthetic_files), "--out", str(tmp_path)]
    assert main(["compare", *args]) == 0
    rows = (tmp_path / "compare_UNEMP.csv").read_text().splitlines()
    assert rows[0] == "method,msfe,relative_msfe,n"
    assert any(r.startswith("mean,") and ",1.0," in r for r in rows)
    assert main(["acf", *args, "--max-lag", "4"]) == 0
    assert (tmp_path / "acf_mean.csv").read_text().count("\n") == 5


def test_acf_from_errors(tmp_path, capsys):
    p = tmp_path / "e.csv"
    p.write_text("period,err\n" + "".join(f"{i},{(-1) ** i}\n" for i in range(40)))
    assert main(["acf", "--errors", str(p), "--out", str(tmp_path), "--max-lag", "2"]) == 0
    assert "rho1=-0.975" in capsys.readouterr().out


def test_gls_command(tmp_path, synthetic_files, capsys):
    args = _files(tmp_path, synthetic_files) + ["--out", str(tmp_path)]
    cfg = tmp_path / "run.cfg"
    cfg.write_text("compare_mask = 1990Q1--2019Q4\n")
    assert main(["gls", "--config", str(cfg), *args, "--gamma-true", "0.5"]) == 0
    out = capsys.readouterr().out
    assert "holds=True" in out
    assert (tmp_path / "risk_bound.csv").is_file()
