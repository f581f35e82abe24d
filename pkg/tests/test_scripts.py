import runpy
from pathlib import Path

import pytest

SCRIPTS = Path(__file__).resolve().parents[1] / "scripts"


def load(name):
    return runpy.run_path(str(SCRIPTS / f"{name}.py"))


def test_alvino_scan_reports_violations_only_above_one_half(capsys):
    load("alvino_q_scan")["main"](["--N-max", "50"])
    rows = [line.split() for line in capsys.readouterr().out.splitlines()[1:]]
    for q, *cells in rows:
        if float(q) <= 0.5:
            assert cells == ["ok", "ok"]
    assert any(c != "ok" for _, *cells in rows for c in cells)


def test_large_time_dipole_norm_scales_like_inverse_t():
    dip = load("large_time_decay")["dipole_norm"]
    assert dip(1.0, 100.0) / dip(1.0, 10.0) == pytest.approx(0.1, rel=1e-3)


def test_acceptance_runner_on_small_suite(tmp_path, capsys):
    code = load("run_acceptance")["main"](["--suite", "cocancel", "--out", str(tmp_path)])
    assert code == 0 and "[PASS] criterion 10" in capsys.readouterr().out
    assert (tmp_path / "acceptance.csv").exists()
