import json
import subprocess
import sys

import pytest

from endpoint_l1 import cli, experiments as ex
from endpoint_l1.configs import __file__ as _cfg_init
from pathlib import Path

CFG_DIR = Path(_cfg_init).parent


def heat_config(tmp_path, **tol):
    cfg = json.loads((CFG_DIR / "heat-semigroup.json").read_text())
    cfg["grid"]["n"] = 64
    cfg["tolerances"].update(tol)
    cfg["tolerances"].pop("runtime_s", None)
    path = tmp_path / "heat.json"
    path.write_text(json.dumps(cfg))
    return path


def test_run_writes_deterministic_artifacts(tmp_path, capsys):
    cfg = heat_config(tmp_path)
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "a"), "-q"]) == 0
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "b"), "-q"]) == 0
    a, b = tmp_path / "a" / "heat-semigroup", tmp_path / "b" / "heat-semigroup"
    names = sorted(p.name for p in a.iterdir())
    assert "report.json" in names and "provenance.json" in names and any(n.endswith(".csv") for n in names)
    for name in names:
        if name != "provenance.json":
            assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_tolerance_failure_exits_2(tmp_path):
    cfg = heat_config(tmp_path, max_rel_error=1e-30)
    assert cli.main(["run", str(cfg), "--out", str(tmp_path), "-q"]) == 2


def test_seed_override_is_recorded(tmp_path):
    cfg = heat_config(tmp_path)
    assert cli.main(["run", str(cfg), "--out", str(tmp_path), "--seed", "99", "-q"]) == 0
    report = json.loads((tmp_path / "heat-semigroup" / "report.json").read_text())
    assert report["config"]["seed"] == 99


def test_malformed_config_names_the_path(tmp_path, capsys):
    cfg = json.loads((CFG_DIR / "heat-semigroup.json").read_text())
    cfg["grid"]["n"] = "many"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(cfg))
    assert cli.main(["run", str(path), "-q"]) == 1
    assert "$.grid.n" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["suite", "nonsense"], ["run", "/nonexistent/cfg.json"], ["run", "x.json", "--seed", "-1"],
                                  ["suite", "identities", "--threads", "0"]])
def test_bad_invocations_exit_1(argv, tmp_path):
    assert cli.main(argv + ["--out", str(tmp_path), "-q"]) == 1


def test_missing_referenced_file(tmp_path, capsys):
    cfg = json.loads((CFG_DIR / "cocancel-reduction.json").read_text())
    cfg["params"]["operator_file"] = "does_not_exist.json"
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert cli.main(["run", str(path), "-q"]) == 1
    assert "operator_file" in capsys.readouterr().err


def test_every_packaged_config_validates():
    ids = ex.packaged_config_ids()
    assert len(ids) == 13
    assert sorted(ex.packaged_config(i).criterion for i in ids) == list(range(1, 14))
    assert set(ex.SUITES["all"]) == set(ids)


def test_module_entry_point_lists(tmp_path):
    out = subprocess.run([sys.executable, "-m", "endpoint_l1", "list"], capture_output=True, text=True, check=True)
    assert "suite identities" in out.stdout
