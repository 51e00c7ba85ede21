import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from ifspovm import config as cfgmod
from ifspovm.cli import main
from ifspovm.io import read_measure_csv, read_points_csv, write_measure_csv
from ifspovm.measures import DiscreteMeasure

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

CANTOR = """
[ifs]
dimension = 1
maps = [{ slope = "1/3", offset = "0" }, { slope = "1/3", offset = "2/3" }]
[attractor]
tol = "1/729"
[measure]
depth = 5
[povm]
cells = 27
"""


def write_cfg(tmp_path, text, name="c.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def report(out):
    return json.loads((Path(out) / "report.json").read_text())


def test_attractor(tmp_path):
    cfg = write_cfg(tmp_path, CANTOR)
    assert main(["attractor", "--config", str(cfg), "--out", str(tmp_path / "o"), "--quiet"]) == 0
    rep = report(tmp_path / "o")
    assert rep["ok"] and rep["schema_version"] == 1 and rep["command"] == "attractor"
    assert rep["metrics"]["gaps"][-1] <= 1 / 729
    pts = read_points_csv(tmp_path / "o" / "attractor.csv")
    assert pts.shape == (rep["metrics"]["points"], 1)
    assert rep["config"]["povm"]["dictionary_size"] == 54  # defaults are written out


def test_kravchenko_table(tmp_path):
    cfg = write_cfg(tmp_path, CANTOR)
    out = tmp_path / "o"
    assert main(["completion-demo", "--which", "kravchenko", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
    rows = report(out)["metrics"]["rows"]
    assert len(rows) == 12
    for r in rows:
        assert r["h"] == pytest.approx((r["n"] + 1) * 2.0 ** -(r["n"] + 1), abs=1e-12)


def test_dist_identical_files(tmp_path):
    mu = DiscreteMeasure([0.0, 0.3, 1.0], [0.2, 0.3, 0.5])
    a = tmp_path / "a.csv"
    write_measure_csv(a, mu)
    back = read_measure_csv(a)
    assert np.array_equal(back.atoms, mu.atoms) and np.array_equal(back.weights, mu.weights)
    out = tmp_path / "o"
    assert main(["dist", str(a), str(a), "--out", str(out), "--quiet"]) == 0
    h, mh = report(out)["metrics"]["results"]
    assert h["value"] == 0.0 and mh["value"] == 0.0
    assert set(h) == {"metric", "value", "iterations", "dual_feasible"}
    assert json.loads((out / "dist.json").read_text())[0]["metric"] == "H"


def test_dist_values(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_measure_csv(a, DiscreteMeasure([0.0], [1.0]))
    write_measure_csv(b, DiscreteMeasure([5.0], [1.0]))
    out = tmp_path / "o"
    assert main(["dist", str(a), str(b), "--out", str(out), "--quiet"]) == 0
    h, mh = report(out)["metrics"]["results"]
    assert h["value"] == 5.0 and mh["value"] == 2.0


@pytest.mark.parametrize(
    "command", ["measure", "cuntz-check", "povm-fixpoint", "dilation-check", "completion-demo"]
)
def test_commands_pass_on_cantor(tmp_path, command):
    cfg = write_cfg(tmp_path, CANTOR)
    assert main([command, "--config", str(cfg), "--out", str(tmp_path / "o"), "--quiet"]) == 0
    rep = report(tmp_path / "o")
    assert rep["ok"] and rep["error"] is None and all(c["passed"] for c in rep["checks"])


@pytest.mark.parametrize("name", ["cantor", "dyadic", "overlap"])
def test_shipped_configs_validate(name):
    cfg = cfgmod.load(CONFIGS / f"{name}.toml")
    assert cfgmod.build_ifs(cfg).n_maps == 2


def test_determinism_and_hash(tmp_path):
    cfg = write_cfg(tmp_path, CANTOR)
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        assert main(["povm-fixpoint", "--config", str(cfg), "--out", str(o), "--quiet"]) == 0
    files = sorted(p.name for p in outs[0].iterdir() if p.name != "timings.json")
    assert "report.json" in files and len(files) > 1
    for name in files:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    h1 = report(outs[0])["config_hash"]
    cfg2 = write_cfg(tmp_path, CANTOR.replace("cells = 27", "cells = 27\ntol = 1e-9"), "d.toml")
    assert main(["povm-fixpoint", "--config", str(cfg2), "--out", str(tmp_path / "c"), "--quiet"]) == 0
    assert report(tmp_path / "c")["config_hash"] != h1


def test_seed_override_changes_hash(tmp_path):
    cfg = write_cfg(tmp_path, CANTOR)
    main(["attractor", "--config", str(cfg), "--out", str(tmp_path / "a"), "--quiet"])
    main(["attractor", "--config", str(cfg), "--out", str(tmp_path / "b"), "--quiet", "--seed", "3"])
    assert report(tmp_path / "a")["config_hash"] != report(tmp_path / "b")["config_hash"]


@pytest.mark.parametrize(
    "text,path",
    [
        (CANTOR.replace('slope = "1/3", offset = "2/3"', 'slope = 1.5, offset = "2/3"'), "ifs.maps[1].slope"),
        (CANTOR.replace('tol = "1/729"', "tol = -1"), "attractor.tol"),
        (CANTOR.replace("depth = 5", "depth = 'five'"), "measure.depth"),
        (CANTOR + "\n[bogus]\nx = 1\n", "bogus"),
        (CANTOR.replace('tol = "1/729"', 'tol = "1/0"'), "attractor.tol"),
    ],
)
def test_config_errors_exit_2_with_field_path(tmp_path, capsys, text, path):
    cfg = write_cfg(tmp_path, text)
    assert main(["attractor", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert path in capsys.readouterr().err


def test_malformed_toml(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[ifs\nmaps = ")
    assert main(["attractor", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_numerical_failure_exit_1(tmp_path, capsys):
    text = CANTOR.replace("cells = 27", "cells = 27\nmax_iter = 2")
    cfg = write_cfg(tmp_path, text)
    assert main(["povm-fixpoint", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    rep = report(tmp_path / "o")
    assert rep["error"]["type"] == "ConvergenceError" and len(rep["error"]["history"]) == 2
    assert "ConvergenceError" in capsys.readouterr().err


def test_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["no-such-command"])
    assert info.value.code == 2


def test_module_entry_point(tmp_path):
    cfg = write_cfg(tmp_path, CANTOR)
    out = subprocess.run(
        [sys.executable, "-m", "ifspovm", "attractor", "--config", str(cfg), "--out", str(tmp_path / "o")],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0 and out.stdout.startswith("attractor: ok")
