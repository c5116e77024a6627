import json
import os
import subprocess
import sys

import numpy as np
import pytest

from potlab import io as fio
from potlab.cli import main

SMALL_CFG = """\
[run]
suites = lorentz_sandwich, indicator_exactness, kernel_minorant
seed = 7

[suite:lorentz_sandwich]
[suite:indicator_exactness]
[suite:kernel_minorant]
"""


def run(tmp_path, *argv):
    return main(["--output", str(tmp_path), *argv])


def test_gen_and_info_round_trip(tmp_path, capsys):
    assert run(tmp_path, "gen", "lebesgue", "--box", "0,1", "--res", "10") == 0
    mu = fio.load_measure(str(tmp_path / "lebesgue.msr"))
    assert len(mu) == 10 and mu.total_mass == pytest.approx(1.0)
    assert run(tmp_path, "gen", "cantor", "--generation", "4") == 0
    assert len(fio.load_measure(str(tmp_path / "cantor.msr"))) == 16
    assert run(tmp_path, "gen", "indicator", "--dim", "1", "--res", "100", "--radius", "1") == 0
    f = fio.load_grid(str(tmp_path / "indicator.gf"))
    assert f.shape == (100,)
    capsys.readouterr()
    assert run(tmp_path, "info", str(tmp_path / "lebesgue.msr")) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kind"] == "measure" and doc["atoms"] == 10
    assert run(tmp_path, "info") == 0
    assert "suite-all.cfg" in capsys.readouterr().out


def test_measure_file_round_trip_is_exact(tmp_path):
    assert run(tmp_path, "gen", "sphere", "--dim", "3", "--res", "50") == 0
    path = str(tmp_path / "sphere.msr")
    mu = fio.load_measure(path)
    fio.save_measure(str(tmp_path / "copy.msr"), mu)
    back = fio.load_measure(str(tmp_path / "copy.msr"))
    assert np.array_equal(back.points, mu.points) and np.array_equal(back.weights, mu.weights)
    assert (tmp_path / "copy.msr").read_bytes() == (tmp_path / "sphere.msr").read_bytes()


def test_op_riesz_field_and_norm(tmp_path, capsys):
    run(tmp_path, "gen", "indicator", "--dim", "1", "--res", "1000", "--radius", "1")
    run(tmp_path, "gen", "pointmass", "--at", "0")
    assert run(tmp_path, "op", "riesz", "--f", str(tmp_path / "indicator.gf"),
               "--targets", str(tmp_path / "pointmass.msr"), "--alpha", "0.5") == 0
    field = fio.load_sampled(str(tmp_path / "riesz.sf"))
    assert field.values[0] == pytest.approx(4.0, rel=0.02)
    run(tmp_path, "gen", "lebesgue", "--box=-1,1", "--res", "50")
    run(tmp_path, "op", "riesz", "--f", str(tmp_path / "indicator.gf"), "--targets", str(tmp_path / "lebesgue.msr"),
        "--alpha", "0.5", "-o", str(tmp_path / "field.sf"))
    assert run(tmp_path, "op", "norm", "--f", str(tmp_path / "field.sf"), "--p", "2", "--ell", "inf",
               "--lambda", "3", "--beta", "1") == 0
    doc = fio.read_json(str(tmp_path / "norm.json"))
    assert doc["value"] > 0 and doc["ell"] == "inf"
    assert (tmp_path / "norm.csv").read_text().startswith("x0,radius,value")


def test_op_growth_energy_cz_extend(tmp_path):
    run(tmp_path, "gen", "hyperplane", "--dim", "2", "--res", "200")
    mu = str(tmp_path / "hyperplane.msr")
    assert run(tmp_path, "op", "growth", "--mu", mu, "--beta", "1", "--r-min", "0.05", "--r-max", "1") == 0
    assert fio.read_json(str(tmp_path / "growth.json"))["constant"] > 0
    assert run(tmp_path, "op", "energy", "--mu", mu, "--beta", "0.5") == 0
    run(tmp_path, "gen", "bump", "--dim", "1", "--res", "64")
    run(tmp_path, "gen", "lebesgue", "--box=-1,1", "--res", "64")
    run(tmp_path, "op", "riesz", "--f", str(tmp_path / "bump.gf"), "--targets", str(tmp_path / "lebesgue.msr"),
        "--alpha", "0.5", "-o", str(tmp_path / "g.sf"))
    g = fio.load_sampled(str(tmp_path / "g.sf"))
    lam = 1.2 * float(np.mean(g.values))
    assert run(tmp_path, "op", "cz", "--f", str(tmp_path / "g.sf"), "--lambda", repr(lam)) == 0
    assert (tmp_path / "cz.csv").read_text().startswith("level,index,center,side,average,family")
    assert run(tmp_path, "op", "cz", "--f", str(tmp_path / "g.sf"), "--lambda", "1e-9") == 1
    # bump centred at height 1 with radius 1: its grid starts on the boundary x_2 = 0
    run(tmp_path, "gen", "bump", "--dim", "2", "--center", "0,1", "--res", "16", "-o", str(tmp_path / "h.gf"))
    # its top cell sits just inside the support, so the truncation is reported
    with pytest.warns(UserWarning, match="does not vanish"):
        assert run(tmp_path, "op", "extend", "--f", str(tmp_path / "h.gf")) == 0
    E = fio.load_grid(str(tmp_path / "extended.gf"))
    assert E.shape == (16, 32) and E.origin[1] == -2.0


def test_exit_codes(tmp_path, capsys):
    assert run(tmp_path, "op", "riesz", "--alpha", "0.5") == 2
    assert "needs --f" in capsys.readouterr().err
    assert run(tmp_path, "gen", "lebesgue") == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("[run\nsuites = x\n")
    assert run(tmp_path, "verify", str(bad)) == 2
    unknown = tmp_path / "unknown.cfg"
    unknown.write_text("[suite:lorentz_sandwich]\nbogus = 1\n")
    assert run(tmp_path, "verify", str(unknown)) == 2
    assert "bogus" in capsys.readouterr().err
    assert run(tmp_path, "verify", "no-such.cfg") == 2
    assert run(tmp_path, "op", "energy", "--mu", str(tmp_path / "missing.msr"), "--beta", "1") == 1
    with pytest.raises(SystemExit) as exc:
        main(["gen", "torus"])
    assert exc.value.code == 2


def test_empty_config_passes(tmp_path):
    cfg = tmp_path / "empty.cfg"
    cfg.write_text("[run]\nsuites =\n")
    assert run(tmp_path / "out", "verify", str(cfg)) == 0
    assert fio.read_json(str(tmp_path / "out" / "summary.json"))["suites"] == []


def test_verify_is_deterministic_across_jobs(tmp_path, capsys):
    cfg = tmp_path / "small.cfg"
    cfg.write_text(SMALL_CFG)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--output", str(a), "--jobs", "1", "verify", str(cfg)]) == 0
    assert main(["--output", str(b), "--jobs", "3", "verify", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 6
    names = sorted(os.listdir(a))
    assert names == sorted(os.listdir(b)) == ["indicator_exactness.csv", "kernel_minorant.csv",
                                               "lorentz_sandwich.csv", "summary.json"]
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()
    summary = fio.read_json(str(a / "summary.json"))
    assert summary["seed"] == 7 and summary["passed"]


def test_console_script(tmp_path):
    out = subprocess.run([sys.executable, "-m", "potlab.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("potlab ")
