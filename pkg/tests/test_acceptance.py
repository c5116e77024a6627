"""The acceptance battery: runs ``potlab verify suite-all.cfg`` twice and re-checks
every stated tolerance against the reported metrics."""
import csv
import json
import math
import os
import subprocess
import sys

import pytest

pytestmark = pytest.mark.acceptance

SANDWICH_PAIRS = 4


def _verify(out_dir, *extra):
    cmd = [sys.executable, "-m", "potlab.cli", "--output", str(out_dir), *extra, "verify", "suite-all.cfg"]
    return subprocess.run(cmd, capture_output=True, text=True, timeout=1800)


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    a = tmp_path_factory.mktemp("run_a")
    b = tmp_path_factory.mktemp("run_b")
    first = _verify(a)
    second = _verify(b, "--jobs", "1")
    return a, b, first, second


@pytest.fixture(scope="module")
def suites(runs):
    a = runs[0]
    with open(a / "summary.json", encoding="utf-8") as fh:
        doc = json.load(fh)
    return {s["name"]: s for s in doc["suites"]}


def _metrics(suites, name):
    entry = suites[name]
    assert "error" not in entry, entry.get("error")
    return entry["metrics"], entry["config"]


def _rows(runs, name):
    with open(runs[0] / f"{name}.csv", newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_run_completed(runs):
    a, b, first, second = runs
    assert first.returncode in (0, 1), first.stderr
    assert second.returncode == first.returncode, second.stderr
    assert (a / "summary.json").exists()


def test_criterion_01_lorentz_sandwich(suites, acceptance_line):
    m, cfg = _metrics(suites, "lorentz_sandwich")
    ok = cfg["functions"] >= 200 and cfg["max_atoms"] <= 1000 and m["worst_violation"] <= 0
    assert acceptance_line(1, ok, f"Lorentz sandwich over {cfg['functions']} functions, "
                                  f"worst relative violation {m['worst_violation']:.3g} (need <= 0)")


def test_criterion_02_indicator_exactness(suites, acceptance_line):
    m, cfg = _metrics(suites, "indicator_exactness")
    ok = cfg["sets"] >= 50 and m["worst_rel_error"] <= 1e-10
    assert acceptance_line(2, ok, f"indicator norms over {cfg['sets']} sets, "
                                  f"worst relative error {m['worst_rel_error']:.3g} (need <= 1e-10)")


def test_criterion_03_riesz_oracle(suites, acceptance_line):
    m, cfg = _metrics(suites, "riesz_oracle")
    value_ok = cfg["resolution"] >= 1000 and m["rel_error"] <= 0.02
    rate_ok = 1.4 <= m["error_reduction"] <= 2.6
    assert acceptance_line(3, value_ok and rate_ok,
                           f"I_1/2 chi(0) relative error {m['rel_error']:.3g} (need <= 0.02); error reduction "
                           f"on doubling {m['error_reduction']:.5g} (need 2 +/- 30%)")


def test_criterion_04_maximal_oracle(suites, acceptance_line):
    m, cfg = _metrics(suites, "maximal_oracle")
    ok = cfg["per_octave"] >= 8 and m["rel_error"] <= 0.02
    assert acceptance_line(4, ok, f"M_1/2 chi(0) relative error {m['rel_error']:.3g} (need <= 0.02)")


def test_criterion_05_kernel_minorant(suites, acceptance_line):
    m, cfg = _metrics(suites, "kernel_minorant")
    ok = m["points"] >= 1000 and m["max_ratio"] <= 1 + 1e-6
    assert acceptance_line(5, ok, f"max M/I over {m['points']} points {m['max_ratio']:.6g} (need <= 1 + 1e-6)")


def test_criterion_06_cantor_dimension(suites, acceptance_line):
    m, cfg = _metrics(suites, "cantor_dimension")
    ok = cfg["generation"] == 10 and abs(m["dimension_error"]) <= 0.02 and abs(m["energy_rel_error"]) <= 0.02
    assert acceptance_line(6, ok, f"dimension error {m['dimension_error']:.3g} (need <= 0.02); "
                                  f"energy relative error {m['energy_rel_error']:.3g} (need <= 0.02)")


def test_criterion_07_cz_properties(suites, acceptance_line):
    m, cfg = _metrics(suites, "cz_properties")
    ok = cfg["instances"] >= 20 and m["violations"] == 0
    assert acceptance_line(7, ok, f"{m['violations']} violations over {cfg['instances']} instances (need 0)")


def test_criterion_08_good_lambda(suites, runs, acceptance_line):
    m, cfg = _metrics(suites, "good_lambda")
    rows = _rows(runs, "good_lambda")
    dims = {int(r["dim"]) for r in rows}
    worst = min(float(r["slack"]) for r in rows)
    ok = len(rows) >= 10 and dims == {1, 2} and worst >= 0
    assert acceptance_line(8, ok, f"min slack {worst:.4g} over {len(rows)} instances in dims {sorted(dims)} "
                                  f"(need >= 0)")


def test_criterion_09_sharp_domination(suites, runs, acceptance_line):
    m, cfg = _metrics(suites, "sharp_domination")
    measures = {r["measure"] for r in _rows(runs, "sharp_domination")}
    ok = (math.isfinite(m["max_ratio"]) and m["max_change"] <= 0.2
          and {"lebesgue", "hyperplane"} <= measures and any(x.startswith("cantor") for x in measures))
    assert acceptance_line(9, ok, f"max ratio {m['max_ratio']:.4g}, refinement change {m['max_change']:.3g} "
                                  f"(need <= 0.2) on {sorted(measures)}")


def test_criterion_10_equivalence(suites, acceptance_line):
    m, cfg = _metrics(suites, "equivalence")
    lo, hi = cfg["scales"]
    ok = hi / lo >= 100 * (1 - 1e-12) and m["spread"] <= 10 and m["max_ratio"] <= 1 + 1e-6
    assert acceptance_line(10, ok, f"ratio bracket [{m['min_ratio']:.4g}, {m['max_ratio']:.4g}], spread "
                                   f"{m['spread']:.4g} (need <= 10, upper edge <= 1 + 1e-6)")


def test_criterion_11_trace_sufficiency(suites, acceptance_line):
    m, cfg = _metrics(suites, "trace_sufficiency")
    lo, hi = cfg["scales"]
    spreads = m["spread"]
    ok = hi / lo >= 100 * (1 - 1e-12) and set(spreads) == {"hyperplane", "lebesgue"} and all(
        s <= 1.5 for s in spreads.values())
    detail = ", ".join(f"{k} {v:.4g}" for k, v in sorted(spreads.items()))
    assert acceptance_line(11, ok, f"trace ratio spreads {detail} (need <= 1.5)")


def test_criterion_12_necessity(suites, acceptance_line):
    m, cfg = _metrics(suites, "necessity")
    lo, hi = cfg["radii"]
    # analytically the growth is exactly 10x over two decades; compared at 1e-9 relative
    diverges = m["pointmass_diverges"] and m["pointmass_growth"] >= 10 * (1 - 1e-9)
    bounded = m["hyperplane_spread"] <= 2
    ok = hi / lo >= 100 * (1 - 1e-12) and diverges and bounded
    assert acceptance_line(12, ok, f"point-mass growth {m['pointmass_growth']:.10g}x (need >= 10x), "
                                   f"hyperplane spread {m['hyperplane_spread']:.4g} (need <= 2)")


def test_criterion_13_extension(suites, acceptance_line):
    m, cfg = _metrics(suites, "extension")
    moments_ok = max(m["moment_errors"]) <= 1e-10
    identity_ok = suites["extension"]["passed"]
    ok = (moments_ok and identity_ok and m["linear_error"] <= 1e-6 and math.isfinite(m["gradient_max_ratio"])
          and m["gradient_spread"] <= 1.05)
    assert acceptance_line(13, ok, f"moment errors {max(m['moment_errors']):.2g}, linear error "
                                   f"{m['linear_error']:.2g}, gradient max ratio {m['gradient_max_ratio']:.4g} "
                                   f"with dilation spread {m['gradient_spread']:.4g} (need <= 1.05)")


def test_criterion_14_sobolev_trace(suites, acceptance_line):
    m, cfg = _metrics(suites, "sobolev_trace")
    ok = (cfg["n"] == 2 and cfg["lambda"] == 1.5 and cfg["lambda_star"] == 3.0 and m["spread"] <= 2
          and suites["sobolev_trace"]["passed"])
    assert acceptance_line(14, ok, f"Sobolev trace spread {m['spread']:.4g} (need <= 2)")


def test_criterion_15_maximal_trace(suites, acceptance_line):
    m, cfg = _metrics(suites, "maximal_trace")
    riesz = _metrics(suites, "trace_sufficiency")[0]["spread"]
    ok = True
    parts = []
    for label, info in sorted(m.items()):
        if riesz[label] <= 1.5:
            ok &= info["spread"] <= 1.5 and info["max_m_over_i"] <= 1 + 1e-6
        parts.append(f"{label} spread {info['spread']:.4g}, max M/I {info['max_m_over_i']:.4g}")
    assert acceptance_line(15, ok, "; ".join(parts) + " (need spread <= 1.5, M/I <= 1 + 1e-6)")


def test_criterion_16_determinism(runs, acceptance_line):
    a, b = runs[0], runs[1]
    names = sorted(n for n in os.listdir(a) if n.endswith(".csv"))
    same = names == sorted(n for n in os.listdir(b) if n.endswith(".csv")) and all(
        (a / n).read_bytes() == (b / n).read_bytes() for n in names)
    same &= (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()
    assert acceptance_line(16, same and len(names) == 15,
                           f"{len(names)} CSVs and the summary byte-identical across a parallel and a serial run")
