# SPDX-License-Identifier: Apache-2.0
import math
import os
import subprocess

import pytest

import entconc


def test_bounds_values():
    main = entconc.main_bound(100, 5, 0.5)
    assert main["value"] == pytest.approx(0.17911813834392934, rel=1e-14)
    assert entconc.zhao2020_bound(100, 5, 0.5)["value"] > 1.0
    assert entconc.bstar(5) == pytest.approx(136.42321211788234, rel=1e-12)
    names = {row["family"] for row in entconc.compare_bounds(100, 5, 0.5)}
    assert "main" in names


def test_mgf_and_oracles():
    p = [0.5, 0.2, 0.2, 0.05, 0.05]
    assert entconc.mgf_exact(0.0, p) == pytest.approx(1.0)
    assert entconc.mgf_exact(0.7, p) <= entconc.mgf_upper(0.7, 5)
    lower, upper = entconc.lambda_domain(5)
    assert -1.0 < lower < 0.0 and math.isinf(upper)
    with pytest.raises(entconc.InvalidArgument):
        entconc.mgf_exact(0.1, [0.5, 0.6])
    assert entconc.appendix_g_check(10, 2000)["passed"]


def test_montecarlo_and_counterexample():
    rows = entconc.estimate_tail("uniform", 5, 50, [0.3], 2000, seed=3)
    assert rows[0]["freq_two_sided"] == 0.0
    again = entconc.estimate_tail("counterexample", 17, 16, [0.3], 4000, seed=3, workers=2)
    once = entconc.estimate_tail("counterexample", 17, 16, [0.3], 4000, seed=3, workers=1)
    assert again == once
    exact = entconc.counterexample_exact_tail(17, 16, 0.3)
    assert 0.0 < exact["exact_tail"] <= 1.0


def test_coding():
    e = entconc.essential_bit_content([0.5, 0.5], 4, 0.2)
    assert e["set_size"] == 13
    assert e["h_delta"] == math.log2(13)
    code = entconc.BlockCode([0.7, 0.1, 0.1, 0.05, 0.05], 20, 0.3)
    assert code.codeword_bits == 36
    x = [0] * 14 + [1, 2, 3, 4, 1, 2]
    assert code.typical(x)
    assert code.decode(code.encode(x)) == x
    assert entconc.error_exponent([0.25] * 4, 0.1)["feasible"] is False
    r = entconc.error_exponent([0.7, 0.3], 0.05)
    assert r["feasible"] and 0.0 < r["tilt"] < 1.0


def test_run_returns_table():
    status, table, diag = entconc.run({"command": "bounds", "K": "5", "n": "100", "eps": "0.5"})
    assert status == 0, diag
    assert "main,0.17911813834392934" in table
    status, _, diag = entconc.run({"command": "bounds", "K": "5"})
    assert status == 2
    assert "eps" in diag or "n" in diag


def cli():
    path = os.environ.get("ENTCONC_CLI")
    if not path:
        pytest.skip("ENTCONC_CLI not set")
    return path


def test_cli_exit_codes(tmp_path):
    exe = cli()
    out = tmp_path / "b.csv"
    ok = subprocess.run([exe, "bounds", "--K", "5", "--n", "100", "--eps", "0.1,0.5", "--out", str(out)],
                        capture_output=True, text=True)
    assert ok.returncode == 0, ok.stderr
    assert out.read_text().startswith("# command=bounds\n")
    assert (tmp_path / "b.csv.manifest.json").exists()

    bad = subprocess.run([exe, "bounds", "--K", "5", "--n", "100"], capture_output=True, text=True)
    assert bad.returncode == 2

    infeasible = subprocess.run([exe, "mgf-verify", "--K", "5", "--lambda", "-50", "--reps", "2"],
                                capture_output=True, text=True)
    assert infeasible.returncode == 3
