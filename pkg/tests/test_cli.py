import json
import os
import re
import subprocess
import sys

import numpy as np
import pytest

from weibullgen.cli import EXIT_CONVERGENCE, EXIT_INPUT, EXIT_NO_MODEL, EXIT_OK, EXIT_USAGE


def run(*argv, cwd=None, test_mode=True):
    env = dict(os.environ)
    env.pop("WEIBULLGEN_TEST_MODE", None)
    if test_mode:
        env["WEIBULLGEN_TEST_MODE"] = "1"
    return subprocess.run([sys.executable, "-m", "weibullgen", *map(str, argv)], cwd=cwd, env=env,
                          capture_output=True, text=True)


def test_exit_code_contract():
    assert (EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE, EXIT_NO_MODEL, EXIT_USAGE) == (0, 2, 3, 4, 64)


def test_ttt_writes_files(tmp_path):
    res = run("ttt", "--dataset", "pricker_a", cwd=tmp_path)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "pricker_a_ttt.csv").exists() and (tmp_path / "pricker_a_ttt.svg").exists()
    assert res.stdout.startswith("TTT shape: ")
    assert len((tmp_path / "pricker_a_ttt.csv").read_text().splitlines()) == 49


def test_ttt_exponential_file(tmp_path):
    data = tmp_path / "expo.csv"
    np.savetxt(data, np.random.default_rng(12).exponential(5.0, 5000), fmt="%.10g")
    res = run("ttt", "--dataset", data, cwd=tmp_path)
    assert res.returncode == 0, res.stderr
    assert "approximately constant" in res.stdout
    assert (tmp_path / "expo_ttt.svg").exists()


def test_missing_file_is_input_error(tmp_path):
    res = run("ttt", "--dataset", tmp_path / "nope.csv", cwd=tmp_path)
    assert res.returncode == 2
    assert "nope.csv" in res.stderr and res.stdout == ""


def test_bad_record_is_input_error(tmp_path):
    data = tmp_path / "bad.csv"
    data.write_text("3\n0\n")
    res = run("fit", "--dataset", data)
    assert res.returncode == 2
    assert ":2:1:" in res.stderr


@pytest.mark.parametrize("argv", [
    ["fit", "--dataset", "pricker_a", "--families", "none"],
    ["fit", "--dataset", "pricker_a", "--families", "lognormal"],
    ["fit"],
    ["predict", "--dataset", "pricker_a", "-B", "50", "--seed", "1"],
    ["predict", "--dataset", "pricker_a", "--u", "1.5", "--seed", "1"],
    ["frobnicate"],
])
def test_usage_errors(argv):
    res = run(*argv)
    assert res.returncode == 64
    assert "usage:" in res.stderr


def test_seed_required_in_test_mode():
    res = run("predict", "--dataset", "transmission_a", "--families", "GG", "-B", "100")
    assert res.returncode == 64
    assert "--seed" in res.stderr


def test_fit_table_matches_json(tmp_path):
    out = tmp_path / "fit.json"
    res = run("fit", "--dataset", "transmission_b", "--families", "epw,gw", "--output", out)
    assert res.returncode == 0, res.stderr
    doc = json.loads(out.read_text())
    assert [f["family"] for f in doc["fits"]] == ["EPW", "GW"]
    rows = {}
    fam = None
    for line in res.stdout.splitlines():
        if line and not line.startswith(" "):
            fam = line.split()[0]
        elif line.strip() and not line.strip().startswith("parameter"):
            name, *nums = line.split()
            rows[(fam, name)] = [float(x) for x in nums]
    for f in doc["fits"]:
        for name, est in f["params"].items():
            est_t, se_t, lo_t, hi_t = rows[(f["family"], name)]
            assert est_t == round(est, 4)
            assert se_t == round(f["std_errors"][name], 4)
            assert [lo_t, hi_t] == [round(x, 4) for x in f["wald_ci_95"][name]]


def test_fit_not_converged_exit_3():
    res = run("fit", "--dataset", "pricker_a", "--families", "EW", "--max-iter", "2")
    assert res.returncode == 3
    assert "NOT CONVERGED" in res.stdout
    assert "did not converge" in res.stderr


def test_select_table_matches_json(tmp_path):
    out = tmp_path / "sel.json"
    plot = tmp_path / "surv.svg"
    res = run("select", "--dataset", "transmission_a", "--output", out, "--plot", plot)
    assert res.returncode == 0, res.stderr
    doc = json.loads(out.read_text())
    by_family = {r["family"]: r for r in doc["selection"]["results"]}
    lines = res.stdout.splitlines()
    assert lines[0].split() == ["family", "aic", "aicc", "ks_d", "ks_p", "admissible"]
    for line in lines[1:-1]:
        cells = line.split()
        r = by_family[cells[0]]
        assert [float(c) for c in cells[1:3]] == [round(r["aic"], 3), round(r["aicc"], 3)]
        assert [float(c) for c in cells[3:5]] == [round(r["ks_d"], 4), round(r["ks_p"], 4)]
        assert cells[5] == ("yes" if r["admissible"] else "no")
        assert ("rejected by KS" in line) == (not r["admissible"])
    assert lines[-1] == f"selected: {doc['selection']['best']}"
    assert plot.exists()


def test_no_admissible_model_exit_4(tmp_path):
    rng = np.random.default_rng(0)
    data = tmp_path / "bimodal.csv"
    np.savetxt(data, np.concatenate([rng.uniform(1, 1.2, 150), rng.uniform(50, 52, 150)]), fmt="%.6f")
    res = run("select", "--dataset", data, "--families", "EW,MOW")
    assert res.returncode == 4
    assert "KS" in res.stderr


def test_predict_bootstrap_failure_exit_3():
    res = run("predict", "--dataset", "pricker_a", "--families", "EW", "-B", "100", "--seed", "1")
    assert res.returncode == 3
    assert "bootstrap" in res.stderr


def _predict(u, tmp_path):
    out = tmp_path / f"p{u}.json"
    res = run("predict", "--dataset", "transmission_a", "--families", "GG", "-B", "100", "--seed", "3",
              "--u", u, "--output", out)
    assert res.returncode == 0, res.stderr
    return res, json.loads(out.read_text())


def test_predict_output_and_monotone_u(tmp_path):
    res25, doc25 = _predict(0.25, tmp_path)
    res50, doc50 = _predict(0.5, tmp_path)
    assert doc50["plan"]["y_star"] > doc25["plan"]["y_star"]
    plan = doc25["plan"]
    m = re.search(r"preventive maintenance in ~(\d+) days after the last failure, 95% CI \[([\d.]+), ([\d.]+)\]",
                  res25.stdout)
    assert m is not None
    assert int(m.group(1)) == plan["y_star_days"]
    assert [float(m.group(2)), float(m.group(3))] == [round(x, 2) for x in plan["ci"]]
    assert doc25["bootstrap"]["seed"] == 3 and doc25["seed"] == 3


def test_predict_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        res = run("predict", "--dataset", "transmission_a", "--families", "GG", "-B", "100", "--seed", "9",
                  "--output", out, "-q")
        assert res.returncode == 0 and res.stdout == ""
    assert a.read_bytes() == b.read_bytes()


def test_seed_defaults_from_entropy_outside_test_mode(tmp_path):
    out = tmp_path / "p.json"
    res = run("predict", "--dataset", "transmission_a", "--families", "GG", "-B", "100", "--output", out,
              test_mode=False)
    assert res.returncode == 0, res.stderr
    doc = json.loads(out.read_text())
    assert isinstance(doc["seed"], int)
    assert doc["generated_at"] != "1970-01-01T00:00:00Z"


def test_csv_bundle_output(tmp_path):
    out = tmp_path / "bundle"
    res = run("select", "--dataset", "pricker_b", "--output", out, "--format", "csv-bundle", "-q")
    assert res.returncode == 0, res.stderr
    rows = (out / "selection.csv").read_text().splitlines()
    assert rows[0] == "family,aic,aicc,ks_d,ks_p,admissible"
    assert len(rows) == 6
