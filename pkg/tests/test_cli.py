import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from steklov_revolution import cli

HERE = Path(__file__).parent
DATA = HERE / "data"
GOLDEN = HERE / "golden"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


GOLDEN_CASES = [
    ("bound_sigma1_n3_L2.json", ["bound", "sigma1", "--n", 3, "--L", 2]),
    ("critical_L1_n3.csv", ["critical-length", "L1", "--n", 3, "--format", "csv"]),
    ("spectrum_cylinder_n3_N256.json",
     ["spectrum", "--profile", DATA / "cylinder_L2.json", "--n", 3, "-K", 5, "--N", 256]),
    ("mixed_R2_n3_N256.csv", ["mixed", "--R", 2, "--n", 3, "--k-max", 3, "--N", 256, "--format", "csv"]),
    ("figure_Bn_n3.csv", ["figure", "Bn_of_L", "--n", 3, "--L-grid", "0.5,1,2,4,8", "--format", "csv"]),
]


@pytest.mark.parametrize("name,argv", GOLDEN_CASES)
def test_golden_outputs(name, argv):
    code, out, err = run(*argv)
    assert code == 0, err
    assert out == (GOLDEN / name).read_text()


def test_golden_values_match_closed_forms():
    rec = json.loads((GOLDEN / "bound_sigma1_n3_L2.json").read_text())
    assert rec["value"] == pytest.approx(1.4, rel=1e-15) and rec["branch"] == "neumann(1)"
    spec = json.loads((GOLDEN / "spectrum_cylinder_n3_N256.json").read_text())
    assert spec["values"][:2] == [0.0, 1.0]
    assert spec["values"][2] == pytest.approx(math.sqrt(2) * math.tanh(math.sqrt(2)), rel=1e-4)
    rows = list(csv.DictReader(io.StringIO((GOLDEN / "mixed_R2_n3_N256.csv").read_text())))
    for r in rows:
        assert float(r["sigma"]) == pytest.approx(float(r["closed_form"]), rel=1e-4)
        assert float(r["sigma"]) >= float(r["closed_form"])


def test_output_is_byte_deterministic(tmp_path):
    argv = ["critical-length", "appendix", "--n", 5]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(*argv, "--output", a)[0] == 0
    assert run(*argv, "--output", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_json_uses_17_digits_and_human_rounds():
    _, out, _ = run("critical-length", "L1", "--n", 3)
    assert json.loads(out)["L"] == 3.0176889899461452
    assert '"L": 3.0176889899461452' in out
    _, out, _ = run("critical-length", "L1", "--n", 3, "--human")
    assert '"L": 3.01769' in out


def test_infinite_length():
    code, out, _ = run("bound", "sigma1", "--n", 3, "--L", "inf")
    rec = json.loads(out)
    assert code == 0 and rec["value"] == 1.0 and rec["L"] == "inf" and rec["branch"] == "dirichlet(0)"


@pytest.mark.parametrize("argv,flag", [
    (["bound", "sigma1", "--n", 2, "--L", 2], "--n"),
    (["bound", "sigma1", "--L", 2], "--n"),
    (["bound", "sigma1", "--n", 3, "--L", -1], "--L"),
    (["bound", "sigma1", "--n", 3], "--L"),
    (["spectrum", "--n", 3, "--profile", DATA / "cylinder_L2.json", "--N", 4], "--N"),
    (["spectrum", "--n", 3, "--profile", DATA / "missing.json"], "--profile"),
    (["mixed", "--n", 3, "--R", 0.5], "--R"),
    (["critical-length", "Li-star", "--n", 3, "--i", 0], "--i"),
    (["stability", "gap", "--n", 3, "--config", DATA / "missing.json"], "--config"),
])
def test_invalid_input_exit_2(argv, flag):
    code, out, err = run(*argv)
    assert code == 2 and out == ""
    msg = json.loads(err)
    assert msg["flag"] == flag and msg["message"]


def test_bad_subcommand_exit_2():
    code, _, err = run("nonsense")
    assert code == 2 and json.loads(err)["error"] == "UsageError"


def test_domain_error_exit_2():
    code, _, err = run("stability", "gap", "--n", 3, "--L", 1.0, "--m", 3.0)
    assert code == 2 and json.loads(err)["error"] == "DomainError"


def test_numerical_failure_exit_3():
    code, out, err = run("stability", "gap", "--n", 3, "--L", 2, "--m", 1.9, "--delta", 0.1, "--N", 16)
    assert code == 3 and out == ""
    assert json.loads(err)["error"] == "ResolutionError"


def test_config_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 4, "L": 2.0, "format": "csv"}))
    code, out, _ = run("bound", "sigma1", "--config", cfg)
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert row["n"] == "4" and float(row["value"]) == pytest.approx(45 / 19)
    code, out, _ = run("bound", "sigma1", "--config", cfg, "--n", 3, "--format", "json")
    assert json.loads(out)["n"] == 3


def test_spectrum_of_smoothed_profile_below_bound():
    code, out, _ = run("spectrum", "--profile", DATA / "smoothed_L2.json", "--n", 3, "-K", 4, "--N", 4096)
    vals = json.loads(out)["values"]
    assert code == 0 and vals[0] == 0.0 and 0 < vals[1] < 1.4


def test_verify_writes_files(tmp_path):
    code, out, _ = run("verify", "minmax", "--n", 3, "--N", 256, "--outdir", tmp_path)
    assert code == 0 and json.loads(out)["passed"] is True
    assert sorted(p.name for p in tmp_path.iterdir()) == ["minmax_n3_N256.csv", "minmax_n3_N256.json"]


def test_figure_range_and_errors():
    code, out, _ = run("figure", "appendix_curves", "--n", 7, "--points", 5, "--format", "csv")
    assert code == 0 and len(out.strip().splitlines()) == 6
    assert run("figure", "Bn_of_L", "--n", 3, "--L-min", 2, "--L-max", 1)[0] == 2
    assert run("figure", "Bn_of_L", "--n", 3, "--L-grid", "1,x")[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "steklov_revolution", "bound", "m1plus1-global", "--n", "7"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    rec = json.loads(proc.stdout)
    assert rec["value"] == 6.0 and rec["branch"] == "constant(n-1)"
