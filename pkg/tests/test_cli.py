import csv
import io
import json
import subprocess
import sys

import pytest

from qmc_ipl.cli import main
from qmc_ipl.criterion import B_u, WeightProfile
from qmc_ipl.errors import InvalidRuleError
from qmc_ipl.experiments import Grid, run_experiment
from qmc_ipl.gfpoly import GFPolynomial
from qmc_ipl.lattice import RuleSpec, generate_point_set, read_point_file
from qmc_ipl.rulefile import load_rule, rule_from_json


def run(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse rejects bad flags this way
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def construct(tmp_path, capsys, *extra, name="rule.json"):
    path = tmp_path / name
    code, _, err = run(["construct", "--m", "6", "--s", "2", "--r", "1", "--out", str(path), *extra], capsys)
    assert code == 0, err
    return path


def test_construct_writes_rule(tmp_path, capsys):
    path = construct(tmp_path, capsys)
    obj = json.loads(path.read_text())
    assert obj["m"] == 6 and obj["s"] == 2 and obj["d"] == 3
    assert obj["q"][0] == 1 and obj["trace"][0]["B_u"] == 0.0
    assert len(obj["trace"]) == 6
    rule = load_rule(path)
    assert rule.B_u == obj["B_u"]


def test_construct_to_stdout(capsys):
    code, out, err = run(["construct", "--m", "4", "--s", "1", "--r", "2", "--d", "1"], capsys)
    assert code == 0
    assert json.loads(out)["d"] == 1
    assert err.startswith("B_u = ")


def test_naive_and_fast_files_agree(tmp_path, capsys):
    fast = json.loads(construct(tmp_path, capsys, name="f.json").read_text())
    naive = json.loads(construct(tmp_path, capsys, "--mode", "naive", name="n.json").read_text())
    assert fast.pop("mode") == "fast" and naive.pop("mode") == "naive"
    assert fast == naive


def test_construct_is_deterministic(tmp_path, capsys):
    a = construct(tmp_path, capsys, name="a.json").read_bytes()
    b = construct(tmp_path, capsys, name="b.json").read_bytes()
    assert a == b


@pytest.mark.parametrize("flags", [
    ["--m", "6", "--s", "2", "--r", "1", "--d", "0"],
    ["--m", "6", "--s", "2", "--r", "1", "--b", "4"],
    ["--m", "0", "--s", "2", "--r", "1"],
    ["--m", "6", "--s", "2", "--r", "-1"],
    ["--m", "6", "--s", "2"],
    ["--m", "6", "--s", "2", "--r", "1", "--mode", "slow"],
])
def test_construct_rejects_bad_flags(flags, capsys):
    code, _, _ = run(["construct", *flags], capsys)
    assert code == 2


def test_construct_size_guards(capsys):
    # m = 14, r = 1 needs d = 4, i.e. 56 digits
    code, _, err = run(["construct", "--m", "14", "--s", "1", "--r", "1"], capsys)
    assert code == 3 and "allow-extended" in err
    code, _, _ = run(["construct", "--m", "13", "--s", "1", "--r", "1", "--d", "1", "--mode", "naive"], capsys)
    assert code == 3


def test_points_command(tmp_path, capsys):
    rule = construct(tmp_path, capsys)
    out = tmp_path / "pts.txt"
    code, _, _ = run(["points", str(rule), "--out", str(out)], capsys)
    assert code == 0
    header, x = read_point_file(out)
    assert x.shape == (64, 2) and header["N"] == 64
    spec = load_rule(rule).spec
    assert (x == generate_point_set(spec).to_float()).all()


def test_evaluate_command(tmp_path, capsys):
    rule = construct(tmp_path, capsys)
    code, out, _ = run(["evaluate", str(rule), "--lambda", "0.9", "--fn", "f1"], capsys)
    assert code == 0
    vals = dict(line.split(" = ") for line in out.strip().splitlines())
    assert float(vals["B_u"]) <= float(vals["theorem2_bound"])
    assert float(vals["wce_bound"]) >= float(vals["B_u"])
    assert float(vals["abs_error"]) < 1e-2
    code, _, _ = run(["criterion", str(rule), "--fn", "f2"], capsys)
    assert code == 2  # f2 needs --w
    code, _, _ = run(["evaluate", str(rule), "--lambda", "1.5"], capsys)
    assert code == 2


def test_rule_file_rejections(tmp_path, capsys):
    path = construct(tmp_path, capsys)
    obj = json.loads(path.read_text())
    bad = dict(obj, trace=[dict(t) for t in obj["trace"]])
    bad["trace"][-1]["B_u"] = obj["B_u"] * 2
    with pytest.raises(InvalidRuleError):
        rule_from_json(bad)
    for mutate in ({"p": 4}, {"d": 0}, {"schema_version": 99}, {"q": obj["q"][:-1]}):
        with pytest.raises(InvalidRuleError):
            rule_from_json(dict(obj, **mutate))
    tampered = tmp_path / "bad.json"
    tampered.write_text(json.dumps(bad))
    assert run(["points", str(tampered)], capsys)[0] == 2
    tampered.write_text("{not json")
    assert run(["evaluate", str(tampered)], capsys)[0] == 2
    assert run(["points", str(tmp_path / "missing.json")], capsys)[0] == 2


def test_thread_variable_validated(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("QMC_IPL_THREADS", "zero")
    code, _, err = run(["construct", "--m", "4", "--s", "1", "--r", "1"], capsys)
    assert code == 2 and "QMC_IPL_THREADS" in err
    monkeypatch.setenv("QMC_IPL_THREADS", "0")
    assert run(["construct", "--m", "4", "--s", "1", "--r", "1"], capsys)[0] == 2


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_experiment_b1_rows_revalidate(capsys):
    code, out, _ = run(["experiment", "b1", "--r", "1,2", "--s", "1,2", "--m", "3-6"], capsys)
    assert code == 0
    rows = parse_csv(out)
    assert len(rows) == 2 * 2 * 4
    # every row's B_u equals a fresh evaluation of the rule it describes
    from qmc_ipl.cbc import cbc_construct_fast
    for row in rows:
        m, s, d, r = int(row["m"]), int(row["s"]), int(row["d"]), float(row["r"])
        spec = cbc_construct_fast(2, m, s, d, WeightProfile(r=r)).spec
        assert float(row["B_u"]) == pytest.approx(B_u(spec), rel=1e-10, abs=1e-300)
        assert int(row["N"]) == 2 ** m


def test_experiment_b1_prefix_dimension_ratio():
    # with fast-decaying weights the extra coordinates barely move B_u
    rows = run_experiment("b1", Grid(r=(2.0,), s=(2, 4), m=tuple(range(3, 11))))
    by = {(row["s"], row["m"]): row["B_u"] for row in rows}
    for m in range(3, 11):
        assert by[2, m] <= by[4, m] <= 10 * by[2, m], m


def test_experiment_f1_drops_from_m8_to_m9():
    rows = run_experiment("f1", Grid(r=(0.5,), s=(4,), m=(8, 9)))
    err = {row["m"]: row["abs_error"] for row in rows}
    assert err[9] < err[8]


def test_experiment_f2_has_sobol_baseline(capsys):
    code, out, _ = run(["experiment", "f2", "--s", "2", "--m", "4,6", "--w", "0.5"], capsys)
    assert code == 0
    rows = parse_csv(out)
    assert {row["baseline"] for row in rows} == {"ipl", "sobol"}
    assert all(row["abs_error"] for row in rows)
    assert [row["B_u"] for row in rows if row["baseline"] == "sobol"] == ["", ""]


@pytest.mark.parametrize("flags", [["b1", "--m", "6-3"], ["bogus"], ["b1", "--s", "a"], ["f2", "--w", "0"]])
def test_experiment_rejects_bad_flags(flags, capsys):
    assert run(["experiment", *flags], capsys)[0] == 2


def test_experiment_extended_guard(capsys):
    assert run(["experiment", "f1", "--r", "1", "--s", "1", "--m", "14"], capsys)[0] == 2
    code, out, _ = run(["experiment", "f1", "--r", "1", "--s", "1", "--m", "14", "--allow-extended"], capsys)
    assert code == 0 and len(parse_csv(out)) == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qmc_ipl", "construct", "--m", "3", "--s", "1", "--r", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["m"] == 3
    proc = subprocess.run([sys.executable, "-m", "qmc_ipl", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout


def test_rule_spec_from_cli_matches_library(tmp_path, capsys):
    rule = load_rule(construct(tmp_path, capsys))
    spec = rule.spec
    again = RuleSpec(spec.b, spec.m, spec.s, spec.d, spec.p,
                     tuple(GFPolynomial.from_int(2, q.enc) for q in spec.q))
    assert again == spec
