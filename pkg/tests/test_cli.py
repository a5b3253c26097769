import json

import numpy as np
import pytest

from itergcp import cli, igcp
from itergcp.core import BudgetExceeded, PmfVector


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def data_rows(text):
    return [ln.split(",") for ln in text.splitlines() if ln and not ln.startswith("#")][1:]


def test_pmf_csv(capsys):
    code, out, _ = run(["pmf", "--process", "igcp", "--outer", "1,0.5", "--inner", "0.6,0.2", "--t", "1",
                        "--n-max", "5"], capsys)
    assert code == 0
    assert out.startswith("# ")
    rows = data_rows(out)
    assert len(rows) == 6
    p = igcp.IgcpParams.from_rates([1.0, 0.5], [0.6, 0.2])
    for n, row in enumerate(rows):
        assert float(row[1]) == igcp.igcp_pmf_vector(p, 1.0, 5).probs[n]


def test_pmf_json_roundtrip(tmp_path, capsys):
    path = tmp_path / "pmf.json"
    code, _, _ = run(["pmf", "--process", "gcp", "--outer", "1,0.5", "--n-max", "4", "--format", "json",
                      "--output", str(path)], capsys)
    assert code == 0
    payload = json.loads(path.read_text())
    assert payload["columns"] == ["n", "probability", "tail_bound"]
    assert len(payload["rows"]) == 5


@pytest.mark.parametrize("process", ["gcp", "igcp", "compound", "multivariate", "qiter", "tc_igcp"])
def test_pmf_every_process(process, capsys):
    code, out, _ = run(["pmf", "--process", process, "--n-max", "3"], capsys)
    assert code == 0
    assert sum(float(r[-2]) for r in data_rows(out)) <= 1.0 + 1e-12


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("process:\n  kind: gcp\n  outer: [2.0]\nt: 3.0\nn_max: 2\n")
    code, out, _ = run(["pmf", "--config", str(cfg), "--n-max", "1"], capsys)
    assert code == 0
    rows = data_rows(out)
    assert len(rows) == 2
    assert float(rows[0][1]) == pytest.approx(np.exp(-6.0))


def test_simulate_deterministic(capsys):
    args = ["simulate", "--process", "igcp", "--samples", "200", "--seed", "4"]
    _, a, _ = run(args, capsys)
    _, b, _ = run(args + ["--workers", "3"], capsys)
    assert a == b
    assert len(data_rows(a)) == 200


def test_simulate_paths(capsys):
    code, out, _ = run(["simulate", "--process", "gcp", "--samples", "5", "--paths", "--t", "2"], capsys)
    assert code == 0
    rows = data_rows(out)
    assert all(0 <= float(r[1]) <= 2 for r in rows)


def test_moments(capsys):
    code, out, _ = run(["moments", "--process", "igcp", "--t-grid", "1,2"], capsys)
    assert code == 0
    p = igcp.IgcpParams.from_rates([1.0, 0.5], [0.6, 0.2])
    rows = data_rows(out)
    assert float(rows[1][1]) == pytest.approx(2 * p.S)
    assert float(rows[1][2]) == pytest.approx(2 * p.T)


def test_lrd(capsys):
    code, out, _ = run(["lrd", "--process", "tc_igcp", "--alpha", "0.6"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert abs(rep["fitted_exponent"] - 0.6) < 0.03
    assert rep["classification"] == "LRD"


def test_verify_quick(capsys):
    code, out, _ = run(["verify", "--suite", "quick"], capsys)
    assert code == 0
    assert all(r["pass"] for r in json.loads(out))


def test_verify_single_check(capsys):
    code, out, _ = run(["verify", "--check", "levy_total_mass"], capsys)
    assert code == 0
    assert [r["check"] for r in json.loads(out)] == ["levy_total_mass"]


@pytest.mark.parametrize("argv", [
    ["pmf", "--outer", "1,-2"],
    ["pmf", "--outer", "a,b"],
    ["lrd", "--process", "tc_igcp", "--t-grid", "1000"],
    ["verify", "--suite", "nope"],
    ["pmf", "--process", "nope"],
    ["pmf", "--law", "cauchy:1", "--process", "compound"],
    ["simulate", "--process", "qiter", "--paths"],
])
def test_invalid_input_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("- just\n- a list\n")
    assert run(["pmf", "--config", str(cfg)], capsys)[0] == 2
    assert run(["pmf", "--config", str(tmp_path / "missing.yaml")], capsys)[0] == 2


def test_budget_exit_3(monkeypatch, capsys):
    def too_big(cfg):
        raise BudgetExceeded("too many terms")

    monkeypatch.setitem(cli.COMMANDS, "pmf", too_big)
    code, _, err = run(["pmf"], capsys)
    assert code == 3
    assert "budget_exceeded" in err


def test_verify_budget_status(monkeypatch, capsys):
    def too_big(seed):
        raise BudgetExceeded("too many terms")

    monkeypatch.setitem(cli.CHECK_NAMES, "levy_total_mass", too_big)
    code, out, _ = run(["verify", "--check", "levy_total_mass"], capsys)
    assert code == 3
    assert json.loads(out)[0]["status"] == "budget_exceeded"


def test_pmf_vector_io():
    v = PmfVector(np.array([0.25, 0.5, 0.125]), 0.125, {"t": 1.0})
    back = PmfVector.from_json(v.to_json())
    np.testing.assert_array_equal(back.probs, v.probs)
    assert back.tail_bound == 0.125 and back.meta == {"t": 1.0}
    back = PmfVector.from_csv(v.to_csv(with_tail=True))
    np.testing.assert_array_equal(back.probs, v.probs)
    assert back.tail_bound == 0.125
