import csv
import json

import numpy as np
import pytest

from isocrit import applied
from isocrit.cli import main


def _write(path, rows, header=("age", "bmi", "wt", "grp", "str")):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return str(path)


@pytest.fixture
def survey_csv(tmp_path):
    rng = np.random.default_rng(0)
    rows = []
    for i in range(160):
        g = i % 4 + 1
        # the third group sits above the fourth, so pooling is likely
        level = [20.0, 21.0, 23.5, 22.5][g - 1]
        rows.append([21 + 4 * (g - 1) + rng.uniform(0, 3.9), level + rng.normal(0, 1.5),
                     [40, 60, 40, 60][g - 1], f"g{g}", f"s{g}"])
    return _write(tmp_path / "survey.csv", rows)


def _estimate(capsys, *args):
    code = main(["estimate", *args])
    out = capsys.readouterr().out
    return code, (json.loads(out) if code == 0 and out else None)


def test_binned_estimate_report_invariants(survey_csv, capsys):
    code, rep = _estimate(capsys, survey_csv, "--value-col", "bmi", "--weight-col", "wt",
                          "--bin-col", "age", "--bin-edges", "21,25,29,33,37")
    assert code == 0
    assert [e["label"] for e in rep["estimates"]] == ["[21,25)", "[25,29)", "[29,33)", "[33,37]"]
    con = [e["constrained"] for e in rep["estimates"]]
    assert all(a <= b for a, b in zip(con, con[1:]))
    for e, ci in zip(rep["estimates"], rep["ci"]):
        lo, hi = ci["constrained"]
        assert lo <= e["constrained"] <= hi
        lo, hi = ci["unconstrained"]
        assert lo <= e["unconstrained"] <= hi
    blocks = {tuple(e["block"]) for e in rep["estimates"]}
    assert rep["tests"]["wald"]["k"] == len(blocks)
    assert rep["cic"]["chosen"] in ("constrained", "unconstrained")
    assert "covariance-mode: independent-approx" in rep["flags"]


def test_stratified_mode_and_decreasing(survey_csv, capsys):
    code, rep = _estimate(capsys, survey_csv, "--value-col", "bmi", "--weight-col", "wt",
                          "--domain-col", "grp", "--stratum-col", "str", "--decreasing")
    assert code == 0
    assert rep["covariance_mode"] == "exact-joint"
    con = [e["constrained"] for e in rep["estimates"]]
    assert all(a >= b for a, b in zip(con, con[1:]))


def test_csv_round_trip(survey_csv, tmp_path, capsys):
    out_csv = tmp_path / "est.csv"
    code, rep = _estimate(capsys, survey_csv, "--value-col", "bmi", "--weight-col", "wt",
                          "--domain-col", "grp", "--csv-out", str(out_csv))
    assert code == 0
    rows = applied.read_estimates_csv(out_csv)
    assert [r["label"] for r in rows] == ["g1", "g2", "g3", "g4"]
    for r, e, ci in zip(rows, rep["estimates"], rep["ci"]):
        assert r["unconstrained"] == e["unconstrained"]
        assert r["constrained"] == e["constrained"]
        assert [r["constrained_lo"], r["constrained_hi"]] == ci["constrained"]


def test_estimate_is_deterministic(survey_csv, capsys):
    args = (survey_csv, "--value-col", "bmi", "--weight-col", "wt", "--domain-col", "grp", "--seed", "5")
    assert _estimate(capsys, *args) == _estimate(capsys, *args)


def test_missing_column_exits_2(survey_csv, capsys):
    code, _ = _estimate(capsys, survey_csv, "--value-col", "nope", "--weight-col", "wt", "--domain-col", "grp")
    assert code == 2


def test_malformed_rows_exit_2(tmp_path, capsys):
    path = _write(tmp_path / "bad.csv", [[22, "x", 10, "a", "s"]])
    assert _estimate(capsys, path, "--value-col", "bmi", "--weight-col", "wt", "--domain-col", "grp")[0] == 2
    path = _write(tmp_path / "light.csv", [[22, 1.0, 0.5, "a", "s"]])
    assert _estimate(capsys, path, "--value-col", "bmi", "--weight-col", "wt", "--domain-col", "grp")[0] == 2


def test_empty_bin_exits_3(survey_csv, capsys):
    code, _ = _estimate(capsys, survey_csv, "--value-col", "bmi", "--weight-col", "wt",
                        "--bin-col", "age", "--bin-edges", "0,1,50")
    assert code == 3


def test_stratum_with_unequal_weights_exits_2(tmp_path, capsys):
    rows = [[22, 1.0, 10, "a", "s"], [23, 2.0, 20, "a", "s"], [30, 3.0, 10, "b", "s"]]
    path = _write(tmp_path / "mixed.csv", rows)
    code, _ = _estimate(capsys, path, "--value-col", "bmi", "--weight-col", "wt",
                        "--domain-col", "grp", "--stratum-col", "str")
    assert code == 2


def test_single_unit_domain_flagged(tmp_path, capsys):
    rows = [[22, 1.0, 10, "a", "s"], [23, 2.0, 10, "a", "s"], [30, 3.0, 10, "b", "s"]]
    path = _write(tmp_path / "tiny.csv", rows)
    code, rep = _estimate(capsys, path, "--value-col", "bmi", "--weight-col", "wt", "--domain-col", "grp")
    assert code == 0
    assert any(f.startswith("degenerate-ci") for f in rep["flags"])


def test_simulate_deterministic(tmp_path, capsys):
    outs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        assert main(["simulate", "--scenario", "table1:1", "--reps", "3", "--mc-draws", "1000", "--out", str(path)]) == 0
        data = json.loads(path.read_text())
        data.pop("wall_time_s")
        outs.append(data)
    assert outs[0] == outs[1]
    assert outs[0]["config"]["reps"] == 3
    assert outs[0]["summary"]["reps_used"] == 3


def test_simulate_from_json_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"N": 2000, "allocation": [5, 10, 10, 15], "reps": 2, "mc_draws": 1000}))
    assert main(["simulate", "--scenario", str(cfg)]) == 0
    assert json.loads(capsys.readouterr().out)["summary"]["reps_used"] == 2
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["simulate", "--scenario", str(cfg)]) == 2


def test_table_command(capsys):
    assert main(["table", "--table", "99"]) == 2
    assert main(["table", "--table", "10", "--reps", "2"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("Table 10")
    assert "ratio_adaptive" in out
