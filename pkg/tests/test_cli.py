import csv
import json

import numpy as np
import pytest

from semimarkov_lob.chain import StateModel
from semimarkov_lob.cli import main
from semimarkov_lob.simulate import SojournSpec, simulate_path, write_synthetic_lobster


def _golden_args(golden_paths, out, *extra):
    msg, ob = golden_paths
    return ["estimate", "--message", str(msg), "--orderbook", str(ob), "--symbol", "GOLD",
            "--trim-minutes", "0", "--out", str(out), *extra]


def test_missing_file_exit_code(tmp_path, capsys):
    missing = tmp_path / "nope_message_1.csv"
    code = main(["estimate", "--message", str(missing), "--orderbook", str(missing), "--out", str(tmp_path)])
    assert code == 2
    assert str(missing) in capsys.readouterr().err


def test_estimate_golden(tmp_path, golden_paths):
    assert main(_golden_args(golden_paths, tmp_path)) == 0
    sym = tmp_path / "GOLD"
    for name in ("model.json", "price_changes.csv", "spread.csv", "report.json"):
        assert (sym / name).exists()
    model = StateModel.from_json(sym / "model.json")
    assert model.n == 2
    rows = list(csv.DictReader(open(tmp_path / "report.csv")))
    assert rows[0]["symbol"] == "GOLD"
    assert json.loads(rows[0]["a"]) == [0.0075, -0.005]
    report = json.loads((sym / "report.json").read_text())
    assert report["config"]["trim_minutes"] == 0


@pytest.fixture(scope="module")
def synthetic_pair(tmp_path_factory):
    d = tmp_path_factory.mktemp("syn")
    model = StateModel.from_P([0.01, 0.005, -0.005, -0.01],
                              [[0.1, 0.3, 0.4, 0.2], [0.2, 0.2, 0.3, 0.3], [0.3, 0.3, 0.2, 0.2], [0.2, 0.4, 0.3, 0.1]])
    path = simulate_path(model, SojournSpec.exponential(2.0), 40_000, seed=1)
    msg, ob = d / "SYN_2012-06-21_34200000_57600000_message_1.csv", d / "SYN_2012-06-21_34200000_57600000_orderbook_1.csv"
    write_synthetic_lobster(msg, ob, path)
    return msg, ob


def _syn_args(pair, out, *extra):
    return ["estimate", "--message", str(pair[0]), "--orderbook", str(pair[1]), "--out", str(out), *extra]


def test_estimate_is_byte_identical(tmp_path, synthetic_pair):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(_syn_args(synthetic_pair, a, "--states", "4")) == 0
    assert main(_syn_args(synthetic_pair, b, "--states", "4")) == 0
    sym = "SYN_2012-06-21"
    for name in ("model.json", "price_changes.csv", "spread.csv"):
        assert (a / sym / name).read_bytes() == (b / sym / name).read_bytes()
    ra = json.loads((a / sym / "report.json").read_text())
    rb = json.loads((b / sym / "report.json").read_text())
    ra["config"].pop("out"), rb["config"].pop("out")
    assert ra == rb
    assert 2 <= ra["row"]["n_states"] <= 4
    assert ra["row"]["realized_std"] > 0


def test_config_overrides_flags(tmp_path, synthetic_pair):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# overrides\nn_states = 3\nbinning = distinct\n")
    assert main(_syn_args(synthetic_pair, tmp_path, "--states", "2", "--config", str(cfg))) == 0
    report = json.loads((tmp_path / "SYN_2012-06-21" / "report.json").read_text())
    assert report["config"]["n_states"] == 3
    assert report["config"]["binning"] == "distinct"
    assert report["row"]["n_states"] == 4
    np.testing.assert_allclose(json.loads(report["row"]["a"]), [0.01, 0.005, -0.005, -0.01])


def test_workers_match_serial(tmp_path, synthetic_pair):
    msg, ob = (str(p) for p in synthetic_pair)
    common = ["estimate", "--message", msg, "--orderbook", ob, "--message", msg, "--orderbook", ob,
              "--symbol", "X", "--symbol", "Y"]
    assert main([*common, "--out", str(tmp_path / "s")]) == 0
    assert main([*common, "--out", str(tmp_path / "p"), "--workers", "2"]) == 0
    assert (tmp_path / "s" / "report.csv").read_bytes() == (tmp_path / "p" / "report.csv").read_bytes()


def test_bad_config_key(tmp_path, golden_paths):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"colour": "red"}))
    assert main(_golden_args(golden_paths, tmp_path, "--config", str(cfg))) == 1


def test_events_export(tmp_path, golden_paths):
    msg, ob = golden_paths
    assert main(["events", "--message", str(msg), "--orderbook", str(ob), "--trim-minutes", "0",
                 "--out", str(tmp_path), "--export"]) == 0
    summary = json.loads(next(tmp_path.glob("*_events.json")).read_text())["summary"]
    assert summary["n_events"] == 1000
    assert "lambda_hat" in summary


def test_simulate_then_estimate_recovers_P(tmp_path, capsys):
    model = StateModel.two_state(0.3, 0.6, 0.005, -0.005)
    model.to_json(tmp_path / "model.json")
    prefix = tmp_path / "SYN_2012-06-21_34200000_57600000"
    code = main(["simulate", "--model", str(tmp_path / "model.json"), "--sojourn", "exp:2.0",
                 "--paths", "10", "--jumps", "1000", "--seed", "42", "--out", str(tmp_path / "sim.json"),
                 "--lobster-out", str(prefix), "--lobster-jumps", "60000"])
    assert code == 0
    sim = json.loads((tmp_path / "sim.json").read_text())
    assert sim["lobster_jumps_written"] > 30_000
    capsys.readouterr()
    code = main(["estimate", "--message", f"{prefix}_message_1.csv", "--orderbook", f"{prefix}_orderbook_1.csv",
                 "--out", str(tmp_path / "est")])
    assert code == 0
    est = StateModel.from_json(tmp_path / "est" / "SYN_2012-06-21" / "model.json")
    np.testing.assert_allclose(est.P, model.P, atol=0.02)
    np.testing.assert_allclose(est.a, [0.005, -0.005], atol=1e-9)


def _write_report(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["symbol", "coeff_balanced", "coeff_unbalanced", "realized_std"])
        w.writeheader()
        w.writerows(rows)


def test_report_perfect_fit(tmp_path):
    rows = [{"symbol": f"S{i}", "coeff_balanced": c, "coeff_unbalanced": c / 3, "realized_std": 2 * c}
            for i, c in enumerate([0.01, 0.02, 0.05, 0.09])]
    _write_report(tmp_path / "r.csv", rows)
    assert main(["report", str(tmp_path / "r.csv"), "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "regression.json").read_text())["summary"]
    for key in ("coeff_balanced", "coeff_unbalanced"):
        assert summary[key]["with_intercept"]["adj_r2"] == pytest.approx(1.0, abs=1e-12)
    assert len((tmp_path / "scatter.csv").read_text().splitlines()) == 5


def test_report_needs_three_rows(tmp_path, capsys):
    rows = [{"symbol": "A", "coeff_balanced": 1, "coeff_unbalanced": 1, "realized_std": 1},
            {"symbol": "B", "coeff_balanced": 2, "coeff_unbalanced": 2, "realized_std": 2}]
    _write_report(tmp_path / "r.csv", rows)
    assert main(["report", str(tmp_path / "r.csv"), "--out", str(tmp_path)]) == 1
    assert "at least 3" in capsys.readouterr().err


def test_probup_export(tmp_path, golden_paths):
    out = tmp_path / "p.csv"
    msg, ob = golden_paths
    assert main(["probup", "--max-n", "3", "--max-p", "3", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 10
    assert main(["probup", "--max-n", "3", "--max-p", "3", "--message", str(msg), "--orderbook", str(ob),
                 "--trim-minutes", "0", "--out", str(out)]) == 0
    totals = [line.split(",")[4] for line in out.read_text().splitlines()[1:]]
    assert all(t != "" for t in totals)
