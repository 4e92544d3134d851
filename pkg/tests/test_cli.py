import csv
import dataclasses
import io
import subprocess
import sys
from collections import defaultdict

import numpy as np
import pytest

from hybridlink import cli, mc, outage
from hybridlink.errors import NumericalError
from hybridlink.scenario import bundled_scenario_path


def _run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def _curves(text, key=("state",)):
    rows = list(csv.DictReader(io.StringIO(text)))
    out = defaultdict(dict)
    for r in rows:
        out[tuple(r[k] for k in key)][float(r["P_t_dbm"])] = float(r["analytic_op"])
    return rows, out


def test_sweep_fig2_crossover(capsys):
    code, out, _ = _run(["sweep", "fig2.scn", "--points", "31", "--states", "1,2"], capsys)
    assert code == 0
    _, curves = _curves(out)
    p = np.array(sorted(curves[("1",)]))
    diff = np.log10([curves[("1",)][x] for x in p]) - np.log10([curves[("2",)][x] for x in p])
    k = np.nonzero(np.diff(np.sign(diff)))[0]
    assert len(k) == 1
    cross = p[k[0]] - diff[k[0]] * (p[k[0] + 1] - p[k[0]]) / (diff[k[0] + 1] - diff[k[0]])
    assert 14.0 <= cross <= 18.0


def test_sweep_columns_and_order(capsys):
    code, out, _ = _run(["sweep", "fig2.scn", "--points", "4"], capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["P_t_dbm", "state", "analytic_op", "asymptotic_op"]
    assert [(r[0], r[1]) for r in rows[1:5]] == [("0", "0"), ("0", "1"), ("0", "2"), ("0", "avg")]
    assert [float(r[0]) for r in rows[1:]] == sorted(float(r[0]) for r in rows[1:])


def test_single_point(capsys):
    code, out, _ = _run(["sweep", "fig2.scn", "--points", "1", "--power-from", "12"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert [r["state"] for r in rows] == ["0", "1", "2", "avg"]
    assert {r["P_t_dbm"] for r in rows} == {"12"}


def test_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "fig3.scn", "--points", "3", "--mc", "--samples", "20000", "--seed", "4"]
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b), "--jobs", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0].endswith("mc_op,mc_stderr")


def test_fig3_aperture_dominance(capsys):
    code, out, _ = _run(["sweep", "fig3.scn", "--points", "11", "--states", "0,1,avg"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    op = {(r["boresight_m"], r["aperture_diameter_m"], r["state"], r["P_t_dbm"]): float(r["analytic_op"])
          for r in rows}
    for (s, d, st, p), v in op.items():
        if d == "0.2":
            assert op[(s, "0.3", st, p)] < v


def test_pointing_off(capsys):
    code, out, _ = _run(["sweep", "fig3.scn", "--points", "2", "--pointing", "off"], capsys)
    assert code == 0 and out.splitlines()[0].startswith("P_t_dbm")


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.scn"
    bad.write_text(bundled_scenario_path("fig2.scn").read_text().replace("rx_gain_db", "rx_gain"))
    code, _, err = _run(["sweep", str(bad)], capsys)
    assert code == 2
    assert "line" in err and "rf.rx_gain" in err


@pytest.mark.parametrize("argv", [["sweep", "fig2.scn", "--states", "3"], ["sweep"],
                                  ["sweep", "fig2.scn", "--points", "0"], ["bogus"],
                                  ["sweep", "/no/such/file.scn"]])
def test_usage_errors(argv, capsys):
    assert cli.main(argv) == 2


def test_numerical_failure_marks_rows(monkeypatch, capsys):
    real = outage.outage_state

    def flaky(sc, state, ctl=outage.DEFAULT_CONTROL):
        if state == 1 and sc.total_power_dbm > 20:
            raise NumericalError("forced", {})
        return real(sc, state, ctl)

    monkeypatch.setattr(outage, "outage_state", flaky)
    code, out, err = _run(["sweep", "fig2.scn", "--points", "4", "--states", "1,2"], capsys)
    assert code == 3
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["analytic_op"] for r in rows if r["state"] == "1"][-1] == "error"
    assert all(r["analytic_op"] != "error" for r in rows if r["state"] == "2")
    assert "forced" in err


def test_validate_fig2(capsys):
    code, out, err = _run(["validate", "fig2.scn", "--samples", "1000000", "--seed", "1"], capsys)
    assert code == 0, out
    assert "0 flagged" in err
    assert len(out.splitlines()) == 1 + 30


def test_validate_single_sample(capsys):
    code, out, _ = _run(["validate", "fig2.scn", "--samples", "1"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and all(r["flag"] == "insufficient_resolution" for r in rows)


def test_validate_corrupted_fixture(monkeypatch, capsys):
    real = outage.outage_state

    def corrupted(sc, state, ctl=outage.DEFAULT_CONTROL):
        ew = tuple(None if e is None else dataclasses.replace(e, eta=2 * e.eta) for e in sc.ew)
        return real(sc.replace(ew=ew), state, ctl)

    monkeypatch.setattr(mc.outage, "outage_state", corrupted)
    code, _, err = _run(["validate", "fig2.scn", "--samples", "100000", "--points", "4"], capsys)
    assert code == 1
    assert "0 flagged" not in err


@pytest.mark.parametrize("state,expected", [("1", "2.2117"), ("2", "1.0000")])
def test_diversity(state, expected, capsys):
    code, out, _ = _run(["diversity", "fig2.scn", "--state", state], capsys)
    assert code == 0
    assert f"diversity order {expected}" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "hybridlink", "sweep", "fig2.scn", "--points", "1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.startswith("P_t_dbm,state")
