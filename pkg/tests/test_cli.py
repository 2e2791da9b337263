import csv
import io
import json
import math
import subprocess
import sys

import pytest

from heraldiq.cli import REPORT_VERSION, SIMULATE_COLUMNS, SWEEP_COLUMNS, TABLE_COLUMNS, main, threads_hint


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_simulate_5p5m(capsys):
    code, out, _ = _run(capsys, "simulate", "--builtin", "bell-5p5m")
    assert code == 0
    rep = json.loads(out)
    assert rep["report_version"] == REPORT_VERSION
    assert rep["success"]["rational"] == "12/125"
    assert rep["success"]["decimal"] == pytest.approx(0.096)
    assert rep["fidelity"] == pytest.approx(1)
    assert rep["matches_expected"] is True


def test_simulate_hom(capsys):
    code, out, _ = _run(capsys, "simulate", "--builtin", "hom-noon2")
    rep = json.loads(out)
    assert code == 0
    assert rep["success"]["rational"] == "1"
    assert rep["fidelity"] == pytest.approx(1)


def test_simulate_eta_lowers_success_and_reports_false_negatives(capsys):
    code, out, _ = _run(capsys, "simulate", "--builtin", "bell-5p5m", "--eta", "0.9")
    rep = json.loads(out)
    assert code == 0
    assert rep["success"]["decimal"] < 12 / 125
    assert rep["false_negative"]["probability"] > 0
    assert rep["detectors"][0]["efficiency"] == 0.9


def test_simulate_csv_columns(capsys):
    code, out, _ = _run(capsys, "simulate", "--builtin", "bell-6p6m", "--format", "csv")
    assert code == 0
    rows = _csv_rows(out)
    assert list(rows[0]) == SIMULATE_COLUMNS
    assert {r["tag"] for r in rows if r["pattern"] != "total"} == {"phi+", "phi-"}
    total = [r for r in rows if r["pattern"] == "total"][0]
    assert total["rational"] == "4/27"


def test_simulate_threshold_and_dark(capsys):
    code, out, _ = _run(capsys, "simulate", "--builtin", "bell-4p6m", "--threshold", "--dark", "0.01")
    rep = json.loads(out)
    assert code == 0
    assert rep["detectors"][0]["kind"] == "threshold"
    assert rep["false_positive"]["probability"] > 0


def test_byte_identical_reports(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["simulate", "--builtin", "bell-6p6m", "--eta", "0.8", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    for p in (a, b):
        assert main(["search", "--builtin-problem", "noon2", "--seed", "3", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_exit_invalid_config(capsys):
    code, _, err = _run(capsys, "simulate", "--builtin", "no-such-scheme")
    assert code == 2 and "error" in err
    code, _, _ = _run(capsys, "simulate", "--builtin", "bell-5p5m", "--eta", "1.7")
    assert code == 2
    code, _, _ = _run(capsys, "simulate", "--builtin", "bell-4p8m")
    assert code == 2
    code, _, _ = _run(capsys, "simulate", "--scheme", "/nonexistent/file.json")
    assert code == 2
    code, _, _ = _run(capsys, "sweep", "--param", "eta", "--builtin", "bell-5p5m")
    assert code == 2


def test_exit_cap_exceeded(capsys):
    code, _, err = _run(capsys, "simulate", "--builtin", "bell-5p5m", "--trunc", "3")
    assert code == 3
    code, _, _ = _run(capsys, "simulate", "--builtin", "bell-5p5m", "--trunc", "99")
    assert code == 3


def test_exit_budget_exhausted(capsys):
    code, out, _ = _run(capsys, "search", "--builtin-problem", "bell-4p6m", "--restarts", "1", "--iterations", "1")
    assert code == 4
    rep = json.loads(out)
    assert rep["found"] is False


def test_search_noon2_writes_scheme(capsys, tmp_path):
    path = tmp_path / "found.json"
    code, out, _ = _run(capsys, "search", "--builtin-problem", "noon2", "--scheme-out", str(path))
    assert code == 0
    rep = json.loads(out)
    assert rep["found"] and rep["revalidated"]["fidelity"] == pytest.approx(1, abs=1e-6)
    code, out, _ = _run(capsys, "simulate", "--scheme", str(path))
    assert code == 0
    assert json.loads(out)["success"]["decimal"] == pytest.approx(1)


def test_tables(capsys):
    code, out, _ = _run(capsys, "tables", "--multiplex", "50")
    assert code == 0
    rows = _csv_rows(out)
    assert list(rows[0]) == TABLE_COLUMNS
    by_key = {r["key"]: r for r in rows}
    assert by_key["bell-sms d=2"]["rational"] == "4/27"
    assert by_key["ghz-subtraction N=3"]["rational"] == "1/64"
    assert by_key["bell-5p5m"]["source"] in ("simulated", "reported")
    slot = [r for r in rows if r["key"] == "bell-4p8m" and r["photons"] == "4" and r["success"] == ""]
    assert slot and slot[0]["source"] == "external"
    assert by_key["noon-5-from-2220"]["rational"] == ""
    row = [r for r in rows if r["key"] == "bell-4p6m" and r["source"] == "reported"][0]
    assert float(row["multiplexed"]) == pytest.approx(1 - (25 / 27) ** 50, abs=1e-11)


def test_sweep_visibility(capsys):
    code, out, _ = _run(capsys, "sweep", "--param", "visibility", "--values", "0,0.25,0.81,1")
    assert code == 0
    rows = _csv_rows(out)
    assert list(rows[0]) == SWEEP_COLUMNS["visibility"]
    for r in rows:
        assert float(r["coincidence"]) == pytest.approx((1 - float(r["visibility"])) / 2, abs=1e-10)


def test_sweep_eta_monotone(capsys):
    code, out, _ = _run(capsys, "sweep", "--param", "eta", "--builtin", "bell-5p5m", "--grid", "0.5:1:6")
    assert code == 0
    s = [float(r["success"]) for r in _csv_rows(out)]
    assert all(b >= a for a, b in zip(s, s[1:]))
    assert s[-1] == pytest.approx(12 / 125)


def _vacuum_herald_scheme(path):
    from heraldiq.detect import HeraldSpec
    from heraldiq.fock import Register
    from heraldiq.interferometer import BeamSplitter, Circuit
    from heraldiq.schemes import SchemeDefinition, TargetSpec, dump_scheme

    s = SchemeDefinition(
        name="hom-vacuum-herald",
        circuit=Circuit(4, (BeamSplitter(0, 1),)),
        input=(1, 1, 0, 0),
        herald=HeraldSpec((2, 3), patterns=((0, 0),)),
        target=TargetSpec("noon", {"n": 2}, Register(((0, 1),))),
        correction="none",
    )
    dump_scheme(s, path)


def test_sweep_dark_power_law(capsys, tmp_path):
    path = tmp_path / "vac.json"
    _vacuum_herald_scheme(path)
    code, out, _ = _run(capsys, "sweep", "--param", "dark", "--scheme", str(path), "--values", "0,0.01,0.1,0.3")
    assert code == 0
    for r in _csv_rows(out):
        pdc = float(r["dark"])
        assert float(r["success"]) == pytest.approx((1 - pdc) ** 2, abs=1e-11)
        if pdc > 0:
            assert float(r["false_negative_rate"]) > 0


def test_sweep_squeeze(capsys):
    code, out, _ = _run(capsys, "sweep", "--param", "squeeze", "--values", "0.3")
    assert code == 0
    r = _csv_rows(out)[0]
    assert float(r["pair_ratio"]) == pytest.approx(math.tanh(0.3) ** 2, rel=1e-10)


def test_sources_product_and_correlated(capsys):
    code, out, _ = _run(capsys, "sources", "--correlation", "0")
    rep = json.loads(out)
    assert code == 0
    assert rep["schmidt_number"] == pytest.approx(1, abs=1e-10)
    assert rep["g2_unheralded"] == pytest.approx(2, abs=1e-10)
    code, out, _ = _run(capsys, "sources", "--correlation", "0.7", "--squeeze", "0.3")
    rep = json.loads(out)
    assert rep["purity"] < 1
    assert rep["tmsv"]["pair_ratio"] == pytest.approx(math.tanh(0.3) ** 2)


def test_sources_jsa_roundtrip(capsys, tmp_path):
    path = tmp_path / "jsa.csv"
    code, out, _ = _run(capsys, "sources", "--correlation", "0.5", "--bins", "16", "--jsa-out", str(path))
    first = json.loads(out)["schmidt_number"]
    code, out, _ = _run(capsys, "sources", "--jsa", str(path))
    assert code == 0
    assert json.loads(out)["schmidt_number"] == pytest.approx(first, abs=1e-10)


def test_threads_hint(monkeypatch):
    monkeypatch.setenv("HERALDIQ_THREADS", "4")
    assert threads_hint() == 4
    monkeypatch.setenv("HERALDIQ_THREADS", "x")
    assert threads_hint() is None


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "heraldiq", "simulate", "--builtin", "hom-noon2", "--format", "csv"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == ",".join(SIMULATE_COLUMNS)
