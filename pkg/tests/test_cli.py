"""Command-line entry points, exit codes and output determinism."""

import csv
import json
import os
import subprocess
import sys

import pytest

from kext.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main
from kext.dynsys import SQRT38


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for key in list(os.environ):
        if key.startswith("KEXT_") and key != "KEXT_PURE_PYTHON":
            monkeypatch.delenv(key)


def _run(tmp_path, name, *argv):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def test_integrate_csv(tmp_path, capsys):
    code, out = _run(tmp_path, "t.csv", "integrate", "--p", "0.5", "--y-end", "5",
                     "--samples", "11")
    assert code == EXIT_OK
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["y", "phi1", "phi2", "dphi1", "dphi2", "H1", "H2"]
    assert len(rows) == 12 and float(rows[-1][0]) == 5.0
    assert "max_drift" in capsys.readouterr().err


def test_integrate_decay_summary(tmp_path, capsys):
    code, _ = _run(tmp_path, "d.csv", "integrate", "--p", str(3 ** 0.5 / 2),
                   "--y-end", "60", "--tol", "1e-13")
    assert code == EXIT_OK
    err = capsys.readouterr().err
    norm = float(err.split("min |(phi1, phi2)| = ")[1].split()[0])
    assert norm < 1e-3


def test_integrate_to_stdout(capsys):
    assert main(["integrate", "--p", "0.5", "--y-end", "1", "--samples", "3"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("y,phi1,phi2")


def test_periods_table(tmp_path, capsys):
    code, out = _run(tmp_path, "p.csv", "periods", "--grid", "5", "--p-min", "0.1",
                     "--p-max", "0.8")
    assert code == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 5 and float(rows[0]["p"]) == 0.1
    assert all(float(r["T_v"]) > float(r["T_u"]) for r in rows)
    assert "T_v > T_u on all rows: True" in capsys.readouterr().err


def test_classify_json(tmp_path):
    code, out = _run(tmp_path, "c.json", "classify", "--p", str(SQRT38))
    assert code == EXIT_OK
    d = json.loads(out.read_text())
    assert d["kind"] == "Periodic" and d["extremal_candidate"] is True
    assert d["shape"] == "DegenerateHyperbola"


def test_scan_small_range(tmp_path, capsys):
    code, out = _run(tmp_path, "s.json", "scan", "--denom-cap", "10")
    assert code == EXIT_OK
    d = json.loads(out.read_text())
    # 3/2 has two roots, plus the solution from sqrt(3/8)
    assert len(d) == 3
    assert [x["extremal_candidate"] for x in d].count(True) == 1
    assert "the two-zero condition holds for 1" in capsys.readouterr().err


def test_scan_empty_range(tmp_path):
    code, out = _run(tmp_path, "e.json", "scan", "--r-min", "1.7", "--r-max", "1.8")
    assert code == EXIT_OK
    assert json.loads(out.read_text()) == []


def test_verify(tmp_path):
    code, out = _run(tmp_path, "v.json", "verify", "--n", "512", "--threads", "2")
    assert code == EXIT_OK
    d = json.loads(out.read_text())
    assert d["product_over_pi"] == pytest.approx(13.365, abs=1e-3)
    assert d["multiplicity"] == 5
    assert d["closed_form_agreement"] < 1e-8


@pytest.mark.parametrize("argv", [
    ["integrate", "--p", "1.5"], ["integrate", "--p", "abc"], ["integrate", "--tol", "-1"],
    ["verify", "--n", "15"], ["nonsense"], ["periods", "--p-min", "0.5", "--p-max", "0.4"],
])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as ei:
        main(argv)
    assert ei.value.code == EXIT_USAGE


def test_unknown_config_key_exit_2(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("colour = blue\n")
    with pytest.raises(SystemExit) as ei:
        main(["classify", "--config", str(path)])
    assert ei.value.code == EXIT_USAGE


def test_divergence_is_numerical_failure(tmp_path, capsys):
    # the period table is undefined at p = sqrt(3)/2
    code, _ = _run(tmp_path, "x.csv", "periods", "--grid", "2", "--p-min", "0.5",
                   "--p-max", str(3 ** 0.5 / 2))
    assert code == EXIT_NUMERICAL
    assert "kext periods: numerical failure" in capsys.readouterr().err


@pytest.mark.parametrize("exc, code", [
    ("IntegrationError", EXIT_NUMERICAL), ("DivergenceError", EXIT_NUMERICAL),
    ("PreconditionError", EXIT_USAGE), ("DomainError", EXIT_USAGE),
])
def test_error_classes_map_to_exit_codes(monkeypatch, exc, code):
    from kext import cli, errors

    def boom(cfg):
        cls = getattr(errors, exc)
        raise cls("failed", y=1.0) if cls is errors.IntegrationError else cls("failed")

    monkeypatch.setitem(cli.COMMANDS, "integrate", (boom, "", ("p",)))
    assert main(["integrate"]) == code


@pytest.mark.parametrize("argv", [
    ["periods", "--grid", "40", "--threads", "4"],
    ["integrate", "--p", "0.7", "--y-end", "10"],
    ["scan", "--denom-cap", "12", "--threads", "3"],
])
def test_outputs_are_byte_identical(tmp_path, argv):
    _, a = _run(tmp_path, "a", *argv)
    _, b = _run(tmp_path, "b", *argv)
    assert a.read_bytes() == b.read_bytes()


def test_threads_do_not_change_output(tmp_path):
    _, a = _run(tmp_path, "a", "periods", "--grid", "40", "--threads", "1")
    _, b = _run(tmp_path, "b", "periods", "--grid", "40", "--threads", "4")
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "kext", "--help"], capture_output=True,
                         text=True, check=True)
    for cmd in ("integrate", "periods", "scan", "classify", "verify"):
        assert cmd in out.stdout
