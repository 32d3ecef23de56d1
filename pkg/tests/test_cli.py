import csv
import io
import json
import math
import os
import subprocess
import sys

import pytest

from skewspectra.cli import main

MODELS = os.path.join(os.path.dirname(__file__), os.pardir, "models")
WORKED = os.path.join(MODELS, "worked_periodic.json")
GOLDEN_MODEL = os.path.join(MODELS, "golden_nonperiodic.json")
FG = os.path.join(MODELS, "fg_product.json")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# --- classical ---------------------------------------------------------------------------------

def test_classical_csv(capsys):
    code, out, _ = run(capsys, "classical", "--max-period", "4")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    by_word = {r["word"]: r for r in rows}
    assert float(by_word["1"]["markov_value"]) == pytest.approx(math.sqrt(5), abs=1e-15)
    assert by_word["1"]["markov_number"] == "1"
    assert by_word["2"]["markov_number"] == "2"
    assert by_word["12"]["markov_number"] == ""          # sqrt(12) > 3
    assert by_word["1122"]["markov_number"] == "5"


def test_classical_json_file(tmp_path, capsys):
    path = tmp_path / "c.json"
    assert run(capsys, "classical", "--max-period", "3", "--out", str(path))[0] == 0
    data = json.loads(path.read_text())
    assert {"word", "markov_value", "markov_number"} <= set(data[0])


def test_classical_bad_digits(capsys):
    code, _, err = run(capsys, "classical", "--digits", "1,x")
    assert code == 2
    assert json.loads(err)["error"] == "invalid_input"


def test_classical_thread_count_does_not_change_output(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "classical", "--max-period", "12", "--threads", "1", "--out", str(a))
    run(capsys, "classical", "--max-period", "12", "--threads", "3", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


# --- skew-markov -------------------------------------------------------------------------------

def test_skew_markov_json(capsys):
    code, out, _ = run(capsys, "skew-markov", "--model", WORKED, "--t", "0.25")
    assert code == 0
    rec = json.loads(out)
    assert rec["lagrange_value"] <= rec["markov_value"] + rec["markov_error"] + rec["lagrange_error"]
    # a finite block of ones stays strictly below the all-ones value 2.2
    assert 1.0 < rec["markov_value"] < 2.2


def test_skew_markov_sequence_argument(capsys):
    seq = json.dumps({"left": [1], "core": [], "right": [1], "offset": 0})
    code, out, _ = run(capsys, "skew-markov", "--model", WORKED, "--sequence", seq)
    assert code == 0
    assert json.loads(out)["markov_value"] == pytest.approx(2.2, abs=1e-12)


def test_skew_markov_bad_sequence(capsys):
    code, _, err = run(capsys, "skew-markov", "--model", WORKED, "--sequence", "{oops")
    assert code == 2 and json.loads(err)["type"] == "DomainError"


def test_skew_markov_needs_a_sequence(capsys):
    assert run(capsys, "skew-markov", "--model", GOLDEN_MODEL)[0] == 2


def test_repeated_runs_are_byte_identical(capsys):
    a = run(capsys, "skew-markov", "--model", WORKED, "--t", "0.4")[1]
    b = run(capsys, "skew-markov", "--model", WORKED, "--t", "0.4")[1]
    assert a == b


# --- models and errors ----------------------------------------------------------------------------

def test_missing_model_file(capsys):
    code, _, err = run(capsys, "skew-markov", "--model", "/nonexistent/model.json")
    assert code == 2


def test_malformed_model(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"alphabet_size": 2, "matrix": ["11", "11"], "embedding": {"base": 2}}))
    code, _, err = run(capsys, "skew-markov", "--model", str(bad))
    assert code == 2
    assert set(json.loads(err)) == {"error", "type", "message"}


def test_not_json_model(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("not json")
    assert run(capsys, "skew-markov", "--model", str(bad))[0] == 2


def test_bad_thread_env(monkeypatch, capsys):
    monkeypatch.setenv("SPECTRA_THREADS", "many")
    assert run(capsys, "classical", "--max-period", "2")[0] == 2


def test_construction_failure_exit_code(capsys):
    # a tolerance this small cannot be met within the steering budget
    code, _, err = run(capsys, "interval", "--model", WORKED, "--case", "periodic", "--tol", "1e-9",
                       "--targets", "5")
    assert code == 3
    assert json.loads(err)["error"] == "construction_failed"


# --- interval, witness, profile -------------------------------------------------------------------

def test_interval_periodic(tmp_path, capsys):
    path = tmp_path / "cert.json"
    code, _, _ = run(capsys, "interval", "--model", WORKED, "--case", "periodic", "--targets", "40",
                     "--out", str(path))
    assert code == 0
    rec = json.loads(path.read_text())
    assert rec["construction"] == "rphi1" and rec["length"] > 1e-3
    assert rec["fraction_validated"] >= 0.99 and len(rec["grid"]) == 40


def test_interval_nonperiodic_csv(tmp_path, capsys):
    path = tmp_path / "cert.csv"
    code, _, _ = run(capsys, "interval", "--model", GOLDEN_MODEL, "--case", "nonperiodic", "--targets", "20",
                     "--out", str(path))
    assert code == 0
    row = next(csv.DictReader(io.StringIO(path.read_text())))
    assert row["construction"] == "rphi2" and float(row["fraction_validated"]) >= 0.99


def test_interval_missing_parameters(capsys):
    code, _, err = run(capsys, "interval", "--model", FG, "--case", "periodic")
    assert code == 2 and "missing construction parameter" in json.loads(err)["message"]


def test_witness_separation(capsys):
    code, out, _ = run(capsys, "witness-separation", "--horizon", "300", "--max-period", "6")
    assert code == 0
    rec = json.loads(out)
    assert rec["agree"] and rec["separated"]


def test_profile_threads_and_formats(tmp_path, capsys):
    a, b, j = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "p.json"
    args = ["profile-L", "--model", WORKED, "--t-min", "0.1", "--t-max", "2.3", "--points", "8"]
    run(capsys, *args, "--threads", "1", "--out", str(a))
    run(capsys, *args, "--threads", "3", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()
    run(capsys, *args, "--out", str(j))
    rec = json.loads(j.read_text())
    assert len(rec["rows"]) == 8 and rec["window"] == 4


def test_profile_classifies_fg_levels(capsys):
    code, out, _ = run(capsys, "profile-L", "--model", FG, "--t-min", "-0.1", "--t-max", "0.1", "--points", "2")
    assert code == 0
    labels = [r["classification"] for r in csv.DictReader(io.StringIO(out))]
    assert labels == ["empty", "interval"]


def test_profile_rejects_single_point(capsys):
    assert run(capsys, "profile-L", "--model", WORKED, "--t-min", "0", "--t-max", "1", "--points", "1")[0] == 2


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "skewspectra.cli", "classical", "--max-period", "2"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("word,markov_value,markov_number")
