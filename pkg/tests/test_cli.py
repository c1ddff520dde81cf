import json
import subprocess
import sys
from pathlib import Path

import pytest

from fkppg.cli import RUN_FIELDS, main

MODELS = Path(__file__).resolve().parent.parent / "models"
RW1 = str(MODELS / "rw1.ppg")
DMM = str(MODELS / "dmm.ppg")
FIXTURES = MODELS / "fixtures"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_ok(capsys):
    code, out, _ = run(capsys, "validate", "--model", RW1)
    rep = json.loads(out)
    assert code == 0 and rep["checkpoints"] == [0, 1, 2, 3] and rep["schema_version"] == 1


@pytest.mark.parametrize(
    "fixture, name",
    [
        ("overlapping_guard.ppg", "PartitionViolation"),
        ("score_out_of_range.ppg", "ScoreOutOfRange"),
        ("missing_nil.ppg", "MissingNil"),
    ],
)
def test_validate_fixtures(capsys, fixture, name):
    code, out, err = run(capsys, "validate", "--model", str(FIXTURES / fixture))
    assert code == 2 and out == "" and name in err


def test_overlap_witness(capsys):
    _, _, err = run(capsys, "validate", "--model", str(FIXTURES / "overlapping_guard.ppg"))
    assert "2 enabled guards" in err and "store [0.0," in err


def test_missing_file(capsys):
    code, _, err = run(capsys, "validate", "--model", str(MODELS / "nope.ppg"))
    assert code == 3 and "FileNotFoundError" in err


def test_oracle_rw1(capsys):
    code, out, _ = run(capsys, "oracle", "--model", RW1, "--t", "4", "--query", "c", "--bound", "1")
    rep = json.loads(out)
    assert code == 0
    assert rep["beta_lower"] == rep["beta_upper"] == 0.3333333333333333 and rep["alpha"] == 1.0
    assert rep["filtering"] == [
        {"state": [0.0, 0.0], "node": 2, "mass": 0.6666666666666666},
        {"state": [1.0, 1.0], "node": 2, "mass": 0.3333333333333333},
    ]
    code, again, _ = run(capsys, "oracle", "--model", RW1, "--t", "4", "--query", "c", "--bound", "1")
    assert again == out


def test_oracle_uses_sidecar_defaults(capsys):
    code, out, _ = run(capsys, "oracle", "--model", RW1)
    rep = json.loads(out)
    assert code == 0 and (rep["query"], rep["M"], rep["t"]) == ("c", 1.0, 4)


def test_oracle_exit_codes(capsys):
    assert run(capsys, "oracle", "--model", DMM)[0] == 4
    assert run(capsys, "oracle", "--model", RW1, "--t", "10", "--cap", "1")[0] == 5


def test_infinite_bound_is_serialised(capsys):
    code, out, _ = run(capsys, "oracle", "--model", RW1, "--t", "3", "--bound", "inf")
    rep = json.loads(out)
    assert code == 0 and rep["M"] == "inf" and rep["beta_upper"] == "inf"


def test_run_fields_and_engine_equivalence(capsys):
    args = ["run", "--model", RW1, "--N", "20000", "--seed", "1"]
    code, out, _ = run(capsys, *args, "--engine", "vpf")
    a = json.loads(out)
    assert code == 0 and list(a) == ["schema_version", *RUN_FIELDS]
    assert a["collapsed_at_step"] is None and 1 <= a["ess"] <= 20000
    _, out, _ = run(capsys, *args, "--engine", "scalar")
    b = json.loads(out)
    for rec in (a, b):
        rec.pop("wall_time_ms")
        rec.pop("engine")
    assert a == b


def test_run_deterministic_and_seed_env(capsys, monkeypatch):
    monkeypatch.setenv("FKPPG_SEED", "17")
    outs = []
    for threads in ("1", "4"):
        _, out, _ = run(capsys, "run", "--model", RW1, "--N", "5000", "--threads", threads)
        rec = json.loads(out)
        rec.pop("wall_time_ms")
        outs.append(rec)
    assert outs[0] == outs[1] and outs[0]["seed"] == 17


def test_run_csv(capsys):
    code, out, _ = run(capsys, "run", "--model", RW1, "--N", "100", "--format", "csv")
    header, row = out.strip().split("\n")
    assert code == 0 and header.split(",") == ["schema_version", *RUN_FIELDS]
    assert row.endswith(",")  # collapsed_at_step is empty


def test_run_collapse(capsys, tmp_path):
    model = tmp_path / "dead.ppg"
    model.write_text(
        "vars x\nnode 0\nnode 1 score x == 5\nnil 2\n"
        "trans 0 -> 1 when 1 == 1 do { x ~ bernoulli(0.5); }\n"
        "trans 1 -> 2 when 1 == 1 do { }\ninit 0\n"
    )
    code, out, err = run(capsys, "run", "--model", str(model), "--query", "x", "--t", "4", "--N", "50")
    assert code == 6 and out == ""
    partial = json.loads(err.splitlines()[0])
    assert partial["collapsed_at_step"] == 2 and partial["estimate"] is None


def test_run_dmm_smoke(capsys):
    code, out, _ = run(capsys, "run", "--model", DMM, "--t", "300", "--N", "2000", "--seed", "3")
    rep = json.loads(out)
    assert code == 0 and 0 < rep["p_term"] <= 1 and 1 <= rep["ess"] <= 2000


def test_bad_query_is_a_syntax_error(capsys):
    code, _, err = run(capsys, "run", "--model", RW1, "--query", "zz + 1", "--N", "10")
    assert code == 2 and "UndeclaredVariable" in err


def test_help_lists_flags():
    out = subprocess.run(
        [sys.executable, "-m", "fkppg", "run", "--help"], capture_output=True, text=True, check=True
    ).stdout
    for flag in ("--model", "--query", "--bound", "--t", "--N", "--seed", "--engine",
                 "--resampler", "--format", "--threads"):
        assert flag in out
    assert "FKPPG_SEED" in out
