import csv
import io
import json

import pytest

from distill_lab import report
from distill_lab.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_VERIFY, main
from distill_lab.oracles import PREPARATION_CIRCUIT
from distill_lab.report import RunConfig, TableArtifact, grid_points

COMMANDS = sorted(report.COMMANDS)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def rows_of(text):
    return list(csv.reader(io.StringIO(text)))


@pytest.mark.parametrize("command", COMMANDS)
def test_outputs_are_byte_identical(command, tmp_path):
    a, b = tmp_path / "a.out", tmp_path / "b.out"
    assert main([command, "--out", str(a)]) == EXIT_OK
    assert main([command, "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("command", COMMANDS)
def test_csv_and_json_carry_the_same_numbers(command, capsys):
    _, csv_text, _ = run(capsys, command)
    _, json_text, _ = run(capsys, command, "--format", "json")
    doc = json.loads(json_text)
    table = rows_of(csv_text)
    assert table[0] == doc["columns"]
    assert len(table) - 1 == len(doc["rows"]) == len(doc["raw"])
    for csv_row, json_row in zip(table[1:], doc["rows"]):
        for cell, value in zip(csv_row, json_row):
            if isinstance(value, bool):
                assert cell == str(value).lower()
            elif isinstance(value, (int, float)):
                assert float(cell) == value
            elif value is None:
                assert cell == ""
            else:
                assert cell == value


def test_json_raw_keeps_full_precision(capsys):
    _, text, _ = run(capsys, "curves", "--format", "json")
    doc = json.loads(text)
    col = doc["columns"].index("f_out_edc")
    f08 = [r for r in doc["raw"] if r[0] == 0.8][0]
    assert f08[col] == pytest.approx(0.9039641240428142, abs=1e-15)
    assert doc["meta"]["command"] == "curves"
    assert doc["meta"]["seed"] == 20240601


def test_curves_default_grid(capsys):
    code, out, _ = run(capsys, "curves")
    assert code == EXIT_OK
    table = rows_of(out)
    body = [r for r in table[1:] if r[-1] == "computed"]
    assert len(body) == 101
    footer = table[-2:]
    assert float(footer[0][0]) == pytest.approx(0.6323, abs=5e-4)
    assert float(footer[1][0]) == pytest.approx(0.6675, abs=5e-4)
    top = dict(zip(table[0], body[-1]))
    assert top["f_in"] == "1"
    assert all(float(top[c]) == 1.0 for c in ("f_out_edc", "f_out_bbpssw"))
    assert float(top["y_edc"]) == float(top["y_bbpssw"]) == 0.5
    f08 = dict(zip(table[0], [r for r in body if r[0] == "0.8"][0]))
    assert float(f08["y_bbpssw"]) == pytest.approx(0.2956, abs=1e-4)
    assert float(f08["y_edc"]) == pytest.approx(0.2335, abs=1e-4)


def test_iterate_orderings(capsys):
    _, out, _ = run(capsys, "iterate", "--f0", "0.65", "--f0", "0.70", "--f0", "1.0")
    table = rows_of(out)
    rows = {(r[0], r[1]): r for r in table[1:]}
    f_edc, f_bb = (float(x) for x in rows[("0.65", "1")][2:4])
    assert f_bb == pytest.approx(0.6791, abs=1e-4) and f_edc == pytest.approx(0.6661, abs=1e-4)
    assert f_bb > f_edc
    f_edc, f_bb = (float(x) for x in rows[("0.7", "1")][2:4])
    assert f_edc == pytest.approx(0.7581, abs=1e-4) and f_bb == pytest.approx(0.7353, abs=1e-4)
    assert all(float(rows[("1", str(r))][2]) == 1.0 for r in range(6))


def test_tables(capsys):
    _, out, _ = run(capsys, "tables")
    table = rows_of(out)
    head = table[0]
    rows = [dict(zip(head, r)) for r in table[1:]]
    edc = [float(r["value"]) for r in rows if r["table"] == "table2" and r["protocol"] == "EDC"]
    assert edc == pytest.approx([0.4669, 0.5572, 0.6731], abs=1e-4)
    flagged = [r for r in rows if r["table"] == "table2" and r["f_in"] == "0.8" and r["protocol"] == "BBPSSW"][0]
    assert float(flagged["value"]) == pytest.approx(0.03714, abs=1e-5)
    assert "published 0.0401 differs" in flagged["provenance"]
    t3 = {(r["f_in"], r["k"]): float(r["value"]) for r in rows if r["table"] == "table3"}
    assert t3[("0.85", "3")] == pytest.approx(0.01088, abs=1e-12)
    assert len(t3) == 9
    assert all(r["provenance"] for r in rows)


def test_tables_experimental_rows_are_labelled(capsys):
    _, out, _ = run(capsys, "tables", "--experimental")
    model = [r for r in rows_of(out) if r[0] == "table3-model"]
    assert len(model) == 9
    assert all(r[-1].startswith("experimental") for r in model)


def test_tables_row_level_error(capsys):
    # EDC cannot climb from below its purification threshold
    code, out, _ = run(capsys, "tables", "--scenario", "0.6,0.9")
    assert code == EXIT_OK
    errors = [r for r in rows_of(out) if r[-1].startswith("error")]
    assert {r[3] for r in errors} >= {"EDC"}


def test_decay_markers(capsys):
    _, out, _ = run(capsys, "decay")
    table = rows_of(out)
    rows = [dict(zip(table[0], r)) for r in table[1:]]
    marker = {(r["f_in"], r["series"]): float(r["t"]) for r in rows if r["series"].startswith("marker")}
    assert marker[("0.8", "marker:T_W")] == pytest.approx(0.0056, abs=1e-4)
    assert marker[("0.9", "marker:t_1")] == pytest.approx(0.0362, abs=1e-4)
    first = [r for r in rows if r["f_in"] == "0.85" and r["series"] == "physical"][0]
    assert (float(first["t"]), float(first["fidelity"])) == (0.0, pytest.approx(0.913403, abs=1e-6))
    logical = [float(r["fidelity"]) for r in rows if r["f_in"] == "0.8" and r["series"] == "logical"]
    assert logical[0] == 1.0 and all(b < a for a, b in zip(logical, logical[1:]))


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == EXIT_OK
    table = rows_of(out)
    assert len(table) == 8
    assert all(r[1] == "true" for r in table[1:])


def test_verify_flags_a_wrong_circuit(tmp_path, capsys):
    bad = tmp_path / "bell_only.txt"
    bad.write_text("H 0\nCNOT 0 1\n")
    code, out, _ = run(capsys, "verify", "--circuit", str(bad))
    assert code == EXIT_VERIFY
    row = [r for r in rows_of(out) if r[0] == "circuit_vs_logical_state"][0]
    assert row[1] == "false"


def test_verify_reports_impossible_branch(tmp_path, capsys):
    # the gates leave q1 in |1>, so post-selecting 0 cannot happen
    circuit = tmp_path / "impossible.txt"
    circuit.write_text("H 0\nCNOT 0 1\nH 1\nCNOT 1 0\nH 1\nCNOT 0 1\nM 1\n")
    code, out, _ = run(capsys, "verify", "--circuit", str(circuit))
    assert code == EXIT_VERIFY
    row = [r for r in rows_of(out) if r[0] == "circuit_vs_logical_state"][0]
    assert row[1] == "false" and "probability" in row[-1]


def test_verify_accepts_written_preparation_circuit(tmp_path, capsys):
    circuit = tmp_path / "prep.txt"
    circuit.write_text(PREPARATION_CIRCUIT)
    code, _, _ = run(capsys, "verify", "--circuit", str(circuit))
    assert code == EXIT_OK


@pytest.mark.parametrize(
    "argv",
    [
        ["curves", "--grid", "1.0,0.5,0.01"],
        ["curves", "--grid", "0.5,1.0"],
        ["curves", "--grid", "0.5,1.0,0"],
        ["tables", "--scenario", "0.9,0.8"],
        ["tables", "--scenario", "abc"],
        ["iterate", "--rounds", "-1"],
        ["iterate", "--f0", "1.5"],
        ["tables", "--tcc", "-0.1"],
    ],
)
def test_invalid_config_exit_code(argv, capsys):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_CONFIG
    assert "invalid configuration" in err


def test_bad_format_is_rejected_by_parser(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["curves", "--format", "xml"])
    assert exc.value.code == 2


def test_unwritable_output(tmp_path, capsys):
    target = tmp_path / "missing" / "out.csv"
    code, _, err = run(capsys, "curves", "--out", str(target))
    assert code == EXIT_IO
    assert str(target) in err


def test_missing_inputs_are_io_errors(tmp_path, capsys):
    code, _, err = run(capsys, "verify", "--circuit", str(tmp_path / "nope.txt"))
    assert code == EXIT_IO and "nope.txt" in err
    code, _, err = run(capsys, "curves", "--config", str(tmp_path / "nope.toml"))
    assert code == EXIT_IO and "nope.toml" in err


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text('grid = "0.6,0.7,0.05"\nformat = "json"\nscenario = [[0.85, 0.9]]\nrounds = 2\n')
    _, out, _ = run(capsys, "curves", "--config", str(cfg))
    doc = json.loads(out)
    assert [r[0] for r in doc["rows"][:3]] == [0.6, 0.65, 0.7]
    _, out, _ = run(capsys, "curves", "--config", str(cfg), "--format", "csv", "--grid", "0.9,1.0,0.05")
    assert [r[0] for r in rows_of(out)[1:4]] == ["0.9", "0.95", "1"]
    _, out, _ = run(capsys, "tables", "--config", str(cfg), "--format", "csv")
    assert {r[1] for r in rows_of(out)[1:]} == {"0.85"}


def test_config_file_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("colour = 3\n")
    assert run(capsys, "curves", "--config", str(cfg))[0] == EXIT_CONFIG
    cfg.write_text("grid = [0.5, 1.0\n")
    assert run(capsys, "curves", "--config", str(cfg))[0] == EXIT_CONFIG


def test_timing_flags_change_thresholds_only_through_t_op(capsys):
    _, base, _ = run(capsys, "tables")
    _, slow, _ = run(capsys, "tables", "--tm", "2e-3")
    assert base != slow


def test_table_artifact_invariants():
    t = TableArtifact("x", ["a", "b"])
    with pytest.raises(ValueError):
        t.add(1)
    t.add(1.23456789, "q,\"r\"")
    assert t.to_csv() == 'a,b\r\n1.23457,"q,""r"""\r\n'
    assert t.column("a") == [1.23456789]


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(fmt="xml")
    with pytest.raises(ValueError):
        RunConfig(grid=(0.5, 1.0, -0.1))
    assert len(grid_points(0.5, 1.0, 0.005)) == 101
    assert grid_points(0.5, 1.0, 0.005)[-1] == 1.0
