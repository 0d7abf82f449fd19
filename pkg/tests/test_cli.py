import copy
import json
from pathlib import Path

import pytest

from golden import HEAT_ADJOINT
from lieopt.cli import main
from lieopt.exppoly import parse_exppoly
from lieopt.fixtures import DOCUMENTS

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("argv, name", [
    (["tables", "--algebra", "heat6"], "tables_heat6.txt"),
    (["tables", "--algebra", "ns4"], "tables_ns4.txt"),
    (["adjoint-matrix", "--algebra", "ns4"], "adjoint_ns4.txt"),
])
def test_text_output_is_byte_stable(capsys, argv, name):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out == (DATA / name).read_text(encoding="utf-8")


def test_tables_json(capsys):
    code, out, _ = run(capsys, "tables", "--algebra", "heat6", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["basis"] == ["v1", "v2", "v3", "v4", "v5", "v6"]
    for i, row in enumerate(HEAT_ADJOINT):
        for j, cell in enumerate(row):
            assert parse_exppoly(doc["adjoint"][i][j]) == parse_exppoly(cell)


def test_adjoint_matrix_order_option(capsys):
    code, out, _ = run(capsys, "adjoint-matrix", "--algebra", "ns4", "--order", "4,3,2,1", "--format", "json")
    assert code == 0 and json.loads(out)["order"] == [4, 3, 2, 1]
    code, _, err = run(capsys, "adjoint-matrix", "--algebra", "ns4", "--order", "1,1,2,3")
    assert code == 2 and "permutation" in err


def test_determined_and_pde_counts(capsys):
    _, out, _ = run(capsys, "determined-eqs", "--algebra", "heat6")
    assert len(out.strip().splitlines()) == 6
    _, out, _ = run(capsys, "invariant-pdes", "--algebra", "ns4", "--mode", "nonzero", "--format", "json")
    doc = json.loads(out)
    assert doc["count"] == 6 and len(doc["fields"]) == 6


def test_check_invariant_and_discovery(capsys):
    code, _, _ = run(capsys, "check-invariant", "--algebra", "ns4", "--mode", "nonzero", "--case", "3",
                     "--phi", "(b1*b4 - b2*b3)/b1^2", "--samples", "20")
    assert code == 0
    code, _, _ = run(capsys, "check-invariant", "--algebra", "ns4", "--mode", "nonzero", "--case", "3",
                     "--phi", "b4", "--samples", "5")
    assert code == 1
    code, out, _ = run(capsys, "discover-invariants", "--algebra", "ns4", "--mode", "nonzero", "--case", "3",
                       "--format", "json")
    assert code == 0 and "(b1*b4 - b2*b3)/b1^2" in json.loads(out)["invariants"]


def test_check_equivalent_exit_codes(capsys):
    code, out, _ = run(capsys, "check-equivalent", "--algebra", "ns4", "--source", "v3", "v4",
                       "--target", "v3", "2*v4", "--format", "json")
    assert code == 0 and json.loads(out)["verdict"] == "Equivalent"
    code, _, _ = run(capsys, "check-equivalent", "--algebra", "ns4", "--source", "v1", "v4",
                     "--target", "v2", "v4", "--starts", "8")
    assert code == 1
    code, _, err = run(capsys, "check-equivalent", "--algebra", "ns4", "--source", "v1", "v4",
                       "--target", "v2", "v1")
    assert code == 2 and "lambda" in err


def test_runs_are_deterministic(capsys):
    argv = ["sample-case", "--algebra", "heat6", "--case", "iia", "--count", "4", "--seed", "5"]
    first = run(capsys, *argv)
    assert first[0] == 0 and first == run(capsys, *argv)


def test_residual_commands(capsys):
    assert run(capsys, "ns-residual", "--solution", "ns_radial", "--gamma", "1/2")[0] == 0
    assert run(capsys, "ode-residual", "--ode", "red1", "--branch", "-1")[0] == 1
    # with step 0.3 the order-6 stencils for the 4th derivative reach the origin
    assert run(capsys, "ns-residual", "--solution", "ns_radial", "--step", "0.3")[0] == 2


def test_corrupted_algebra_file_exits_2(capsys, tmp_path):
    doc = copy.deepcopy(DOCUMENTS["heat6"])
    doc["brackets"][0]["coeffs"]["1"] = "2"
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    code, _, err = run(capsys, "tables", "--algebra", str(path))
    assert code == 2 and "Jacobi" in err


@pytest.mark.parametrize("argv", [["no-such-command"], ["tables", "--algebra", "missing"],
                                  ["check-invariant", "--algebra", "ns4", "--phi", "a1 +"],
                                  ["sample-case", "--algebra", "ns4", "--case", "99"]])
def test_bad_input_exits_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2
