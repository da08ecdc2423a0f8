import json

import numpy as np
import pytest

from noncp.operators import ContractViolation
from noncp.choi import KrausSet, kraus_from_choi
from noncp.dynamics import toy_choi
from noncp.fano import product_assignment
from noncp import serialize


def test_fmt_roundtrips_doubles(rng):
    # 17 significant digits are enough to reproduce any double exactly
    for _ in range(200):
        x = float(rng.normal() * 10.0 ** rng.integers(-20, 20))
        assert float(serialize.fmt(x)) == x
    assert serialize.fmt(0.1) == "0.10000000000000001"
    assert serialize.fmt(2.0) == "2"


def test_matrix_roundtrip_exact(rng):
    for _ in range(20):
        M = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
        back = serialize.matrix_from_json(
            json.loads(json.dumps(serialize.matrix_to_json(M))))
        assert back.shape == (3, 2)
        assert np.array_equal(back, M)


def test_matrix_rejects_non_2d():
    with pytest.raises(ContractViolation):
        serialize.matrix_to_json(np.zeros(4))


@pytest.mark.parametrize("obj", [
    None,
    [],
    {"entries": [[0.0, 0.0]]},
    {"dims": [1], "entries": [[0.0, 0.0]]},
    {"dims": [1, 0], "entries": []},
    {"dims": [2, 2], "entries": [[0.0, 0.0]]},
    {"dims": [1, 1], "entries": [[0.0]]},
    {"dims": [1, 1], "entries": [["x", 0.0]]},
    {"dims": [1, 1], "entries": [[float("nan"), 0.0]]},
])
def test_matrix_rejects_malformed(obj):
    with pytest.raises(ContractViolation):
        serialize.matrix_from_json(obj)


def test_choi_roundtrip():
    D = toy_choi(0.2, 0.7)
    obj = json.loads(json.dumps(serialize.choi_to_json(D)))
    back = serialize.choi_from_json(obj)
    assert back.d_in == D.d_in and back.d_out == D.d_out
    assert np.array_equal(back.D, D.D)


def test_choi_needs_dims():
    obj = serialize.choi_to_json(toy_choi(0.1, 0.3))
    del obj["d_in"]
    with pytest.raises(ContractViolation):
        serialize.choi_from_json(obj)


def test_kraus_json_shape():
    form = kraus_from_choi(toy_choi(0.0, 0.4))
    obj = serialize.kraus_to_json(form)
    assert len(obj["weights"]) == len(obj["operators"])
    rebuilt = KrausSet(
        weights=np.array(obj["weights"]),
        operators=[serialize.matrix_from_json(m) for m in obj["operators"]])
    for A, B in zip(rebuilt.operators, form.operators):
        assert np.array_equal(A, B)


def test_assignment_roundtrip(rng):
    spec = product_assignment(np.array([[0.7, 0.1 + 0.2j], [0.1 - 0.2j, 0.3]]))
    back = serialize.assignment_from_json(
        json.loads(json.dumps(serialize.assignment_to_json(spec))))
    assert np.array_equal(back.b, spec.b)
    assert np.array_equal(back.B, spec.B)
    assert np.array_equal(back.g, spec.g)
    assert np.array_equal(back.G, spec.G)


def test_assignment_rejects_missing_block():
    obj = serialize.assignment_to_json(product_assignment(np.eye(2) / 2.0))
    del obj["G"]
    with pytest.raises(ContractViolation, match="G"):
        serialize.assignment_from_json(obj)


def test_load_json_rejects_garbage(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="ascii")
    with pytest.raises(ContractViolation, match="invalid JSON"):
        serialize.load_json(str(path))


def test_dump_json_file_and_stdout(tmp_path, capsys):
    obj = {"b": 2, "a": [1.5, None]}
    path = tmp_path / "out.json"
    serialize.dump_json(obj, str(path))
    assert json.loads(path.read_text(encoding="ascii")) == obj
    serialize.dump_json(obj)
    assert json.loads(capsys.readouterr().out) == obj


def test_write_csv_format(tmp_path, capsys):
    rows = [(0.1, -2.0), (1e-17, 3.0)]
    path = tmp_path / "out.csv"
    serialize.write_csv(["x", "y"], rows, str(path))
    lines = path.read_text(encoding="ascii").splitlines()
    assert lines[0] == "x,y"
    assert lines[1] == "0.10000000000000001,-2"
    parsed = [float(v) for v in lines[2].split(",")]
    assert parsed == [1e-17, 3.0]
    assert "," not in lines[1].replace(",", "", 1)  # '.' decimal, no locale
    serialize.write_csv(["x", "y"], rows)
    assert capsys.readouterr().out.splitlines()[0] == "x,y"
