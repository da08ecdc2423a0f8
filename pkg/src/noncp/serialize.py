"""JSON and CSV interchange for operators, dynamical matrices, and
assignment coefficients.

Matrix files: {"dims": [rows, cols], "entries": [[re, im], ...]} with
entries row-major. Dynamical-matrix files carry the same keys plus
"d_in" and "d_out". Assignment files hold the real coefficient blocks
b, B, g, G as nested lists. Floats are printed with 17 significant
digits so every double round-trips; the decimal separator is always
'.' regardless of locale.
"""

import json
import sys

import numpy as np

from .operators import ContractViolation
from .choi import ChoiMatrix, KrausSet
from .fano import AssignmentSpec


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def matrix_to_json(M: np.ndarray) -> dict:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise ContractViolation(f"matrix files hold 2-d arrays, got shape {M.shape}")
    return {
        "dims": [int(M.shape[0]), int(M.shape[1])],
        "entries": [[float(z.real), float(z.imag)] for z in M.reshape(-1)],
    }


def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, dict):
        raise ContractViolation("matrix JSON must be an object")
    dims = obj.get("dims")
    entries = obj.get("entries")
    if (not isinstance(dims, list) or len(dims) != 2
            or not all(isinstance(d, int) and d > 0 for d in dims)):
        raise ContractViolation(f"bad dims field: {dims!r}")
    if not isinstance(entries, list) or len(entries) != dims[0] * dims[1]:
        raise ContractViolation(
            f"entries length {len(entries) if isinstance(entries, list) else '?'} "
            f"does not match dims {dims}")
    flat = np.empty(dims[0] * dims[1], dtype=complex)
    for k, pair in enumerate(entries):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(v, (int, float)) for v in pair)):
            raise ContractViolation(f"entry {k} is not a [re, im] pair: {pair!r}")
        flat[k] = complex(pair[0], pair[1])
    if not np.isfinite(flat.view(float)).all():
        raise ContractViolation("matrix entries must be finite")
    return flat.reshape(dims[0], dims[1])


def choi_to_json(D: ChoiMatrix) -> dict:
    out = matrix_to_json(D.D)
    out["d_in"] = int(D.d_in)
    out["d_out"] = int(D.d_out)
    return out


def choi_from_json(obj) -> ChoiMatrix:
    M = matrix_from_json(obj)
    d_in, d_out = obj.get("d_in"), obj.get("d_out")
    if not (isinstance(d_in, int) and isinstance(d_out, int)):
        raise ContractViolation("dynamical-matrix JSON needs integer d_in and d_out")
    return ChoiMatrix(d_in=d_in, d_out=d_out, D=M)


def kraus_to_json(K: KrausSet) -> dict:
    return {
        "weights": [float(w) for w in K.weights],
        "operators": [matrix_to_json(M) for M in K.operators],
    }


def assignment_to_json(spec: AssignmentSpec) -> dict:
    return {
        "b": spec.b.tolist(),
        "B": spec.B.tolist(),
        "g": spec.g.tolist(),
        "G": spec.G.tolist(),
    }


def assignment_from_json(obj) -> AssignmentSpec:
    if not isinstance(obj, dict):
        raise ContractViolation("assignment JSON must be an object")
    blocks = {}
    for key in ("b", "B", "g", "G"):
        if key not in obj:
            raise ContractViolation(f"assignment JSON is missing field {key!r}")
        try:
            blocks[key] = np.asarray(obj[key], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ContractViolation(f"field {key!r} is not numeric: {exc}")
    return AssignmentSpec(b=blocks["b"], B=blocks["B"],
                          g=blocks["g"], G=blocks["G"])


def load_json(path):
    with open(path, "r", encoding="ascii") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ContractViolation(f"invalid JSON in {path}: {exc}")


def dump_json(obj, path=None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path is None:
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text + "\n")


def write_csv(header, rows, path=None) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(x) for x in row))
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text)
