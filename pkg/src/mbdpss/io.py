"""File formats used by the command-line interface.

SLEP matrix files hold a 16-byte header (magic ``b"SLEP"``, then little-endian
u32 rows, u32 cols and u32 flags = 0) followed by the entries as
little-endian float64 in column-major order.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .sensing import MeasurementOperator, make_operator

__all__ = [
    "write_slep",
    "read_slep",
    "write_complex_csv",
    "read_complex_csv",
    "write_operator_spec",
    "read_operator_spec",
]

_HEADER = struct.Struct("<4sIII")
_MAGIC = b"SLEP"


def write_slep(path, matrix: np.ndarray) -> None:
    m = np.asarray(matrix, dtype="<f8")
    if m.ndim != 2:
        raise ValueError("SLEP files hold 2-D real matrices")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, m.shape[0], m.shape[1], 0))
        fh.write(np.asfortranarray(m).tobytes(order="F"))


def read_slep(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    magic, rows, cols, flags = _HEADER.unpack_from(raw)
    if magic != _MAGIC or flags != 0:
        raise ValueError(f"{path}: not a SLEP matrix file")
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} entries, found {body.size}")
    return body.reshape((rows, cols), order="F").astype(float)


def write_complex_csv(path, x: np.ndarray) -> None:
    x = np.asarray(x, dtype=complex)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for i, v in enumerate(x):
            w.writerow([i, repr(float(v.real)), repr(float(v.imag))])


def read_complex_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = np.zeros(len(rows), dtype=complex)
    for r in rows:
        out[int(r["index"])] = float(r["re"]) + 1j * float(r.get("im", 0.0) or 0.0)
    return out


def write_operator_spec(path, op: MeasurementOperator, fractional: bool = False) -> None:
    spec = {"kind": op.kind, "M": op.M, "N": op.N, "seed": op.seed, "fractional": fractional}
    Path(path).write_text(json.dumps(spec, indent=2))


def read_operator_spec(path) -> MeasurementOperator:
    """Rebuild an operator from its ``{kind, M, N, seed}`` description."""
    spec = json.loads(Path(path).read_text())
    return make_operator(spec["kind"], int(spec["M"]), int(spec["N"]), int(spec["seed"]), fractional=bool(spec.get("fractional", False)))
