"""JSON interchange format shared by the command line tools.

A document carries a version tag, the torus shape, and optional blocks:
period matrix (complex rows over real rows), polarization (integer matrix),
plane (complex matrix), witness (morphism blocks plus integer P), and a
seed. Integers above 53 bits travel as decimal strings so nothing is
rounded; real entries accept plain numbers or exact "p/q" strings; complex
entries are {"re": ..., "im": ...} objects. Emission is canonical (sorted
keys, fixed indentation), so parse -> emit -> parse is a byte-level fixed
point on normalized documents.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exact import int_matrix
from .torus import EquivalenceWitness, PeriodMatrix, TorusMorphism, TorusShape

__all__ = ["DocumentError", "Document", "parse_document", "emit_document"]

FORMAT_VERSION = 1
_INT_RE = re.compile(r"^-?\d+$")
_RAT_RE = re.compile(r"^(-?\d+)/(\d+)$")
_SAFE_INT = 1 << 53


class DocumentError(ValueError):
    """Malformed document; the message carries the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _parse_int(value, path: str) -> int:
    if isinstance(value, bool):
        raise DocumentError(path, "expected an integer, got a boolean")
    if isinstance(value, int):
        return value
    if isinstance(value, str) and _INT_RE.match(value):
        return int(value)
    raise DocumentError(path, f"expected an integer or decimal string, got {value!r}")


def _parse_real(value, path: str) -> float:
    if isinstance(value, bool):
        raise DocumentError(path, "expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _RAT_RE.match(value)
        if m:
            return float(Fraction(int(m.group(1)), int(m.group(2))))
        if _INT_RE.match(value):
            return float(int(value))
    raise DocumentError(path, f"expected a number or 'p/q' string, got {value!r}")


def _parse_complex(value, path: str) -> complex:
    if isinstance(value, dict):
        extra = set(value) - {"re", "im"}
        if extra:
            raise DocumentError(path, f"unexpected keys {sorted(extra)} in complex entry")
        return complex(_parse_real(value.get("re", 0), path + ".re"), _parse_real(value.get("im", 0), path + ".im"))
    return complex(_parse_real(value, path), 0.0)


def _parse_matrix(value, path: str, entry_parser):
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise DocumentError(path, "expected a nonempty list of rows")
    width = len(value[0])
    rows = []
    for i, row in enumerate(value):
        if len(row) != width:
            raise DocumentError(f"{path}[{i}]", f"ragged row: {len(row)} entries, expected {width}")
        rows.append([entry_parser(v, f"{path}[{i}][{j}]") for j, v in enumerate(row)])
    return rows


def _emit_int(v: int):
    v = int(v)
    return v if abs(v) < _SAFE_INT else str(v)


def _emit_complex(z: complex) -> dict:
    return {"im": float(z.imag), "re": float(z.real)}


@dataclass
class Document:
    """In-memory form of one interchange document."""

    shape: TorusShape | None = None
    period: PeriodMatrix | None = None
    polarization: np.ndarray | None = None
    plane: np.ndarray | None = None
    witness: EquivalenceWitness | None = None
    seed: int | None = None
    version: int = FORMAT_VERSION

    def require(self, field: str):
        value = getattr(self, field)
        if value is None:
            raise DocumentError(field, "required block is missing from the input document(s)")
        return value


def parse_document(text: str) -> Document:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    if not isinstance(raw, dict):
        raise DocumentError("$", "top level must be an object")
    known = {"version", "shape", "period", "polarization", "plane", "witness", "seed"}
    unknown = set(raw) - known
    if unknown:
        raise DocumentError("$", f"unknown fields {sorted(unknown)}")
    doc = Document()
    doc.version = _parse_int(raw.get("version", FORMAT_VERSION), "version")
    if doc.version != FORMAT_VERSION:
        raise DocumentError("version", f"unsupported version {doc.version}")

    if "shape" in raw:
        block = raw["shape"]
        if not isinstance(block, dict) or set(block) != {"n", "k"}:
            raise DocumentError("shape", "expected an object with fields n and k")
        try:
            doc.shape = TorusShape(_parse_int(block["n"], "shape.n"), _parse_int(block["k"], "shape.k"))
        except ValueError as exc:
            raise DocumentError("shape", str(exc)) from None

    if "period" in raw:
        shape = _need_shape(doc, "period")
        block = raw["period"]
        if not isinstance(block, dict) or set(block) - {"complex", "real"}:
            raise DocumentError("period", "expected an object with fields complex and real")
        c = _parse_matrix(block.get("complex"), "period.complex", _parse_complex)
        r_raw = block.get("real")
        if shape.k == 0 and r_raw in (None, []):
            r = np.zeros((0, shape.lattice_rank))
        else:
            r = np.array(_parse_matrix(r_raw, "period.real", _parse_real))
        try:
            doc.period = PeriodMatrix(np.array(c), r, shape)
        except ValueError as exc:
            raise DocumentError("period", str(exc)) from None

    if "polarization" in raw:
        shape = _need_shape(doc, "polarization")
        rows = _parse_matrix(raw["polarization"], "polarization", _parse_int)
        E = int_matrix(rows)
        if E.shape != (shape.lattice_rank, shape.lattice_rank):
            raise DocumentError(
                "polarization", f"expected a {shape.lattice_rank} x {shape.lattice_rank} matrix, got {E.shape}"
            )
        doc.polarization = E

    if "plane" in raw:
        shape = _need_shape(doc, "plane")
        rows = _parse_matrix(raw["plane"], "plane", _parse_complex)
        plane = np.array(rows)
        if plane.shape != (shape.n, shape.lattice_rank):
            raise DocumentError(
                "plane", f"expected a {shape.n} x {shape.lattice_rank} matrix, got {plane.shape}"
            )
        doc.plane = plane

    if "witness" in raw:
        shape = _need_shape(doc, "witness")
        block = raw["witness"]
        if not isinstance(block, dict) or set(block) - {"A", "B", "C", "P"}:
            raise DocumentError("witness", "expected an object with fields A, B, C, P")
        n, k = shape.n, shape.k
        A = np.array(_parse_matrix(block.get("A"), "witness.A", _parse_complex))
        B = (
            np.array(_parse_matrix(block["B"], "witness.B", _parse_complex))
            if k and block.get("B") is not None
            else np.zeros((n, k), dtype=complex)
        )
        C = (
            np.array(_parse_matrix(block["C"], "witness.C", _parse_real))
            if k and block.get("C") is not None
            else np.eye(k)
        )
        P = int_matrix(_parse_matrix(block.get("P"), "witness.P", _parse_int))
        if A.shape != (n, n) or B.shape != (n, k) or C.shape != (k, k):
            raise DocumentError("witness", f"block shapes do not match shape (n={n}, k={k})")
        if P.shape != (shape.lattice_rank, shape.lattice_rank):
            raise DocumentError("witness.P", f"expected size {shape.lattice_rank}, got {P.shape}")
        try:
            doc.witness = EquivalenceWitness(TorusMorphism(A, B, C), P)
        except ValueError as exc:
            raise DocumentError("witness", str(exc)) from None

    if "seed" in raw:
        doc.seed = _parse_int(raw["seed"], "seed")
    return doc


def _need_shape(doc: Document, field: str) -> TorusShape:
    if doc.shape is None:
        raise DocumentError(field, "document must declare shape before matrix blocks")
    return doc.shape


def document_to_dict(doc: Document) -> dict:
    out: dict = {"version": doc.version}
    if doc.shape is not None:
        out["shape"] = {"k": doc.shape.k, "n": doc.shape.n}
    if doc.period is not None:
        out["period"] = {
            "complex": [[_emit_complex(z) for z in row] for row in doc.period.c_block],
            "real": [[float(x) for x in row] for row in doc.period.r_block],
        }
    if doc.polarization is not None:
        out["polarization"] = [[_emit_int(v) for v in row] for row in doc.polarization]
    if doc.plane is not None:
        out["plane"] = [[_emit_complex(z) for z in row] for row in doc.plane]
    if doc.witness is not None:
        phi = doc.witness.morphism
        out["witness"] = {
            "A": [[_emit_complex(z) for z in row] for row in phi.A],
            "B": [[_emit_complex(z) for z in row] for row in phi.B],
            "C": [[float(x) for x in row] for row in phi.C],
            "P": [[_emit_int(v) for v in row] for row in doc.witness.basis_change],
        }
    if doc.seed is not None:
        out["seed"] = _emit_int(doc.seed)
    return out


def emit_document(doc: Document) -> str:
    return json.dumps(document_to_dict(doc), indent=2, sort_keys=True) + "\n"
