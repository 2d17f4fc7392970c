"""JSON documents for systems and regions, plus atomic file output."""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import NonsquareSystemError, SchemaError
from .lti import StateSpace, TransferMatrix, ss_to_tf
from .region import SrgRegion

FORMAT_VERSION = 1


def atomic_write(path, text: str) -> None:
    """Write the whole file or nothing: temp file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    return doc


def _field(doc: dict, key: str, where: str):
    if key not in doc:
        raise SchemaError(f"missing field {where}{key}")
    return doc[key]


def _matrix(value, where: str) -> np.ndarray:
    try:
        M = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError(f"{where} must be a rectangular numeric matrix") from None
    if M.ndim != 2:
        raise SchemaError(f"{where} must be a rectangular numeric matrix")
    if not np.all(np.isfinite(M)):
        raise SchemaError(f"{where} has non-finite entries")
    return M


def _coeffs(value, where: str) -> list[float]:
    if not isinstance(value, list) or not value:
        raise SchemaError(f"{where} must be a non-empty list of numbers")
    try:
        c = [float(x) for x in value]
    except (TypeError, ValueError):
        raise SchemaError(f"{where} must contain numbers only") from None
    if not all(math.isfinite(x) for x in c):
        raise SchemaError(f"{where} has non-finite coefficients")
    if c[-1] == 0 and c != [0.0]:
        raise SchemaError(f"{where} has a zero highest coefficient")
    return c


def _grid(value, where: str) -> list[list]:
    if not isinstance(value, list) or not value or not all(isinstance(row, list) for row in value):
        raise SchemaError(f"{where} must be a grid of coefficient lists")
    rows = len(value)
    cols = {len(row) for row in value}
    if len(cols) != 1:
        raise SchemaError(f"{where} rows have different lengths")
    if cols.pop() != rows:
        raise NonsquareSystemError(f"{where} is {rows}x{len(value[0])}; only square systems are supported")
    return value


def parse_system(text: str) -> TransferMatrix | StateSpace:
    doc = _load(text)
    rep = doc.get("representation", doc)
    if not isinstance(rep, dict):
        raise SchemaError("representation must be an object")
    kind = _field(rep, "kind", "representation.")
    if kind == "tf":
        num = _grid(_field(rep, "num", "representation."), "num")
        den = _grid(_field(rep, "den", "representation."), "den")
        if len(num) != len(den):
            raise SchemaError("num and den grids have different shapes")
        p = len(num)
        nums = [[_coeffs(num[i][j], f"num[{i}][{j}]") for j in range(p)] for i in range(p)]
        dens = [[_coeffs(den[i][j], f"den[{i}][{j}]") for j in range(p)] for i in range(p)]
        for i in range(p):
            for j in range(p):
                if dens[i][j] == [0.0]:
                    raise SchemaError(f"den[{i}][{j}] is the zero polynomial")
        return TransferMatrix.from_coeffs(nums, dens)
    if kind == "ss":
        A, B, C, D = (_matrix(_field(rep, k, "representation."), k) for k in "ABCD")
        n = A.shape[0]
        if A.size == 0:
            A = np.zeros((0, 0))
            n = 0
        if A.shape != (n, n):
            raise SchemaError("A must be square")
        p = D.shape[0]
        if D.shape[1] != p:
            raise NonsquareSystemError(f"D is {D.shape[0]}x{D.shape[1]}; only square systems are supported")
        B = B.reshape(n, -1) if n else np.zeros((0, p))
        C = C.reshape(-1, n) if n else np.zeros((p, 0))
        if B.shape != (n, p) or C.shape != (p, n):
            raise SchemaError("B and C shapes do not match A and D")
        return StateSpace(A, B, C, D)
    raise SchemaError(f"unknown representation kind {kind!r}")


def as_transfer_matrix(system) -> TransferMatrix:
    return system if isinstance(system, TransferMatrix) else ss_to_tf(system)


def serialize_system(system: TransferMatrix | StateSpace, name: str = "") -> str:
    if isinstance(system, StateSpace):
        rep = {"kind": "ss", **{k: getattr(system, k).tolist() for k in "ABCD"}}
    else:
        num, den = system.coefficient_grids()
        rep = {"kind": "tf", "num": num, "den": den}
    return json.dumps({"format_version": FORMAT_VERSION, "name": name, "representation": rep}, indent=2)


def _encode_radius(x: float):
    return "inf" if math.isinf(x) else float(x)


def _decode_radius(x, where: str) -> float:
    if x == "inf":
        return math.inf
    if isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x):
        return float(x)
    raise SchemaError(f"{where} must be a finite number or \"inf\"")


def serialize_region(region: SrgRegion) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "system_fingerprint": region.meta.get("fingerprint", ""),
        "kind": region.kind,
        "alphas": [float(a) for a in region.alphas],
        "r": [float(x) for x in region.r],
        "R": [_encode_radius(x) for x in region.R],
        "r_reason": list(region.r_reason),
        "R_reason": list(region.R_reason),
        "grid": {k: v for k, v in region.meta.items() if k != "fingerprint"},
    }
    return json.dumps(doc, indent=1)


def parse_region(text: str) -> SrgRegion:
    doc = _load(text)
    kind = _field(doc, "kind", "")
    alphas = _field(doc, "alphas", "")
    r = _field(doc, "r", "")
    R = _field(doc, "R", "")
    if not all(isinstance(v, list) for v in (alphas, r, R)) or not len(alphas) == len(r) == len(R):
        raise SchemaError("alphas, r and R must be equal-length lists")
    try:
        a = [float(x) for x in alphas]
        rr = [float(x) for x in r]
    except (TypeError, ValueError):
        raise SchemaError("alphas and r must be numeric") from None
    RR = [_decode_radius(x, f"R[{i}]") for i, x in enumerate(R)]
    meta = dict(doc.get("grid", {}))
    if doc.get("system_fingerprint"):
        meta["fingerprint"] = doc["system_fingerprint"]
    try:
        return SrgRegion(np.array(a), np.array(rr), np.array(RR), kind, meta,
                         tuple(doc.get("r_reason", ())), tuple(doc.get("R_reason", ())))
    except ValueError as exc:
        raise SchemaError(f"region invariants violated: {exc}") from None
