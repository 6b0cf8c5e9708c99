"""Instance files: a JSON document with one matrix row per line.

Reals are written with 17 significant digits, so a write/read cycle is
bit-exact.  Matrices may be stored dense (list of rows) or as (i, j, value)
triplets with zeros omitted.
"""
from __future__ import annotations

import json
import os
from typing import Union

import numpy as np

from .core import BoxDomain, ContractError, LpInstance, MpcInstance
from .errors import InstanceFormatError

Instance = Union[LpInstance, MpcInstance]
FORMATS = ("dense", "triplets")


def _num(v: float) -> str:
    s = "%.17g" % v
    return s if any(ch in s for ch in ".eEn") else s + ".0"


def _vec(v) -> str:
    return "[" + ", ".join(_num(float(a)) for a in v) + "]"


def _matrix(M: np.ndarray, fmt: str, indent: str = "    ") -> str:
    if fmt == "dense":
        rows = [_vec(r) for r in M]
    else:
        rows = ["[%d, %d, %s]" % (i, j, _num(float(M[i, j]))) for i, j in zip(*np.nonzero(M))]
    if not rows:
        return "[]"
    return "[\n" + ",\n".join(indent + r for r in rows) + "\n  ]"


def dumps(inst: Instance, fmt: str = "dense") -> str:
    if fmt not in FORMATS:
        raise ContractError(f"format must be one of {FORMATS}")
    parts = []
    if isinstance(inst, LpInstance):
        parts += ['"kind": "lp"', f'"n": {inst.n}', f'"d": {inst.d}', f'"format": "{fmt}"',
                  f'"A": {_matrix(inst.A, fmt)}', f'"b": {_vec(inst.b)}', f'"c": {_vec(inst.c)}',
                  f'"lower": {_vec(inst.domain.lower)}', f'"upper": {_vec(inst.domain.upper)}']
        if inst.n_retained:
            parts.append('"retained": {\n  "A": %s,\n  "b": %s\n  }'
                         % (_matrix(inst.retained_A, "dense"), _vec(inst.retained_b)))
    elif isinstance(inst, MpcInstance):
        parts += ['"kind": "mpc"', f'"n_p": {inst.n_p}', f'"n_c": {inst.n_c}', f'"d": {inst.d}',
                  f'"format": "{fmt}"', f'"P": {_matrix(inst.P, fmt)}', f'"C": {_matrix(inst.C, fmt)}']
    else:
        raise ContractError(f"cannot serialize {type(inst).__name__}")
    return "{\n  " + ",\n  ".join(parts) + "\n}\n"


def write_instance(path, inst: Instance, fmt: str = "dense") -> None:
    text = dumps(inst, fmt)
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _field_line(text: str, name: str):
    key = f'"{name}"'
    for k, line in enumerate(text.splitlines(), 1):
        if key in line:
            return k
    return None


class _Reader:
    def __init__(self, text: str, doc: dict):
        self.text, self.doc = text, doc

    def fail(self, name: str, msg: str):
        line = _field_line(self.text, name)
        where = f" (line {line})" if line else ""
        raise InstanceFormatError(f"field '{name}'{where}: {msg}")

    def get(self, name: str):
        if name not in self.doc:
            raise InstanceFormatError(f"missing field '{name}'")
        return self.doc[name]

    def integer(self, name: str, lo: int = 0) -> int:
        v = self.get(name)
        if not isinstance(v, int) or isinstance(v, bool) or v < lo:
            self.fail(name, f"expected an integer >= {lo}, got {v!r}")
        return v

    def vector(self, name: str, length: int, src=None) -> np.ndarray:
        v = self.get(name) if src is None else src
        try:
            arr = np.array(v, dtype=float)
        except (TypeError, ValueError):
            self.fail(name, "expected a list of numbers")
        if arr.shape != (length,):
            self.fail(name, f"expected {length} entries, got shape {arr.shape}")
        return arr

    def matrix(self, name: str, rows: int, cols: int, fmt: str, src=None) -> np.ndarray:
        v = self.get(name) if src is None else src
        if not isinstance(v, list):
            self.fail(name, "expected a list")
        if fmt == "dense":
            if len(v) != rows:
                self.fail(name, f"expected {rows} rows, got {len(v)}")
            try:
                M = np.array(v, dtype=float).reshape(len(v), -1) if v else np.zeros((0, cols))
            except (TypeError, ValueError):
                self.fail(name, "rows must be equal-length lists of numbers")
            if M.shape != (rows, cols):
                self.fail(name, f"expected shape ({rows}, {cols}), got {M.shape}")
            return M
        M = np.zeros((rows, cols))
        for k, t in enumerate(v):
            if not (isinstance(t, list) and len(t) == 3):
                self.fail(name, f"triplet {k} is not [i, j, value]")
            i, j, val = t
            if not (isinstance(i, int) and isinstance(j, int) and 0 <= i < rows and 0 <= j < cols):
                self.fail(name, f"triplet {k} index ({i}, {j}) outside ({rows}, {cols})")
            M[i, j] = float(val)
        return M


def loads(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise InstanceFormatError("top level must be an object")
    r = _Reader(text, doc)
    kind = doc.get("kind", "lp")
    fmt = r.get("format")
    if fmt not in FORMATS:
        r.fail("format", f"expected one of {FORMATS}, got {fmt!r}")
    try:
        if kind == "lp":
            n, d = r.integer("n", 1), r.integer("d", 1)
            A = r.matrix("A", n, d, fmt)
            b, c = r.vector("b", n), r.vector("c", d)
            lo, hi = r.vector("lower", d), r.vector("upper", d)
            RA = Rb = None
            if "retained" in doc:
                ret = doc["retained"]
                if not isinstance(ret, dict):
                    r.fail("retained", "expected an object with A and b")
                rows = len(ret.get("A", []))
                RA = r.matrix("retained", rows, d, "dense", src=ret.get("A"))
                Rb = r.vector("retained", rows, src=ret.get("b"))
            return LpInstance(A, b, c, BoxDomain(lo, hi), RA, Rb)
        if kind == "mpc":
            n_p, n_c, d = r.integer("n_p"), r.integer("n_c", 1), r.integer("d", 1)
            return MpcInstance(r.matrix("P", n_p, d, fmt), r.matrix("C", n_c, d, fmt))
    except ContractError as exc:
        raise InstanceFormatError(str(exc)) from None
    r.fail("kind", f"expected 'lp' or 'mpc', got {kind!r}")


def read_instance(path) -> Instance:
    with open(path) as fh:
        return loads(fh.read())


def io_roundtrip(path, inst: Instance, fmt: str = "dense") -> Instance:
    write_instance(path, inst, fmt)
    return read_instance(path)
