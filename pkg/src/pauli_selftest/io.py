"""JSON and CSV serialization of witnesses, correlation records and reports."""

import csv
import io
import json
from pathlib import Path

import numpy as np

from .certification import Witness, reconstruct_witness


class WitnessFormatError(ValueError):
    """The witness file is not valid JSON or lacks required fields."""


class WitnessValidationError(ValueError):
    """The coefficients do not reproduce the stored witness matrix."""


def witness_to_dict(w, include_matrix=True):
    entries = [
        {"c": list(c), "d": list(d), "z": list(z), "w": list(ww), "value": v}
        for (c, d, z, ww), v in sorted(w.omega.items())
    ]
    out = {"n": w.n, "omega": entries}
    if include_matrix:
        m = np.asarray(w.matrix)
        out["matrix"] = {"real": m.real.tolist(), "imag": m.imag.tolist()}
    return out


def dump_witness(w, path=None):
    text = json.dumps(witness_to_dict(w), indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _tuple(entry, key, n):
    value = entry[key]
    value = [value] if isinstance(value, int) else value
    if len(value) != n:
        raise WitnessFormatError(f"field {key!r} must have {n} entries")
    return tuple(int(v) for v in value)


def witness_from_dict(data, tol=1e-10):
    try:
        n = int(data["n"])
        omega = {}
        for entry in data["omega"]:
            key = tuple(_tuple(entry, k, n) for k in ("c", "d", "z", "w"))
            omega[key] = omega.get(key, 0.0) + float(entry["value"])
    except (KeyError, TypeError) as err:
        raise WitnessFormatError(f"malformed witness: missing or invalid {err}") from None
    for c, d, z, w in omega:
        if set(c + d) - {1, -1} or set(z + w) - {1, 2, 3}:
            raise WitnessFormatError("outcomes must be +-1 and settings 1..3")
    rebuilt = reconstruct_witness(omega, n)
    if "matrix" in data:
        try:
            m = np.array(data["matrix"]["real"]) + 1j * np.array(data["matrix"]["imag"])
        except (KeyError, TypeError) as err:
            raise WitnessFormatError(f"malformed matrix field: {err}") from None
        if m.shape != rebuilt.shape:
            raise WitnessValidationError("matrix field has the wrong dimension")
        err = float(np.max(np.abs(m - rebuilt)))
        if err > tol:
            raise WitnessValidationError(
                f"coefficients do not reconstruct the matrix (max error {err:.3g})")
    return Witness(rebuilt, omega, n)


def load_witness(path):
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise WitnessFormatError(
            f"{path}: parse error at line {err.lineno}, column {err.colno}: {err.msg}") from None
    return witness_from_dict(data)


def _flatten(prefix, value, rows):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, value))


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def report_to_text(report, fmt):
    if fmt == "json":
        return json.dumps(report, indent=2, default=_plain) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["key", "value"])
        rows = []
        _flatten("", report, rows)
        writer.writerows((k, _plain(v) if isinstance(v, np.generic) else v) for k, v in rows)
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(report, fmt="json", path=None):
    text = report_to_text(report, fmt)
    if path is None:
        return text
    Path(path).write_text(text)
    return text
