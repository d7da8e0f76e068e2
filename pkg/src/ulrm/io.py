"""Deterministic CSV/JSON serialization with atomic writes."""

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .species import data_version
from .units import HARTREE_MHZ

SCHEMA_VERSION = "1.0"
DIGITS = 12


def fmt(x):
    """Number formatted with 12 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.{DIGITS}g}"


def atomic_write(path, data):
    """Write ``data`` (str or bytes) to ``path`` through a temp file and rename."""
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    directory = path.parent if str(path.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    atomic_write(path, csv_text(header, rows))


def read_csv(path):
    """Header list and float array of a CSV written by :func:`write_csv`."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = np.array([[float(v) for v in row] for row in r if row], dtype=float)
    return header, data.reshape(-1, len(header))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


def envelope(command, payload, **provenance):
    """Versioned result wrapper carrying the data-table version."""
    prov = {"data_version": data_version()}
    prov.update(provenance)
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "provenance": _jsonable(prov),
        "payload": _jsonable(payload),
    }


def json_text(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n"


def write_json(path, obj):
    atomic_write(path, json_text(obj))


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def pec_rows(pcs):
    """Header and rows of a curve set in MHz."""
    header = ["R_au"] + [f"curve_{j}_MHz" for j in range(pcs.n_curves)] + ["reliable"]
    E = pcs.energies * HARTREE_MHZ
    rows = [[r, *E[i], bool(pcs.reliable[i])] for i, r in enumerate(pcs.R)]
    return header, rows
