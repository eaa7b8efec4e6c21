"""JSON reading and writing with field-level diagnostics.

Floats are written with ``repr`` (shortest round-trip form), so every value
read back is bit-identical to the one written.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ParseError, PFrameError
from .frame import PairedMeasure
from .measure import DiscreteMeasure, measure_from_dict
from .transport import Coupling


def load_json(path) -> object:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def _field(data, key, where, required=True):
    if not isinstance(data, dict):
        raise ParseError(f"{where}: expected a JSON object, got {type(data).__name__}")
    if key not in data:
        if required:
            raise ParseError(f"{where}: missing field '{key}'")
        return None
    return data[key]


def _matrix(value, where) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ParseError(f"{where}: expected a non-empty list of vectors")
    for r, row in enumerate(value):
        if not isinstance(row, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in row):
            raise ParseError(f"{where}[{r}]: expected a list of numbers")
    lengths = {len(row) for row in value}
    if len(lengths) != 1:
        raise ParseError(f"{where}: vectors have unequal lengths {sorted(lengths)}")
    return np.array(value, dtype=float)


def _vector(value, where) -> np.ndarray:
    if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise ParseError(f"{where}: expected a list of numbers")
    return np.array(value, dtype=float)


def parse_measure(data, where="measure", force_normalize=False) -> DiscreteMeasure:
    points = _matrix(_field(data, "points", where), f"{where}.points")
    dim = _field(data, "dim", where, required=False)
    if dim is not None and (not isinstance(dim, int) or points.shape[1] != dim):
        raise ParseError(f"{where}.dim: declared {dim!r} but points have length {points.shape[1]}")
    masses = _field(data, "masses", where, required=False)
    if masses is not None:
        masses = _vector(masses, f"{where}.masses")
        if masses.size != points.shape[0]:
            raise ParseError(f"{where}.masses: {masses.size} masses for {points.shape[0]} points")
    payload = {"dim": points.shape[1], "points": points.tolist()}
    if masses is not None:
        payload["masses"] = masses.tolist()
    try:
        return measure_from_dict(payload, force_normalize=force_normalize)
    except PFrameError as exc:
        raise ParseError(f"{where}: {exc}") from exc


def read_measure(path, force_normalize=False) -> DiscreteMeasure:
    return parse_measure(load_json(path), str(path), force_normalize)


def parse_paired(data, where="paired") -> PairedMeasure:
    x = _matrix(_field(data, "x", where), f"{where}.x")
    y = _matrix(_field(data, "y", where), f"{where}.y")
    if x.shape != y.shape:
        raise ParseError(f"{where}: x has shape {x.shape}, y has shape {y.shape}")
    dim = _field(data, "dim", where, required=False)
    if dim is not None and dim != x.shape[1]:
        raise ParseError(f"{where}.dim: declared {dim!r} but vectors have length {x.shape[1]}")
    masses = _field(data, "masses", where, required=False)
    if masses is None:
        masses = np.full(x.shape[0], 1.0 / x.shape[0])
    else:
        masses = _vector(masses, f"{where}.masses")
        if masses.size != x.shape[0] or np.any(masses <= 0):
            raise ParseError(f"{where}.masses: need {x.shape[0]} positive masses")
        masses = masses / masses.sum()
    try:
        return PairedMeasure(x, y, masses)
    except PFrameError as exc:
        raise ParseError(f"{where}: {exc}") from exc


def read_paired(path) -> PairedMeasure:
    return parse_paired(load_json(path), str(path))


def parse_coupling(data, where="coupling", mu=None, nu=None, force_normalize=False) -> Coupling:
    """Parse ``{"mu", "nu", "entries": [[i, j, mass], ...]}``.

    Given ``mu``/``nu`` are used when the file omits its marginals.
    """
    if not isinstance(data, dict):
        raise ParseError(f"{where}: expected a JSON object")
    if "mu" in data:
        mu = parse_measure(data["mu"], f"{where}.mu", force_normalize)
    if "nu" in data:
        nu = parse_measure(data["nu"], f"{where}.nu", force_normalize)
    if mu is None or nu is None:
        raise ParseError(f"{where}: missing field 'mu' or 'nu'")
    entries = _field(data, "entries", where)
    if not isinstance(entries, list) or not entries:
        raise ParseError(f"{where}.entries: expected a non-empty list of [i, j, mass]")
    ii, jj, mm = [], [], []
    for e, entry in enumerate(entries):
        if (
            not isinstance(entry, list)
            or len(entry) != 3
            or not isinstance(entry[0], int)
            or not isinstance(entry[1], int)
            or not isinstance(entry[2], (int, float))
        ):
            raise ParseError(f"{where}.entries[{e}]: expected [i, j, mass]")
        ii.append(entry[0])
        jj.append(entry[1])
        mm.append(float(entry[2]))
    try:
        return Coupling(mu, nu, ii, jj, mm)
    except PFrameError as exc:
        raise ParseError(f"{where}: {exc}") from exc


def read_coupling(path, mu=None, nu=None, force_normalize=False) -> Coupling:
    return parse_coupling(load_json(path), str(path), mu, nu, force_normalize)
