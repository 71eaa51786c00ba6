"""JSON and CSV documents: point inputs, manifold specs and reports.

Complex matrices are stored row by row as ``[re, im]`` pairs.  Floats are
written with Python's shortest round-trip representation, so every value
reads back bit for bit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .errors import InconsistentInput, InputError, SingularLevi
from .geometry import ManifoldSpec, PointSample
from .pencil import HermitianForm, PencilInstance

POINT_DOC_VERSION = "1"
SPEC_DOC_VERSION = "1"
# input matrices are symmetrized on construction; larger asymmetry is a data error
HERMITIAN_RTOL = 1e-12


@dataclass(frozen=True)
class PointInputDocument:
    version: str
    dim: int
    M: tuple[tuple[tuple[float, float], ...], ...]
    L: tuple[tuple[tuple[float, float], ...], ...]
    label: str | None = None

    def pencil(self) -> PencilInstance:
        return PencilInstance(_to_array(self.M), _to_array(self.L))

    def to_dict(self) -> dict:
        out = {
            "version": self.version,
            "dim": self.dim,
            "M": [[list(e) for e in row] for row in self.M],
            "L": [[list(e) for e in row] for row in self.L],
        }
        if self.label is not None:
            out["label"] = self.label
        return out

    @classmethod
    def from_pencil(cls, p: PencilInstance, label: str | None = None) -> PointInputDocument:
        return cls(POINT_DOC_VERSION, p.dim, _from_array(p.M.entries), _from_array(p.L.entries), label)


def _to_array(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def _from_array(a: np.ndarray) -> tuple:
    return tuple(tuple((float(v.real), float(v.imag)) for v in row) for row in a)


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"{where}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise InputError(f"{where}: value must be finite")
    return value


def _matrix(raw, dim: int, field: str) -> tuple:
    if not isinstance(raw, list) or len(raw) != dim:
        raise InputError(f"field '{field}': expected {dim} rows")
    rows = []
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != dim:
            raise InputError(f"field '{field}[{i}]': expected {dim} entries")
        entries = []
        for j, e in enumerate(row):
            where = f"field '{field}[{i}][{j}]'"
            if not isinstance(e, list) or len(e) != 2:
                raise InputError(f"{where}: expected a [re, im] pair, got {e!r}")
            entries.append((_number(e[0], where), _number(e[1], where)))
        rows.append(tuple(entries))
    _check_hermitian(_to_array(rows), field)
    return tuple(rows)


def _check_hermitian(a: np.ndarray, field: str) -> None:
    gap = np.abs(a - a.conj().T)
    scale = max(1.0, float(np.abs(a).max()))
    if gap.max() > HERMITIAN_RTOL * scale:
        i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
        raise InconsistentInput(
            f"field '{field}[{i}][{j}]': not the conjugate of '{field}[{j}][{i}]' "
            f"(gap {gap.max():.3g}, tol {HERMITIAN_RTOL:g} x {scale:g})"
        )


def parse_point_document(data: dict) -> PointInputDocument:
    """Validate a decoded point document; errors name the offending field."""
    if not isinstance(data, dict):
        raise InputError("document root must be a JSON object")
    for key in ("version", "dim", "M", "L"):
        if key not in data:
            raise InputError(f"missing field '{key}'")
    unknown = set(data) - {"version", "dim", "M", "L", "label"}
    if unknown:
        raise InputError(f"unknown field '{sorted(unknown)[0]}'")
    if not isinstance(data["version"], str):
        raise InputError("field 'version': expected a string")
    if data["version"] != POINT_DOC_VERSION:
        raise InputError(f"field 'version': unsupported version {data['version']!r}")
    dim = data["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise InputError(f"field 'dim': expected a positive integer, got {dim!r}")
    label = data.get("label")
    if label is not None and not isinstance(label, str):
        raise InputError("field 'label': expected a string")
    return PointInputDocument(
        data["version"], dim, _matrix(data["M"], dim, "M"), _matrix(data["L"], dim, "L"), label
    )


def _decode(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def read_point_document(path) -> tuple[PointInputDocument, bytes]:
    raw = _read_bytes(path)
    return parse_point_document(_decode(raw.decode("utf-8"), str(path))), raw


def _read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def digest(raw: bytes) -> str:
    return "sha256:" + hashlib.sha256(raw).hexdigest()


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


# manifold specs


def spec_to_dict(spec: ManifoldSpec) -> dict:
    return {
        "version": SPEC_DOC_VERSION,
        "name": spec.name,
        "n": spec.n,
        "metadata": dict(spec.metadata),
        "samples": [
            {
                "id": s.id,
                "coords": list(s.coords),
                "dm_weight": s.dm_weight,
                "M": [[list(e) for e in row] for row in _from_array(s.pencil.M.entries)],
                "L": [[list(e) for e in row] for row in _from_array(s.pencil.L.entries)],
            }
            for s in spec.samples
        ],
    }


def spec_from_dict(data: dict) -> ManifoldSpec:
    if not isinstance(data, dict):
        raise InputError("document root must be a JSON object")
    for key in ("version", "name", "n", "samples"):
        if key not in data:
            raise InputError(f"missing field '{key}'")
    if data["version"] != SPEC_DOC_VERSION:
        raise InputError(f"field 'version': unsupported version {data['version']!r}")
    n = data["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise InputError(f"field 'n': expected an integer >= 2, got {n!r}")
    meta = data.get("metadata", {})
    if not isinstance(meta, dict) or not all(isinstance(v, str) for v in meta.values()):
        raise InputError("field 'metadata': expected an object of strings")
    raw_samples = data["samples"]
    if not isinstance(raw_samples, list) or not raw_samples:
        raise InputError("field 'samples': expected a nonempty list")
    samples = []
    for i, s in enumerate(raw_samples):
        where = f"samples[{i}]"
        if not isinstance(s, dict):
            raise InputError(f"field '{where}': expected an object")
        for key in ("id", "dm_weight", "M", "L"):
            if key not in s:
                raise InputError(f"missing field '{where}.{key}'")
        w = _number(s["dm_weight"], f"field '{where}.dm_weight'")
        if w <= 0:
            raise InputError(f"field '{where}.dm_weight': must be positive")
        coords = s.get("coords", [])
        if not isinstance(coords, list):
            raise InputError(f"field '{where}.coords': expected a list")
        coords = tuple(_number(c, f"field '{where}.coords'") for c in coords)
        M = _to_array(_matrix(s["M"], n - 1, f"{where}.M"))
        L = _to_array(_matrix(s["L"], n - 1, f"{where}.L"))
        try:
            pencil = PencilInstance(M, L)
        except SingularLevi as exc:
            raise SingularLevi(f"{where}: {exc}") from None
        samples.append(PointSample(str(s["id"]), coords, pencil, w))
    return ManifoldSpec(str(data["name"]), n, samples, dict(meta))


def read_spec(path) -> tuple[ManifoldSpec, bytes]:
    raw = _read_bytes(path)
    return spec_from_dict(_decode(raw.decode("utf-8"), str(path))), raw


def write_spec(spec: ManifoldSpec, path) -> None:
    Path(path).write_text(dumps(spec_to_dict(spec)))


def write_sample_table(path, spec: ManifoldSpec, per_q: dict[int, list[float] | str]) -> None:
    """One row per sample: id, dm_weight and ``dm * int |det|`` for each degree."""
    qs = sorted(per_q)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "dm_weight", *[f"q{q}" for q in qs]])
        for i, s in enumerate(spec.samples):
            row = [s.id, repr(s.dm_weight)]
            for q in qs:
                v = per_q[q]
                row.append(v if isinstance(v, str) else repr(v[i]))
            w.writerow(row)
