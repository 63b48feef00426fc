"""JSON formats for norms, functionals and approximations; CSV plot data."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

from .approx import ApproxElement, ApproxNorm
from .core import Functional
from .normspec import NormSpec


class ParseError(ValueError):
    """Malformed input file; the message carries a JSON-path-like position."""


def functional_to_json(f: Functional) -> dict:
    return {"indices": f.indices.tolist(), "values": f.coeffs.tolist()}


def functional_from_json(obj: Any, dim: int, where: str = "$") -> Functional:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object with 'indices' and 'values'")
    idx, val = obj.get("indices"), obj.get("values")
    if not isinstance(idx, list) or not isinstance(val, list):
        raise ParseError(f"{where}: 'indices' and 'values' must be arrays")
    if len(idx) != len(val):
        raise ParseError(f"{where}: 'indices' has {len(idx)} entries, 'values' has {len(val)}")
    pairs = {}
    for k, (i, v) in enumerate(zip(idx, val)):
        if not isinstance(i, int) or isinstance(i, bool) or not 0 <= i < dim:
            raise ParseError(f"{where}.indices[{k}]: {i!r} is not an index in 0..{dim - 1}")
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ParseError(f"{where}.values[{k}]: {v!r} is not a number")
        if i in pairs:
            raise ParseError(f"{where}.indices[{k}]: duplicate index {i}")
        pairs[i] = float(v)
    try:
        return Functional.from_dict(dim, pairs)
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from exc


def normspec_to_json(N: NormSpec) -> dict:
    return {"dim": N.dim, "name": N.name, "boundary": [functional_to_json(b) for b in N.boundary]}


def _dim(obj: dict, where: str) -> int:
    dim = obj.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ParseError(f"{where}.dim: expected a positive integer, got {dim!r}")
    return dim


def normspec_from_json(obj: Any, where: str = "$") -> NormSpec:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected a JSON object")
    dim = _dim(obj, where)
    bd = obj.get("boundary")
    if not isinstance(bd, list) or not bd:
        raise ParseError(f"{where}.boundary: expected a non-empty array")
    fs = [functional_from_json(b, dim, f"{where}.boundary[{k}]") for k, b in enumerate(bd)]
    return NormSpec(dim, tuple(fs), str(obj.get("name", "norm")))


def approx_to_json(A: ApproxNorm) -> dict:
    out = normspec_to_json(A.induced)
    out["source"] = A.source.name
    out["epsilon"] = A.epsilon
    out["m_extra"] = A.m_extra
    out["elements"] = [{
        "source_index": e.source_index, "r": e.r, "n": e.n, "m": e.m, "scale": e.scale,
        "distance": e.distance, **functional_to_json(e.scaled),
    } for e in A.elements]
    return out


def approx_from_json(obj: Any, source: NormSpec, epsilon: float,
                     where: str = "$") -> tuple[ApproxNorm, NormSpec]:
    """Rebuild an ApproxNorm from its elements; also return the file's boundary as a NormSpec."""
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected a JSON object")
    dim = _dim(obj, where)
    if dim != source.dim:
        raise ParseError(f"{where}.dim: {dim} does not match the source norm's dim {source.dim}")
    listed = normspec_from_json(obj, where)
    raw = obj.get("elements")
    if not isinstance(raw, list):
        raise ParseError(f"{where}.elements: expected an array")
    elements = []
    for k, e in enumerate(raw):
        loc = f"{where}.elements[{k}]"
        if not isinstance(e, dict):
            raise ParseError(f"{loc}: expected an object")
        for key in ("source_index", "r", "n", "m"):
            if not isinstance(e.get(key), int):
                raise ParseError(f"{loc}.{key}: expected an integer")
        si = e["source_index"]
        if not 0 <= si < source.k:
            raise ParseError(f"{loc}.source_index: {si} out of range")
        scale = e.get("scale")
        if not isinstance(scale, (int, float)) or not scale > 0:
            raise ParseError(f"{loc}.scale: expected a positive number")
        scaled = functional_from_json(e, dim, loc)
        elements.append(ApproxElement(si, source.boundary[si], e["r"], e["n"], e["m"],
                                      float(scale), scaled * (1.0 / scale), scaled,
                                      float(e.get("distance", float("nan")))))
    return ApproxNorm(source, float(epsilon), tuple(elements), int(obj.get("m_extra", 1))), listed


def load_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc


def dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def emit_plot_data(records: Iterable[dict], columns: Sequence[str], path: str | Path) -> None:
    """Headered CSV, one row per record, floats written with 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for rec in records:
            writer.writerow([_fmt(rec[c]) for c in columns])
