"""Reading input documents and grayscale images.

Documents are JSON objects with a top-level ``kind``; see ``docs/formats.md``.
Grid value arrays are flat, over parity-indexed cells, with axis 0 varying
fastest.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .cells import GridComplex, GridRegion, SimplicialSet
from .functions import ConstructibleFunction, PLFunction

__all__ = [
    "InputParseError",
    "InputValidationError",
    "KINDS",
    "load_document",
    "parse_document",
    "dump_document",
    "read_pgm",
    "ingest_image",
]

KINDS = ("grid-function", "simplicial-function", "grid-region", "simplicial-set")


class InputParseError(ValueError):
    """Malformed input text (exit code 2 on the command line)."""


class InputValidationError(ValueError):
    """Well-formed input describing an invalid object (exit code 3)."""


def load_document(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputParseError(f"{path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_document(doc, source=str(path))


def _field(doc: dict, name: str, source: str):
    if name not in doc:
        raise InputValidationError(f"{source}: missing field '{name}'")
    return doc[name]


def _float_array(value, name: str, source: str, ndim: int | None = None) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputValidationError(f"{source}: field '{name}' must be numeric") from exc
    if ndim is not None and arr.ndim != ndim:
        raise InputValidationError(f"{source}: field '{name}' must be a {ndim}-d array")
    if not np.all(np.isfinite(arr)):
        raise InputValidationError(f"{source}: field '{name}' contains non-finite numbers")
    return arr


def _grid(doc: dict, source: str) -> GridComplex:
    bps = _field(doc, "breakpoints", source)
    if not isinstance(bps, list) or not bps:
        raise InputValidationError(f"{source}: 'breakpoints' must be a non-empty list of per-axis lists")
    axes = tuple(_float_array(b, f"breakpoints[{i}]", source, 1) for i, b in enumerate(bps))
    try:
        return GridComplex(axes)
    except ValueError as exc:
        raise InputValidationError(f"{source}: breakpoints: {exc}") from exc


def _grid_values(doc: dict, gc: GridComplex, name: str, source: str) -> np.ndarray:
    flat = _float_array(_field(doc, name, source), name, source, 1)
    size = int(np.prod(gc.shape))
    if flat.size != size:
        raise InputValidationError(
            f"{source}: '{name}' has {flat.size} entries, grid has {size} cells (shape {gc.shape})"
        )
    return flat.reshape(gc.shape, order="F")


def _simplicial(doc: dict, source: str) -> SimplicialSet:
    verts = _float_array(_field(doc, "vertices", source), "vertices", source, 2)
    cells = _field(doc, "cells", source)
    if not isinstance(cells, list) or not all(isinstance(c, list) for c in cells):
        raise InputValidationError(f"{source}: 'cells' must be a list of vertex-index lists")
    for i, c in enumerate(cells):
        if not all(isinstance(j, int) and 0 <= j < len(verts) for j in c):
            raise InputValidationError(f"{source}: cells[{i}] has an invalid vertex index")
    closed = doc.get("closed", False)
    try:
        if closed:
            return SimplicialSet.from_simplices(verts, cells)
        return SimplicialSet(verts, tuple(tuple(c) for c in cells))
    except ValueError as exc:
        raise InputValidationError(f"{source}: {exc}") from exc


def parse_document(doc, source: str = "<input>"):
    """Build the object described by an already-decoded JSON document."""
    if not isinstance(doc, dict):
        raise InputValidationError(f"{source}: top level must be an object")
    kind = _field(doc, "kind", source)
    if kind not in KINDS:
        raise InputValidationError(f"{source}: field 'kind' must be one of {', '.join(KINDS)}")
    if kind == "grid-function":
        gc = _grid(doc, source)
        return ConstructibleFunction(gc, _grid_values(doc, gc, "values", source))
    if kind == "grid-region":
        gc = _grid(doc, source)
        if "cells" in doc:
            try:
                return GridRegion.from_cells(gc, [tuple(c) for c in doc["cells"]])
            except (ValueError, IndexError, TypeError) as exc:
                raise InputValidationError(f"{source}: cells: {exc}") from exc
        mask = _grid_values(doc, gc, "mask", source)
        if not np.all(np.isin(mask, (0.0, 1.0))):
            raise InputValidationError(f"{source}: 'mask' entries must be 0 or 1")
        return GridRegion(gc, mask.astype(bool))
    ss = _simplicial(doc, source)
    if kind == "simplicial-set":
        return ss
    vals = _float_array(_field(doc, "values", source), "values", source, 1)
    if vals.size != len(ss.vertices):
        raise InputValidationError(f"{source}: 'values' needs one entry per vertex ({len(ss.vertices)})")
    try:
        return PLFunction(ss, vals)
    except ValueError as exc:
        raise InputValidationError(f"{source}: {exc}") from exc


def dump_document(obj) -> dict:
    """Inverse of :func:`parse_document`."""
    if isinstance(obj, ConstructibleFunction):
        return {
            "kind": "grid-function",
            "breakpoints": [b.tolist() for b in obj.complex.breakpoints],
            "values": obj.values.reshape(-1, order="F").tolist(),
        }
    if isinstance(obj, GridRegion):
        return {
            "kind": "grid-region",
            "breakpoints": [b.tolist() for b in obj.complex.breakpoints],
            "mask": obj.mask.reshape(-1, order="F").astype(int).tolist(),
        }
    if isinstance(obj, PLFunction):
        out = dump_document(obj.set)
        out.update(kind="simplicial-function", values=np.asarray(obj.vertex_values).tolist())
        return out
    if isinstance(obj, SimplicialSet):
        return {
            "kind": "simplicial-set",
            "vertices": np.asarray(obj.vertices).tolist(),
            "cells": [list(c) for c in obj.cells],
        }
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# --------------------------------------------------------------------------
# PGM


_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _header_tokens(data: bytes, count: int):
    pos = 0
    out = []
    for _ in range(count):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise InputParseError("malformed PGM header")
        out.append(m.group(1))
        pos = m.end()
    return out, pos


def read_pgm(path) -> tuple[np.ndarray, int]:
    """Pixel array (rows, cols) and maxval of a P2 or P5 image."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InputParseError(f"{path}: {exc.strerror}") from exc
    (magic, w, h, maxval), pos = _header_tokens(data, 4)
    if magic not in (b"P2", b"P5"):
        raise InputParseError(f"{path}: not a PGM file (magic {magic!r})")
    try:
        width, height, maxv = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise InputParseError(f"{path}: malformed PGM header") from exc
    if width < 1 or height < 1 or not 0 < maxv <= 65535:
        raise InputParseError(f"{path}: bad PGM dimensions or maxval")
    count = width * height
    if magic == b"P5":
        raster = data[pos + 1 :]
        dtype = np.dtype(">u2") if maxv > 255 else np.dtype("u1")
        if len(raster) < count * dtype.itemsize:
            raise InputParseError(f"{path}: truncated PGM payload")
        pix = np.frombuffer(raster, dtype=dtype, count=count).astype(np.int64)
    else:
        tokens = re.sub(rb"#[^\n]*", b"", data[pos:]).split()
        if len(tokens) < count:
            raise InputParseError(f"{path}: truncated PGM payload")
        try:
            pix = np.array([int(t) for t in tokens[:count]], dtype=np.int64)
        except ValueError as exc:
            raise InputParseError(f"{path}: non-integer pixel value") from exc
    if pix.max(initial=0) > maxv:
        raise InputParseError(f"{path}: pixel value exceeds maxval")
    return pix.reshape(height, width), maxv


def ingest_image(path, skeleton: str = "max") -> ConstructibleFunction:
    """Grid function whose open unit squares carry pixel / maxval.

    Pixel (i, j) (row i, column j) sits on the open cell (i, i+1) x (j, j+1).
    Lower-dimensional cells take the max (or min) over the adjacent open
    squares, counting squares outside the image as 0.
    """
    if skeleton not in ("max", "min"):
        raise ValueError("skeleton must be 'max' or 'min'")
    pix, maxv = read_pgm(path)
    rows, cols = pix.shape
    gc = GridComplex((np.arange(rows + 1, dtype=float), np.arange(cols + 1, dtype=float)))
    # pad with a zero frame so every grid cell has four neighbouring squares
    padded = np.zeros((rows + 2, cols + 2))
    padded[1:-1, 1:-1] = pix / maxv
    reduce = np.maximum if skeleton == "max" else np.minimum
    values = np.zeros(gc.shape)
    values[1::2, 1::2] = pix / maxv
    # vertices (even, even): four squares around
    quad = reduce(
        reduce(padded[:-1, :-1], padded[1:, :-1]), reduce(padded[:-1, 1:], padded[1:, 1:])
    )
    values[0::2, 0::2] = quad
    # edges along axis 1 at row-breakpoint i: squares above and below
    values[0::2, 1::2] = reduce(padded[:-1, 1:-1], padded[1:, 1:-1])
    # edges along axis 0 at column-breakpoint j
    values[1::2, 0::2] = reduce(padded[1:-1, :-1], padded[1:-1, 1:])
    return ConstructibleFunction(gc, values)
