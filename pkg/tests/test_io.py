import json

import numpy as np
import pytest

import _factories as F
from hadwiger.cells import GridRegion, SimplicialSet
from hadwiger.functions import ConstructibleFunction, PLFunction
from hadwiger.io import (
    InputParseError,
    InputValidationError,
    dump_document,
    ingest_image,
    load_document,
    parse_document,
    read_pgm,
)


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_bytes(data) if isinstance(data, bytes) else p.write_text(data)
    return p


def test_grid_function_value_order():
    # axis 0 varies fastest: the second entry is cell (1, 0), not (0, 1)
    doc = {"kind": "grid-function", "breakpoints": [[0, 1], [0, 1]], "values": list(range(9))}
    h = parse_document(doc)
    assert h.values[1, 0] == 1 and h.values[0, 1] == 3 and h.values[1, 1] == 4


def test_round_trips():
    rng = np.random.default_rng(0)
    objs = [
        F.random_grid_function(rng),
        GridRegion.closed_box([0, 0], [1, 2]),
        F.cone(),
        F.unit_square(),
    ]
    for obj in objs:
        again = parse_document(json.loads(json.dumps(dump_document(obj))))
        assert type(again) is type(obj)
    assert again.cells == objs[-1].cells


def test_region_from_cell_list():
    doc = {"kind": "grid-region", "breakpoints": [[0, 1]], "cells": [[1]]}
    r = parse_document(doc)
    assert r.cells == {(1,)}


def test_fixture_files_load():
    import pathlib

    root = pathlib.Path(__file__).resolve().parents[1] / "fixtures"
    assert isinstance(load_document(root / "box.json"), GridRegion)
    assert isinstance(load_document(root / "tent.json"), PLFunction)
    assert isinstance(load_document(root / "square.json"), SimplicialSet)
    assert isinstance(load_document(root / "step2d.json"), ConstructibleFunction)


@pytest.mark.parametrize(
    "doc,fragment",
    [
        ([], "top level"),
        ({"breakpoints": [[0, 1]]}, "kind"),
        ({"kind": "mesh"}, "kind"),
        ({"kind": "grid-function", "breakpoints": [[0, 1]], "values": [1, 2]}, "3 cells"),
        ({"kind": "grid-function", "breakpoints": [[1, 0]], "values": [1, 2, 3]}, "breakpoints"),
        ({"kind": "grid-function", "breakpoints": [[0, 1]]}, "values"),
        ({"kind": "grid-region", "breakpoints": [[0, 1]], "mask": [0, 2, 0]}, "0 or 1"),
        ({"kind": "simplicial-set", "vertices": [[0.0]], "cells": [[0, 4]]}, r"cells\[0\]"),
        ({"kind": "simplicial-function", "vertices": [[0.0], [1.0]], "cells": [[0, 1]], "values": [1]}, "one entry per vertex"),
        ({"kind": "grid-function", "breakpoints": [[0, 1]], "values": ["a", 1, 2]}, "numeric"),
    ],
)
def test_validation_errors(doc, fragment):
    with pytest.raises(InputValidationError, match=fragment):
        parse_document(doc)


def test_parse_errors(tmp_path):
    with pytest.raises(InputParseError, match="line 2"):
        load_document(write(tmp_path, "bad.json", '{\n  "kind": }'))
    with pytest.raises(InputParseError):
        load_document(tmp_path / "missing.json")


def test_pgm_ascii_and_binary(tmp_path):
    p2 = write(tmp_path, "a.pgm", "P2\n# comment\n3 2\n# another\n10\n0 5 10\n10 5 0\n")
    pix, maxv = read_pgm(p2)
    assert maxv == 10 and pix.tolist() == [[0, 5, 10], [10, 5, 0]]
    p5 = write(tmp_path, "b.pgm", b"P5\n2 2\n255\n" + bytes([0, 255, 128, 1]))
    pix, maxv = read_pgm(p5)
    assert pix.tolist() == [[0, 255], [128, 1]]
    wide = write(tmp_path, "c.pgm", b"P5 1 2 65535\n" + (1000).to_bytes(2, "big") + (65535).to_bytes(2, "big"))
    pix, maxv = read_pgm(wide)
    assert pix.tolist() == [[1000], [65535]] and maxv == 65535


@pytest.mark.parametrize(
    "data",
    [b"P6\n1 1\n255\n\x00", b"P5\n2 2\n255\n\x00", b"P2\n2 1\n", b"P2\n1 1\n70000\n1\n", b"P2\n1 1\n5\n9\n", b"P2\nx 1\n5\n1\n"],
)
def test_pgm_errors(tmp_path, data):
    with pytest.raises(InputParseError):
        read_pgm(write(tmp_path, "e.pgm", data))


def test_ingest_examples(tmp_path):
    one = write(tmp_path, "one.pgm", "P2\n1 1\n7\n7\n")
    h = ingest_image(one)
    assert (h.values == 1.0).all()  # indicator of the closed unit square
    two = write(tmp_path, "two.pgm", "P2\n2 1\n255\n255 0\n")
    h = ingest_image(two, "max")
    assert h.values[1, 2] == 1.0  # shared edge takes the max
    assert h.values[1, 3] == 0.0
    h = ingest_image(two, "min")
    assert h.values[1, 2] == 0.0 and h.values[1, 1] == 1.0
    with pytest.raises(ValueError):
        ingest_image(two, "mean")
