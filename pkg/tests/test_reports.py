import json

import numpy as np
import pytest

from afderiv.linalg_core import BlockAlgebra
from afderiv.reports import (
    check_envelope, clean, decode_element, encode_element, envelope, read_json, write_json,
)


def test_clean_makes_json_safe():
    obj = {1: np.float64(np.nan), "a": (np.int64(3), np.bool_(True)), "b": np.arange(2.0),
           "c": float("inf"), "d": 0.5}
    out = clean(obj)
    assert out == {"1": None, "a": [3, True], "b": [0.0, 1.0], "c": None, "d": 0.5}
    json.dumps(out, allow_nan=False)


def test_element_round_trip(rng, tmp_path):
    alg = BlockAlgebra((3, 1, 2))
    x = alg.random_unitary(rng)
    p = tmp_path / "x.json"
    write_json(p, envelope("element-test", {"x": encode_element(x)}))
    d = read_json(p)
    assert check_envelope(d) == "element-test"
    y = decode_element(d["x"])
    assert y.algebra.block_dims == (3, 1, 2)
    assert (x - y).norm() == 0.0


def test_envelope_errors():
    with pytest.raises(ValueError):
        check_envelope({"schema": "afderiv/x", "schema_version": 99})
    with pytest.raises(ValueError):
        check_envelope({"schema": 3})
    with pytest.raises(ValueError):
        decode_element({"format": "other"})
