"""JSON reports, CSV path traces and replay records."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .linalg_core import BlockAlgebra, Element

SCHEMA_VERSION = 1
ELEMENT_FORMAT = "afderiv/element"


def clean(obj: Any) -> Any:
    """Make ``obj`` JSON-safe: numpy scalars to Python, non-finite floats to ``None``."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def encode_element(x: Element) -> dict:
    return {
        "format": ELEMENT_FORMAT,
        "block_dims": list(x.algebra.block_dims),
        "blocks": [{"real": b.real.ravel().tolist(), "imag": b.imag.ravel().tolist()}
                   for b in x.blocks],
    }


def decode_element(d: dict) -> Element:
    if d.get("format") != ELEMENT_FORMAT:
        raise ValueError(f"not an element record: {d.get('format')!r}")
    alg = BlockAlgebra(tuple(d["block_dims"]))
    blocks = []
    for dim, blk in zip(alg.block_dims, d["blocks"]):
        blocks.append((np.asarray(blk["real"]) + 1j * np.asarray(blk["imag"])).reshape(dim, dim))
    return Element(alg, tuple(blocks))


def envelope(kind: str, payload: dict) -> dict:
    return {"schema": f"afderiv/{kind}", "schema_version": SCHEMA_VERSION, **payload}


def check_envelope(d: dict) -> str:
    """Return the record kind, or raise if the record is not a versioned report."""
    schema = d.get("schema", "")
    if not isinstance(schema, str) or not schema.startswith("afderiv/"):
        raise ValueError("not an afderiv report")
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {d.get('schema_version')}")
    return schema.split("/", 1)[1]


def write_json(path: Path, obj: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(clean(obj), indent=1, sort_keys=True) + "\n")


def read_json(path: Path) -> dict:
    return json.loads(Path(path).read_text())


TRACE_FIELDS = ("t", "segment", "label", "commutator", "unitarity_defect")


def write_trace(path: Path, rows: Iterable[tuple]):
    """Plot-ready CSV: global parameter, segment index and label, ``||[h,u_t]||``, unitarity defect."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_FIELDS)
        for t, idx, label, c, u in rows:
            w.writerow([f"{t:.10g}", idx, label, f"{c:.10g}", f"{u:.10g}"])
