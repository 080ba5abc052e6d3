"""Instance and report documents (JSON).

Instance document::

    {
      "block_dims": [2, 2],
      "ideal_blocks": [1],                      # 1-based
      "elements": [
        {"name": "a", "blocks": [[[0, 0], [5, 0], [0, 0], [0, 0]], ...]}
      ],
      "polynomials": [{"name": "p", "coefficients": [[0, 0], [1, 0]]}],
      "factors": [[[1, 0], 2], [[3, 0], 1]]
    }

Each block is a row-major list of ``[re, im]`` pairs (a list of rows is
accepted on input).  ``polynomials`` and ``factors`` are optional.
Floats are written with ``repr`` so every double round-trips exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .algebra import AlgebraElement, IdealSpec, Polynomial
from .errors import InvalidInput

__all__ = [
    "ParseError",
    "Instance",
    "load_instance",
    "parse_instance",
    "instance_to_dict",
    "dump_json",
    "encode_complex",
    "encode_matrix",
]


class ParseError(InvalidInput):
    code = "parse-error"

    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


@dataclass
class Instance:
    ideal: IdealSpec
    elements: dict[str, AlgebraElement] = field(default_factory=dict)
    polynomials: dict[str, Polynomial] = field(default_factory=dict)
    factors: list[tuple[complex, int]] | None = None

    def element_list(self) -> list[AlgebraElement]:
        return list(self.elements.values())


def _complex(v, loc: str) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
    ):
        return complex(float(v[0]), float(v[1]))
    raise ParseError(loc, f"expected [re, im] pair or number, got {v!r}")


def _block(raw, n: int, loc: str) -> np.ndarray:
    if not isinstance(raw, list):
        raise ParseError(loc, "block must be a list")
    if n == 1 and len(raw) == 1 and isinstance(raw[0], list) and len(raw[0]) == 1:
        flat = raw[0]
    elif len(raw) == n * n:
        flat = raw
    elif len(raw) == n and all(isinstance(r, list) and len(r) == n for r in raw):
        flat = [x for row in raw for x in row]
    else:
        raise ParseError(loc, f"expected {n * n} entries for a {n}x{n} block, got {len(raw)}")
    vals = [_complex(v, f"{loc}[{i}]") for i, v in enumerate(flat)]
    arr = np.array(vals, dtype=complex).reshape(n, n)
    if not np.all(np.isfinite(arr)):
        raise ParseError(loc, "non-finite entry")
    return arr


def parse_instance(doc: Any, source: str = "<instance>") -> Instance:
    if not isinstance(doc, dict):
        raise ParseError(source, "top level must be an object")
    dims = doc.get("block_dims")
    if not isinstance(dims, list) or not dims or not all(isinstance(d, int) and d >= 1 for d in dims):
        raise ParseError(f"{source}:block_dims", "must be a nonempty list of positive integers")
    ideal_raw = doc.get("ideal_blocks", [])
    if not isinstance(ideal_raw, list) or not all(isinstance(b, int) for b in ideal_raw):
        raise ParseError(f"{source}:ideal_blocks", "must be a list of integers")
    for b in ideal_raw:
        if not 1 <= b <= len(dims):
            raise ParseError(f"{source}:ideal_blocks", f"index {b} outside 1..{len(dims)}")
    ideal = IdealSpec.of(dims, [b - 1 for b in ideal_raw])

    inst = Instance(ideal)
    for k, el in enumerate(doc.get("elements", [])):
        loc = f"{source}:elements[{k}]"
        if not isinstance(el, dict) or "blocks" not in el:
            raise ParseError(loc, "element must be an object with 'blocks'")
        name = str(el.get("name", f"a{k + 1}"))
        blocks = el["blocks"]
        if not isinstance(blocks, list) or len(blocks) != len(dims):
            raise ParseError(f"{loc}.blocks", f"expected {len(dims)} blocks")
        mats = [_block(blk, n, f"{loc}.blocks[{b}]") for b, (blk, n) in enumerate(zip(blocks, dims))]
        if name in inst.elements:
            raise ParseError(loc, f"duplicate element name {name!r}")
        inst.elements[name] = AlgebraElement(ideal.signature, mats)

    for k, p in enumerate(doc.get("polynomials", [])):
        loc = f"{source}:polynomials[{k}]"
        if not isinstance(p, dict) or not isinstance(p.get("coefficients"), list):
            raise ParseError(loc, "polynomial must be an object with a 'coefficients' list")
        coeffs = [_complex(c, f"{loc}.coefficients[{i}]") for i, c in enumerate(p["coefficients"])]
        inst.polynomials[str(p.get("name", f"p{k + 1}"))] = Polynomial(coeffs)

    if "factors" in doc:
        factors = []
        for k, f in enumerate(doc["factors"]):
            loc = f"{source}:factors[{k}]"
            if not (isinstance(f, list) and len(f) == 2 and isinstance(f[1], int) and f[1] >= 1):
                raise ParseError(loc, "factor must be [t, k] with integer k >= 1")
            factors.append((_complex(f[0], loc), f[1]))
        inst.factors = factors
    return inst


def load_instance(path: str | Path) -> Instance:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(str(path), f"cannot read file: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from exc
    return parse_instance(doc, str(path))


def encode_complex(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_matrix(m: np.ndarray) -> list[list[float]]:
    return [encode_complex(v) for v in np.asarray(m).reshape(-1)]


def instance_to_dict(inst: Instance) -> dict:
    doc: dict[str, Any] = {
        "block_dims": list(inst.ideal.signature.block_dims),
        "ideal_blocks": [b + 1 for b in inst.ideal.sorted_ideal_blocks],
        "elements": [
            {"name": name, "blocks": [encode_matrix(b) for b in el.blocks]}
            for name, el in inst.elements.items()
        ],
    }
    if inst.polynomials:
        doc["polynomials"] = [
            {"name": name, "coefficients": [encode_complex(c) for c in p.coefficients]}
            for name, p in inst.polynomials.items()
        ]
    if inst.factors is not None:
        doc["factors"] = [[encode_complex(t), k] for t, k in inst.factors]
    return doc


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, complex):
        return encode_complex(obj)
    return obj


def dump_json(doc: dict) -> str:
    """Deterministic JSON text: sorted keys, shortest round-trip floats."""
    return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"
