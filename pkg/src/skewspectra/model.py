"""JSON model documents: shift, embedding, rotation and observable.

Example::

    {"alphabet_size": 2, "matrix": ["11", "11"],
     "embedding": {"base": 3, "digits": [0, 2]},
     "alpha": 0.6180339887498949,
     "observable": {"family": "linear_cos", "a_s": 1, "a_u": 1, "amp": 0.2}}

An optional ``"subshift"`` entry ``{"window": w, "blocks": [[...], ...]}``
restricts the shift to the listed allowed ``w``-blocks, and an optional
``"sequence"`` entry holds a bi-infinite sequence in block notation.
"""

from __future__ import annotations

import json
import math

from .circle import Cocycle
from .observables import observable_from_dict
from .skew import SkewSystem
from .symbolic import BiSequence, DomainError, EmbeddingSpec, TransitionMatrix

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def system_to_dict(sys: SkewSystem) -> dict:
    from .dimension import SubSFT

    sft = sys.sft
    parent = sft.parent if isinstance(sft, SubSFT) else sft
    d = {
        "alphabet_size": parent.size,
        "matrix": parent.to_rows(),
        "embedding": {"base": sys.spec.base, "digits": list(sys.spec.digits)},
        "alpha": sys.alpha,
        "observable": sys.F.to_dict(),
        "depth": sys.depth,
    }
    if isinstance(sft, SubSFT):
        d["subshift"] = sft.to_dict()
    return d


def _parse_alpha(v) -> float:
    if isinstance(v, str):
        named = {"golden": GOLDEN, "sqrt2": math.sqrt(2.0) - 1.0, "pi": math.pi - 3.0}
        if v not in named:
            raise DomainError(f"unknown rotation name {v!r}")
        return named[v]
    return float(v)


def system_from_dict(d: dict) -> SkewSystem:
    from .dimension import SubSFT

    try:
        size = int(d["alphabet_size"])
        rows = d["matrix"]
        if len(rows) != size or any(len(r) != size for r in rows):
            raise DomainError("matrix must have alphabet_size rows of alphabet_size bits")
        sft = TransitionMatrix.from_rows(rows)
        emb = d.get("embedding") or {}
        spec = (EmbeddingSpec(int(emb["base"]), tuple(emb["digits"])) if "digits" in emb
                else EmbeddingSpec.default(size, emb.get("base")))
        alpha = d.get("alpha", (d.get("cocycle") or {}).get("alpha"))
        if alpha is None:
            raise DomainError("model needs a rotation number 'alpha'")
        F = observable_from_dict(d["observable"])
    except (KeyError, TypeError) as e:
        raise DomainError(f"malformed model: missing or invalid {e}") from e
    if "subshift" in d:
        sft = SubSFT.from_dict(sft, d["subshift"])
    return SkewSystem(sft, spec, Cocycle.rotation(_parse_alpha(alpha)), F, d.get("depth"))


def load_model(path: str) -> tuple[SkewSystem, dict]:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except json.JSONDecodeError as e:
        raise DomainError(f"model file is not valid JSON: {e}") from e
    if not isinstance(d, dict):
        raise DomainError("model file must hold a JSON object")
    return system_from_dict(d), d


def sequence_from_dict(d: dict) -> BiSequence:
    return BiSequence.from_dict(d)
