"""
JSON reading and writing of diagrams.

Wire endpoints are ``[box, decoration]`` with 0-based indices. Constant data
is a nested list whose entries are numbers, rational strings ``"a/b"`` or
complex strings such as ``"1+2j"``. An optional ``"scale"`` object holds a
``"coeff"`` and per-space ``"exponents"``.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import Box, Decoration, Diagram, DiagramError, HaarMark, Monomial, Space, validate

__all__ = ["diagram_from_dict", "diagram_to_dict", "load_diagram", "dump_diagram", "parse_scalar"]


def parse_scalar(x):
    if isinstance(x, bool):
        raise DiagramError(f"bad scalar {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            try:
                return complex(x.replace(" ", ""))
            except ValueError:
                raise DiagramError(f"bad scalar {x!r}") from None
    raise DiagramError(f"bad scalar {x!r}")


def _parse_data(data, where: str) -> np.ndarray:
    def walk(x):
        if isinstance(x, list):
            return [walk(y) for y in x]
        return parse_scalar(x)

    try:
        values = walk(data)
        arr = np.array(values, dtype=object)
    except DiagramError as exc:
        raise DiagramError(f"{where}: {exc}") from None
    if any(isinstance(v, complex) for v in arr.flat):
        return arr.astype(complex)
    if arr.ndim == 0:
        arr = np.array(arr.item(), dtype=object)
    return arr


def _scalar_to_json(x):
    if isinstance(x, (Fraction, int, np.integer)):
        x = Fraction(x)
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    x = complex(x)
    if x.imag == 0:
        return x.real
    return str(x)


def diagram_from_dict(obj: dict) -> Diagram:
    problems = []
    try:
        spaces = [Space(str(s["id"]), int(s["dim"]), s.get("shape", "round"))
                  for s in obj["spaces"]]
    except (KeyError, TypeError, ValueError, DiagramError) as exc:
        raise DiagramError(f"spaces: {exc}") from None
    boxes = []
    for bi, raw in enumerate(obj.get("boxes", [])):
        try:
            decs = tuple(Decoration(str(x["space"]), str(x["shading"])) for x in raw["decorations"])
            payload = raw["payload"]
            kind = payload.get("kind")
            if kind == "haar":
                pl = HaarMark(str(payload["group"]), str(payload.get("variant", "U")))
            elif kind == "const":
                pl = _parse_data(payload["data"], f"box {bi}")
            else:
                problems.append(f"box {bi}: unknown payload kind {kind!r}")
                continue
            boxes.append(Box(str(raw.get("label", f"B{bi}")), decs, pl))
        except (KeyError, TypeError) as exc:
            problems.append(f"box {bi}: missing field {exc}")
        except DiagramError as exc:
            problems.extend(exc.problems)
    wires = []
    for wi, w in enumerate(obj.get("wires", [])):
        try:
            (a, b) = w
            wires.append(((int(a[0]), int(a[1])), (int(b[0]), int(b[1]))))
        except (TypeError, ValueError, IndexError):
            problems.append(f"wire {wi}: expected [[box, decoration], [box, decoration]]")
    if problems:
        raise DiagramError(problems)
    scale = Monomial()
    if "scale" in obj:
        sc = obj["scale"]
        scale = Monomial.of(parse_scalar(sc.get("coeff", 1)),
                            **{k: int(v) for k, v in sc.get("exponents", {}).items()})
    return validate(Diagram(spaces, boxes, wires, scale))


def diagram_to_dict(d: Diagram) -> dict:
    boxes = []
    for b in d.boxes:
        if b.is_haar:
            payload = {"kind": "haar", "group": b.payload.group, "variant": b.payload.variant}
        else:
            data = np.vectorize(_scalar_to_json, otypes=[object])(b.payload) if b.payload.size else b.payload
            payload = {"kind": "const", "data": np.asarray(data, dtype=object).tolist()}
        boxes.append({
            "label": b.label,
            "decorations": [{"space": x.space, "shading": x.shading} for x in b.decorations],
            "payload": payload,
        })
    out = {
        "spaces": [{"id": s.id, "dim": s.dim, "shape": s.shape} for s in d.spaces.values()],
        "boxes": boxes,
        "wires": [[list(a), list(b)] for a, b in d.wires],
    }
    if d.scale != Monomial():
        out["scale"] = {"coeff": _scalar_to_json(d.scale.coeff), "exponents": dict(d.scale.exponents)}
    return out


def load_diagram(path) -> Diagram:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DiagramError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return diagram_from_dict(obj)


def dump_diagram(d: Diagram, path=None) -> str:
    text = json.dumps(diagram_to_dict(d), indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
