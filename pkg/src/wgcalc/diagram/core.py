"""
Tensor diagrams: spaces, decorated boxes, wires, and numeric contraction.

A box's black decorations are its ket (output) legs and its white decorations
its bra (input) legs. For a Haar-marked box the black legs, in order, form the
row multi-index of the unitary and the white legs the column multi-index.
Every wire is evaluated as index identification in the fixed bases; a wire
joining two decorations of equal shading is the implicit Bell pairing.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "BLACK", "WHITE", "VARIANTS", "Space", "Decoration", "HaarMark", "Box",
    "Diagram", "Monomial", "DiagramError", "check_diagram", "validate",
    "contract", "contract_batch", "instantiate", "haar_tensor",
    "bell_vector", "bell_form", "max_entangled", "identity_box", "ket", "bra",
    "matrix_box", "is_delta_box", "to_exact",
]

BLACK, WHITE = "black", "white"
VARIANTS = ("U", "Ubar", "Ustar", "Utrans")

Endpoint = tuple  # (box index, decoration index), both 0-based


class DiagramError(ValueError):
    def __init__(self, problems: Sequence[str] | str):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class Space:
    id: str
    dim: int
    shape: str = "round"

    def __post_init__(self):
        if int(self.dim) < 1:
            raise DiagramError(f"space {self.id!r} must have dim >= 1")


@dataclass(frozen=True)
class Decoration:
    space: str
    shading: str

    def flipped(self) -> Decoration:
        return Decoration(self.space, WHITE if self.shading == BLACK else BLACK)


@dataclass(frozen=True)
class HaarMark:
    group: str
    variant: str = "U"


@dataclass(frozen=True, eq=False)
class Box:
    label: str
    decorations: tuple[Decoration, ...]
    payload: object  # np.ndarray or HaarMark

    def __post_init__(self):
        object.__setattr__(self, "decorations", tuple(self.decorations))
        if not isinstance(self.payload, HaarMark):
            object.__setattr__(self, "payload", np.asarray(self.payload))

    @property
    def is_haar(self) -> bool:
        return isinstance(self.payload, HaarMark)

    def legs(self, shading: str) -> list[int]:
        return [i for i, d in enumerate(self.decorations) if d.shading == shading]


@dataclass(frozen=True)
class Monomial:
    """``coeff * prod(dim(space) ** e)``; coeff is a Fraction or a complex."""
    coeff: object = Fraction(1)
    exponents: tuple[tuple[str, int], ...] = ()

    @classmethod
    def of(cls, coeff=Fraction(1), **exps) -> Monomial:
        return cls(coeff, tuple(sorted((k, v) for k, v in exps.items() if v)))

    def times(self, other: Monomial) -> Monomial:
        exps = dict(self.exponents)
        for k, v in other.exponents:
            exps[k] = exps.get(k, 0) + v
        return Monomial(self.coeff * other.coeff,
                        tuple(sorted((k, v) for k, v in exps.items() if v)))

    def bump(self, space: str, by: int = 1) -> Monomial:
        return self.times(Monomial(Fraction(1), ((space, by),)))

    def evaluate(self, dims: Mapping[str, int]):
        out = self.coeff
        for k, v in self.exponents:
            out = out * Fraction(dims[k]) ** v
        return out


@dataclass(frozen=True, eq=False)
class Diagram:
    spaces: Mapping[str, Space]
    boxes: tuple[Box, ...] = ()
    wires: tuple[tuple[Endpoint, Endpoint], ...] = ()
    scale: Monomial = field(default_factory=Monomial)
    # (group, alpha, beta) for every removal already applied
    history: tuple = ()

    def __post_init__(self):
        if not isinstance(self.spaces, dict):
            spaces = {s.id: s for s in self.spaces}
        else:
            spaces = dict(self.spaces)
        object.__setattr__(self, "spaces", spaces)
        object.__setattr__(self, "boxes", tuple(self.boxes))
        object.__setattr__(self, "wires", tuple(
            (tuple(a), tuple(b)) for a, b in self.wires))

    @property
    def dims(self) -> dict[str, int]:
        return {k: s.dim for k, s in self.spaces.items()}

    def dim(self, dec: Decoration) -> int:
        return self.spaces[dec.space].dim

    def groups(self) -> list[str]:
        out = []
        for b in self.boxes:
            if b.is_haar and b.payload.group not in out:
                out.append(b.payload.group)
        return out

    def partner_map(self) -> dict:
        out = {}
        for a, b in self.wires:
            out[a] = b
            out[b] = a
        return out

    def free_endpoints(self) -> list[Endpoint]:
        used = self.partner_map()
        return [(i, j) for i, b in enumerate(self.boxes)
                for j in range(len(b.decorations)) if (i, j) not in used]

    def with_boxes(self, boxes, wires=None, **kw) -> Diagram:
        return replace(self, boxes=tuple(boxes),
                       wires=self.wires if wires is None else tuple(wires), **kw)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def _unitary_shape(d: Diagram, box: Box) -> tuple[tuple[int, ...], tuple[int, ...]]:
    rows = tuple(d.dim(box.decorations[i]) for i in box.legs(BLACK))
    cols = tuple(d.dim(box.decorations[i]) for i in box.legs(WHITE))
    return rows, cols


def check_diagram(d: Diagram) -> list[str]:
    """Every rule violation, each with box/decoration coordinates."""
    problems = []
    group_dims = {}
    for bi, box in enumerate(d.boxes):
        for di, dec in enumerate(box.decorations):
            if dec.space not in d.spaces:
                problems.append(f"box {bi} ({box.label}) decoration {di}: unknown space {dec.space!r}")
            if dec.shading not in (BLACK, WHITE):
                problems.append(f"box {bi} ({box.label}) decoration {di}: bad shading {dec.shading!r}")
        if any(dec.space not in d.spaces for dec in box.decorations):
            continue
        if box.is_haar:
            mark = box.payload
            if mark.variant not in VARIANTS:
                problems.append(f"box {bi} ({box.label}): unknown variant {mark.variant!r}")
            rows, cols = _unitary_shape(d, box)
            nr, nc = int(np.prod(rows)), int(np.prod(cols))
            if nr != nc:
                problems.append(f"box {bi} ({box.label}): unitary legs {rows} x {cols} are not square")
            prev = group_dims.setdefault(mark.group, nr)
            if prev != nr:
                problems.append(f"box {bi} ({box.label}): group {mark.group!r} mixes dimensions {prev} and {nr}")
        else:
            want = tuple(d.dim(dec) for dec in box.decorations)
            if box.payload.shape != want:
                problems.append(f"box {bi} ({box.label}): payload shape {box.payload.shape} != decoration dims {want}")
    seen = set()
    for wi, (a, b) in enumerate(d.wires):
        bad = False
        for e in (a, b):
            if not (0 <= e[0] < len(d.boxes) and 0 <= e[1] < len(d.boxes[e[0]].decorations)):
                problems.append(f"wire {wi}: endpoint {list(e)} does not exist")
                bad = True
            elif e in seen:
                problems.append(f"wire {wi}: endpoint {list(e)} already occupied")
            seen.add(e)
        if a == b:
            problems.append(f"wire {wi}: joins endpoint {list(a)} to itself")
        if bad:
            continue
        da = d.boxes[a[0]].decorations[a[1]]
        db = d.boxes[b[0]].decorations[b[1]]
        if da.space != db.space:
            problems.append(f"wire {wi}: joins space {da.space!r} at {list(a)} "
                            f"to space {db.space!r} at {list(b)}")
    return problems


def validate(d: Diagram) -> Diagram:
    problems = check_diagram(d)
    if problems:
        raise DiagramError(problems)
    return d


# ---------------------------------------------------------------------------
# special boxes
# ---------------------------------------------------------------------------

def _eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def identity_box(space: Space, label: str = "I") -> Box:
    return Box(label, (Decoration(space.id, BLACK), Decoration(space.id, WHITE)), _eye(space.dim))


def bell_vector(space: Space, label: str = "Bell") -> Box:
    """``sum_i e_i (x) e_i``."""
    return Box(label, (Decoration(space.id, BLACK), Decoration(space.id, BLACK)), _eye(space.dim))


def bell_form(space: Space, label: str = "Bell*") -> Box:
    return Box(label, (Decoration(space.id, WHITE), Decoration(space.id, WHITE)), _eye(space.dim))


def max_entangled(space: Space, normalized: bool = False, label: str = "E") -> Box:
    """
    ``|Bell><Bell|`` with legs (black, black, white, white); the normalized
    version carries the factor ``1/dim`` as exact rationals.
    """
    n = space.dim
    data = np.einsum("ac,bd->acbd", _eye(n), _eye(n))
    if normalized:
        data = to_exact(data) * Fraction(1, n)
    decs = (Decoration(space.id, BLACK),) * 2 + (Decoration(space.id, WHITE),) * 2
    return Box(label, decs, data)


def ket(space: Space, label: str = "ket") -> Box:
    v = np.zeros(space.dim, dtype=np.int64)
    v[0] = 1
    return Box(label, (Decoration(space.id, BLACK),), v)


def bra(space: Space, label: str = "bra") -> Box:
    v = np.zeros(space.dim, dtype=np.int64)
    v[0] = 1
    return Box(label, (Decoration(space.id, WHITE),), v)


def matrix_box(label: str, matrix, out_spaces: Sequence[Space], in_spaces: Sequence[Space]) -> Box:
    """A box for an operator ``(x) in_spaces -> (x) out_spaces`` given as a matrix."""
    shape = tuple(s.dim for s in out_spaces) + tuple(s.dim for s in in_spaces)
    data = np.asarray(matrix).reshape(shape)
    decs = tuple(Decoration(s.id, BLACK) for s in out_spaces) + \
        tuple(Decoration(s.id, WHITE) for s in in_spaces)
    return Box(label, decs, data)


def is_delta_box(box: Box) -> bool:
    """Two legs on one space carrying the identity matrix: identity and Bell boxes."""
    if box.is_haar or len(box.decorations) != 2:
        return False
    if box.decorations[0].space != box.decorations[1].space:
        return False
    data = box.payload
    return data.ndim == 2 and data.shape[0] == data.shape[1] and \
        bool(np.all(data == np.eye(data.shape[0], dtype=np.int64)))


# ---------------------------------------------------------------------------
# contraction
# ---------------------------------------------------------------------------

def to_exact(arr) -> np.ndarray:
    """Object array of Fractions; floats convert exactly, complex parts must vanish."""
    arr = np.asarray(arr)
    if arr.dtype == object:
        return np.vectorize(Fraction, otypes=[object])(arr) if arr.size else arr
    if np.iscomplexobj(arr):
        if np.any(arr.imag != 0):
            raise DiagramError("complex payload cannot be contracted exactly")
        arr = arr.real
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = Fraction(int(x)) if arr.dtype.kind in "iub" else Fraction(float(x))
    return out


def _is_exact(arr: np.ndarray) -> bool:
    return arr.dtype == object or arr.dtype.kind in "iub"


def _contract_arrays(arrays, legs, wires, free_order):
    """Contract tensors whose axes are labelled by endpoints; wires in the given order."""
    arrays = list(arrays)
    legs = [list(l) for l in legs]
    owner = {e: t for t, l in enumerate(legs) for e in l}
    alive = [True] * len(arrays)
    for a, b in wires:
        ta, tb = owner[a], owner[b]
        ia, ib = legs[ta].index(a), legs[tb].index(b)
        if ta == tb:
            arrays[ta] = np.trace(arrays[ta], axis1=ia, axis2=ib)
            legs[ta] = [e for e in legs[ta] if e not in (a, b)]
        else:
            arrays[ta] = np.tensordot(arrays[ta], arrays[tb], axes=([ia], [ib]))
            legs[ta] = [e for e in legs[ta] if e != a] + [e for e in legs[tb] if e != b]
            for e in legs[tb]:
                owner[e] = ta
            alive[tb] = False
            arrays[tb], legs[tb] = None, []
    result, result_legs = None, []
    for t in range(len(arrays)):
        if not alive[t]:
            continue
        if result is None:
            result, result_legs = arrays[t], legs[t]
        else:
            result = np.tensordot(result, arrays[t], axes=0)
            result_legs = result_legs + legs[t]
    if result is None:
        return np.array(1)
    perm = [result_legs.index(e) for e in free_order]
    return np.transpose(result, perm) if perm else result


def _wire_order(d: Diagram):
    return sorted((tuple(sorted(w)) for w in d.wires))


def contract(d: Diagram, exact: bool | None = None):
    """
    Value of a diagram without Haar boxes.

    Returns a tensor whose axes are the free decorations ordered by
    (box index, decoration index), or a scalar when no leg is free. With
    ``exact=None`` the computation is exact whenever every payload is an
    integer or object (Fraction) array.
    """
    validate(d)
    if any(b.is_haar for b in d.boxes):
        raise DiagramError("cannot contract a diagram containing Haar boxes; instantiate it first")
    arrays = [b.payload for b in d.boxes]
    if exact is None:
        exact = all(_is_exact(a) for a in arrays) and not isinstance(d.scale.coeff, complex)
    if exact:
        arrays = [to_exact(a) for a in arrays]
    else:
        arrays = [np.asarray(a, dtype=complex) for a in arrays]
    legs = [[(i, j) for j in range(len(b.decorations))] for i, b in enumerate(d.boxes)]
    out = _contract_arrays(arrays, legs, _wire_order(d), d.free_endpoints())
    factor = d.scale.evaluate(d.dims)
    if not exact:
        factor = complex(factor)
    if np.ndim(out) == 0:
        return out.item() * factor if hasattr(out, "item") else out * factor
    return out * factor


def haar_tensor(d: Diagram, box: Box, unitary: np.ndarray) -> np.ndarray:
    """The (possibly batched) tensor of a Haar box for the given unitary."""
    u = np.asarray(unitary)
    variant = box.payload.variant
    if variant == "Ubar":
        u = u.conj()
    elif variant == "Ustar":
        u = np.swapaxes(u.conj(), -1, -2)
    elif variant == "Utrans":
        u = np.swapaxes(u, -1, -2)
    rows, cols = _unitary_shape(d, box)
    batch = u.shape[:-2]
    t = u.reshape(batch + rows + cols)
    black, white = box.legs(BLACK), box.legs(WHITE)
    axis_of = {}
    for r, i in enumerate(black):
        axis_of[i] = r
    for c, i in enumerate(white):
        axis_of[i] = len(rows) + c
    nb = len(batch)
    order = list(range(nb)) + [nb + axis_of[i] for i in range(len(box.decorations))]
    return np.transpose(t, order)


def instantiate(d: Diagram, unitaries: Mapping[str, np.ndarray]) -> Diagram:
    """Replace Haar marks by constant tensors of the given unitaries."""
    boxes = []
    for b in d.boxes:
        if b.is_haar and b.payload.group in unitaries:
            boxes.append(Box(b.label, b.decorations, haar_tensor(d, b, unitaries[b.payload.group])))
        else:
            boxes.append(b)
    return d.with_boxes(boxes)


def contract_batch(d: Diagram, unitaries: Mapping[str, np.ndarray]) -> np.ndarray:
    """
    Contract once per sample; ``unitaries[group]`` has shape ``(M, N, N)``.

    Returns an array with a leading sample axis followed by the free legs.
    """
    validate(d)
    operands = []
    labels = {}
    for w, (a, b) in enumerate(_wire_order(d)):
        labels[a] = labels[b] = w
    free = d.free_endpoints()
    for e in free:
        labels[e] = len(labels)
    if len(set(labels.values())) > 52:
        raise DiagramError("diagram too large for batched contraction")
    for i, b in enumerate(d.boxes):
        sub = [labels[(i, j)] for j in range(len(b.decorations))]
        if b.is_haar:
            if b.payload.group not in unitaries:
                raise DiagramError(f"no samples for group {b.payload.group!r}")
            operands += [haar_tensor(d, b, unitaries[b.payload.group]), [Ellipsis] + sub]
        else:
            operands += [np.asarray(b.payload, dtype=complex), sub]
    out = np.einsum(*operands, [Ellipsis] + [labels[e] for e in free], optimize=True)
    return out * complex(d.scale.evaluate(d.dims))
