"""
Removal procedure: expectation of a diagram over Haar unitaries.

After normalization a group consists of ``U`` boxes and ``Ubar`` boxes. A
removal ``(alpha, beta)`` erases them, links the white legs of the i-th U box
to the white legs of the ``alpha(i)``-th Ubar box and the black legs by
``beta``, and carries the weight ``Wg(N, alpha beta^{-1})``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..perm import CycleType, Permutation, all_permutations
from ..weingarten import format_cycle_type, weingarten_table
from .core import (
    BLACK, WHITE, Box, Decoration, Diagram, DiagramError, HaarMark, Monomial,
    contract, identity_box, is_delta_box, validate,
)

__all__ = [
    "Removal", "SymbolicWeight", "normalize_haar_boxes", "group_boxes",
    "group_dimension", "removals", "apply_removal", "simplify", "expectation",
    "expand", "symbolic_moment", "evaluate_symbolic",
]


@dataclass(frozen=True)
class Removal:
    alpha: Permutation
    beta: Permutation

    def __post_init__(self):
        if self.alpha.size != self.beta.size:
            raise DiagramError("removal permutations must have equal sizes")

    @property
    def weight_class(self) -> CycleType:
        return (self.alpha * self.beta.inverse()).cycle_type


def normalize_haar_boxes(d: Diagram) -> Diagram:
    """Rewrite ``U*`` as ``Ubar`` and ``U^t`` as ``U``, flipping every shading."""
    boxes = []
    for b in d.boxes:
        if b.is_haar and b.payload.variant in ("Ustar", "Utrans"):
            variant = "Ubar" if b.payload.variant == "Ustar" else "U"
            boxes.append(Box(b.label, tuple(x.flipped() for x in b.decorations),
                             HaarMark(b.payload.group, variant)))
        else:
            boxes.append(b)
    return d.with_boxes(boxes)


def group_boxes(d: Diagram, group: str) -> tuple[list[int], list[int]]:
    """Indices of the U boxes and of the Ubar boxes of a group, in box order."""
    us, bars = [], []
    for i, b in enumerate(d.boxes):
        if b.is_haar and b.payload.group == group:
            if b.payload.variant == "U":
                us.append(i)
            elif b.payload.variant == "Ubar":
                bars.append(i)
            else:
                raise DiagramError(f"box {i} ({b.label}): normalize_haar_boxes must run first")
    return us, bars


def group_dimension(d: Diagram, group: str) -> int:
    for b in d.boxes:
        if b.is_haar and b.payload.group == group:
            return int(np.prod([d.dim(x) for x in b.decorations if x.shading == BLACK]))
    raise DiagramError(f"no box belongs to group {group!r}")


def group_spaces(d: Diagram, group: str) -> tuple[str, ...]:
    """Spaces whose tensor product is the group's Hilbert space (row side, in order)."""
    for b in d.boxes:
        if b.is_haar and b.payload.group == group:
            return tuple(x.space for x in b.decorations if x.shading == BLACK)
    raise DiagramError(f"no box belongs to group {group!r}")


def removals(d: Diagram, group: str) -> list[Removal]:
    """All ``(p!)^2`` removals, or none when U and Ubar counts differ."""
    us, bars = group_boxes(d, group)
    if len(us) != len(bars):
        return []
    perms = list(all_permutations(len(us))) if us else [Permutation(())]
    return [Removal(a, b) for a in perms for b in perms]


def _legs(d: Diagram, i: int, shading: str) -> list[tuple[int, Decoration]]:
    return [(j, x) for j, x in enumerate(d.boxes[i].decorations) if x.shading == shading]


def apply_removal(d: Diagram, group: str, r: Removal) -> Diagram:
    """Erase the group's boxes and wire the freed legs according to ``r``."""
    us, bars = group_boxes(d, group)
    p = len(us)
    if len(bars) != p or r.alpha.size != p:
        raise DiagramError(f"removal of size {r.alpha.size} does not fit group {group!r} "
                           f"with {p} U and {len(bars)} Ubar boxes")
    erased = set(us) | set(bars)
    keep = [i for i in range(len(d.boxes)) if i not in erased]
    new_index = {old: new for new, old in enumerate(keep)}
    boxes = [d.boxes[i] for i in keep]
    relink = {}
    for s in range(p):
        for shading, perm in ((WHITE, r.alpha), (BLACK, r.beta)):
            u, bar = us[s], bars[perm(s + 1) - 1]
            u_legs, bar_legs = _legs(d, u, shading), _legs(d, bar, shading)
            if [x.space for _, x in u_legs] != [x.space for _, x in bar_legs]:
                raise DiagramError(f"boxes {u} and {bar} have incompatible {shading} legs")
            for (ju, xu), (jb, xb) in zip(u_legs, bar_legs):
                # an identity strand standing in for the paired legs
                idx = len(boxes)
                boxes.append(Box("id", (xu, xb), identity_box(d.spaces[xu.space]).payload))
                relink[(u, ju)] = (idx, 0)
                relink[(bar, jb)] = (idx, 1)
    wires = []
    for a, b in d.wires:
        ends = []
        for e in (a, b):
            ends.append(relink[e] if e in relink else (new_index[e[0]], e[1]))
        wires.append(tuple(ends))
    out = Diagram(d.spaces, boxes, wires, d.scale, d.history + ((group, r.alpha, r.beta),))
    return validate(out)


def simplify(d: Diagram) -> Diagram:
    """Absorb identity and Bell strands: closed loops become dimension factors."""
    boxes = list(d.boxes)
    partner = d.partner_map()
    scale = d.scale
    dead = set()
    changed = True
    while changed:
        changed = False
        for i, b in enumerate(boxes):
            if i in dead or not is_delta_box(b):
                continue
            e0, e1 = (i, 0), (i, 1)
            if partner.get(e0) == e1:
                scale = scale.bump(b.decorations[0].space)
                del partner[e0], partner[e1]
            elif e0 in partner and e1 in partner:
                x, y = partner.pop(e0), partner.pop(e1)
                partner[x], partner[y] = y, x
            else:
                continue
            dead.add(i)
            changed = True
    keep = [i for i in range(len(boxes)) if i not in dead]
    new_index = {old: new for new, old in enumerate(keep)}
    wires = sorted({tuple(sorted(((new_index[a[0]], a[1]), (new_index[b[0]], b[1]))))
                    for a, b in partner.items()})
    return Diagram(d.spaces, [boxes[i] for i in keep], wires, scale, d.history)


def expectation(d: Diagram, group: str, n_total: int | None = None) -> list[tuple[Diagram, Fraction]]:
    """
    Weighted removal expansion over one Haar group.

    Returns an empty list when the numbers of U and Ubar boxes differ. The
    default ``n_total`` is the group's unitary dimension.
    """
    d = normalize_haar_boxes(validate(d))
    us, bars = group_boxes(d, group)
    if not us and not bars:
        return [(d, Fraction(1))]
    n_total = group_dimension(d, group) if n_total is None else n_total
    rs = removals(d, group)
    if not rs:
        return []
    table = weingarten_table(n_total, len(us))
    return [(simplify(apply_removal(d, group, r)), table(r.alpha * r.beta.inverse()))
            for r in rs]


def expand(d: Diagram, groups: Sequence[str] | None = None) -> list[tuple[Diagram, Fraction]]:
    """Apply :func:`expectation` for each group in turn and flatten the sums."""
    d = normalize_haar_boxes(validate(d))
    groups = d.groups() if groups is None else list(groups)
    terms = [(d, Fraction(1))]
    for g in groups:
        nxt = []
        for dd, w in terms:
            nxt += [(dd2, w * w2) for dd2, w2 in expectation(dd, g)]
        terms = nxt
    return terms


# ---------------------------------------------------------------------------
# symbolic expansion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymbolicWeight:
    """
    One removal term: ``coeff * prod dim(s)^e * prod Wg(prod dims, class)``.

    ``traces`` describes the closed components of constant boxes whose values
    were folded into ``coeff``; ``weingarten`` holds one
    ``(spaces, cycle type)`` entry per Haar group.
    """
    coeff: object
    exponents: tuple[tuple[str, int], ...]
    weingarten: tuple[tuple[tuple[str, ...], CycleType], ...]
    traces: tuple[str, ...] = ()
    removals: tuple = field(default=(), compare=False)

    def evaluate(self, dims: Mapping[str, int]):
        out = Monomial(self.coeff, self.exponents).evaluate(dims)
        for spaces, lam in self.weingarten:
            n = int(np.prod([dims[s] for s in spaces]))
            out = out * weingarten_table(n, sum(lam))[lam] if lam else out
        return out

    def describe(self) -> str:
        parts = [str(self.coeff)]
        parts += [f"{s}^{e}" for s, e in self.exponents]
        parts += [f"Wg({'*'.join(sp)}; {format_cycle_type(lam)})" for sp, lam in self.weingarten if lam]
        parts += [t for t in self.traces]
        return " * ".join(parts)

    def to_json(self) -> dict:
        coeff = self.coeff
        if isinstance(coeff, Fraction):
            coeff = f"{coeff.numerator}/{coeff.denominator}"
        else:
            coeff = str(coeff)
        return {
            "coeff": coeff,
            "exponents": dict(self.exponents),
            "weingarten": [{"spaces": list(sp), "class": format_cycle_type(lam)}
                           for sp, lam in self.weingarten],
            "traces": list(self.traces),
            "removals": [{"group": g, "alpha": a.to_json(), "beta": b.to_json()}
                         for g, a, b in self.removals],
        }


def _components(d: Diagram) -> list[list[int]]:
    parent = list(range(len(d.boxes)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in d.wires:
        parent[find(a[0])] = find(b[0])
    groups = {}
    for i in range(len(d.boxes)):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _closed_value(d: Diagram) -> tuple[object, tuple[str, ...]]:
    """Value of a fully wired constant diagram, one factor per connected component."""
    if any(b.is_haar for b in d.boxes):
        raise DiagramError("residual Haar boxes remain after removal")
    if d.free_endpoints():
        raise DiagramError("removal result has free legs; symbolic moments need closed diagrams")
    value, names = Fraction(1), []
    for comp in _components(d):
        index = {old: new for new, old in enumerate(comp)}
        wires = [((index[a[0]], a[1]), (index[b[0]], b[1]))
                 for a, b in d.wires if a[0] in index]
        sub = Diagram(d.spaces, [d.boxes[i] for i in comp], wires)
        value = value * contract(sub)
        names.append("tr[" + " ".join(d.boxes[i].label for i in comp) + "]")
    return value, tuple(names)


def symbolic_moment(d: Diagram, groups: Sequence[str] | None = None) -> list[SymbolicWeight]:
    """
    Full removal expansion as symbolic terms in the space dimensions.

    Every term keeps loop exponents and Weingarten arguments unevaluated, so
    the result can be rebound to any dimensions of the same spaces.
    """
    d = normalize_haar_boxes(validate(d))
    groups = d.groups() if groups is None else list(groups)
    spaces = {g: group_spaces(d, g) for g in groups}
    terms = [d]
    for g in groups:
        nxt = []
        for dd in terms:
            nxt += [simplify(apply_removal(dd, g, r)) for r in removals(dd, g)]
        terms = nxt
    out = []
    for dd in terms:
        value, traces = _closed_value(dd)
        wg = []
        for g, a, b in dd.history:
            if g in spaces:
                wg.append((spaces[g], (a * b.inverse()).cycle_type if a.size else ()))
        out.append(SymbolicWeight(value * dd.scale.coeff, dd.scale.exponents, tuple(wg),
                                  traces, dd.history))
    return out


def evaluate_symbolic(terms: Iterable[SymbolicWeight], dims: Mapping[str, int]):
    total = Fraction(0)
    for t in terms:
        total = total + t.evaluate(dims)
    return total
