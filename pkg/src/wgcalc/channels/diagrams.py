"""
Diagrams of ``tr(Z^p)`` for the channel models.

Spaces are ``N`` (dimension n, the system) and ``K`` (dimension k, the
environment). Each Haar box acts on ``N (x) K`` with legs
``(N black, K black, N white, K white)``.
"""

from __future__ import annotations

import numpy as np

from ..diagram import (
    BLACK, WHITE, Box, Decoration, Diagram, HaarMark, Monomial, Space,
    bell_form, bell_vector, bra, ket, matrix_box,
)

__all__ = ["rotated_diagram", "independent_diagram", "conjugate_diagram", "channel_diagram"]

_N, _K = 0, 1  # decoration slots of a Haar box, black side
_NW, _KW = 2, 3


def _haar(label: str, group: str, variant: str) -> Box:
    decs = (Decoration("N", BLACK), Decoration("K", BLACK),
            Decoration("N", WHITE), Decoration("K", WHITE))
    return Box(label, decs, HaarMark(group, variant))


def _spaces(n: int, k: int):
    return Space("N", n, "round"), Space("K", k, "square")


def rotated_diagram(n: int, k: int, p: int, x=None) -> Diagram:
    """
    ``tr(Y^p)`` with ``Y = tr_K[U X U^*]``.

    ``x`` is an ``nk x nk`` matrix; the default is the rank-one projector onto
    the first basis vector. Box order: ``U_1..U_p, U*_1..U*_p, X_1..X_p``.
    """
    N, K = _spaces(n, k)
    if x is None:
        x = np.zeros((n * k, n * k), dtype=np.int64)
        x[0, 0] = 1
    boxes = [_haar(f"U{s + 1}", "U", "U") for s in range(p)]
    boxes += [_haar(f"U*{s + 1}", "U", "Ustar") for s in range(p)]
    boxes += [matrix_box(f"X{s + 1}", x, [N, K], [N, K]) for s in range(p)]
    u, us, xs = 0, p, 2 * p
    wires = []
    for s in range(p):
        wires += [((u + s, _NW), (xs + s, 0)), ((u + s, _KW), (xs + s, 1)),
                  ((xs + s, 2), (us + s, _N)), ((xs + s, 3), (us + s, _K)),
                  ((us + s, _KW), (u + s, _K)),
                  ((us + s, _NW), (u + (s + 1) % p, _N))]
    return Diagram([N, K], boxes, wires)


def _product_diagram(n: int, k: int, p: int, second: tuple[str, str, str]) -> Diagram:
    """
    ``tr(Z^p)`` for ``Z = [Phi_1 (x) Phi_2](E_n)``.

    ``second`` gives the group and the variants standing for the second
    channel's unitary and its adjoint. Box order: first-channel unitaries,
    second-channel unitaries, first adjoints, second adjoints (the two
    second-channel slots trade places in the conjugate model), then Bell
    vectors, Bell forms, kets and bras.
    """
    N, K = _spaces(n, k)
    group2, var2, var2_adj = second
    name = "V" if group2 != "U" else "W"
    slots = [[_haar(f"U{s + 1}", "U", "U") for s in range(p)],
             [_haar(f"{name}{s + 1}", group2, var2) for s in range(p)],
             [_haar(f"U*{s + 1}", "U", "Ustar") for s in range(p)],
             [_haar(f"{name}*{s + 1}", group2, var2_adj) for s in range(p)]]
    u1, u2, a1, a2 = 0, p, 2 * p, 3 * p
    if group2 == "U":
        # after normalization the U boxes come first, top band before bottom band
        slots[1], slots[3] = slots[3], slots[1]
        u2, a2 = a2, u2
    boxes = [b for slot in slots for b in slot]
    boxes += [bell_vector(N, f"Bell{s + 1}") for s in range(p)]
    boxes += [bell_form(N, f"Bell*{s + 1}") for s in range(p)]
    boxes += [ket(K, f"ket{j}") for j in range(2 * p)]
    boxes += [bra(K, f"bra{j}") for j in range(2 * p)]
    bv, bf, kt, br = 4 * p, 5 * p, 6 * p, 8 * p
    wires = []
    for s in range(p):
        for side, (u, a) in enumerate(((u1, a1), (u2, a2))):
            j = 2 * s + side
            wires += [((u + s, _NW), (bv + s, side)), ((u + s, _KW), (kt + j, 0)),
                      ((bf + s, side), (a + s, _N)), ((a + s, _K), (br + j, 0)),
                      ((a + s, _KW), (u + s, _K)),
                      ((a + s, _NW), (u + (s + 1) % p, _N))]
    return Diagram([N, K], boxes, wires, Monomial.of(N=-p))


def independent_diagram(n: int, k: int, p: int) -> Diagram:
    """``tr(Z^p)`` with independent unitaries ``U`` and ``V``."""
    return _product_diagram(n, k, p, ("V", "U", "Ustar"))


def conjugate_diagram(n: int, k: int, p: int) -> Diagram:
    """``tr(Z^p)`` with the second unitary equal to ``conj(U)``."""
    return _product_diagram(n, k, p, ("U", "Ubar", "Utrans"))


def channel_diagram(kind: str, n: int, k: int, p: int) -> Diagram:
    builders = {"rotated": rotated_diagram, "independent": independent_diagram,
                "conjugate": conjugate_diagram}
    return builders[kind](n, k, p)
