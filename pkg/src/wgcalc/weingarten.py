"""
Unitary Weingarten functions in exact rational arithmetic.

``Wg(n, .)`` is the convolution inverse on S_p of ``sigma -> n ** #sigma``. It is
a class function, so for ``n >= p`` it is obtained by solving the linear system
on conjugacy classes. For ``n < p`` that system is singular and the
pseudo-inverse is taken through the character expansion restricted to
partitions with at most ``n`` rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations as _permutations
from typing import Sequence

import numpy as np

from .perm import (
    CycleType, Permutation, class_size, cycle_counts, compose_arrays,
    mobius, partitions, perm_array,
)

__all__ = [
    "WeingartenTable", "MonomialSpec", "weingarten_table", "weingarten_exact",
    "weingarten_asymptotic", "weingarten_character", "character_sp",
    "class_index", "gram_matrix", "monomial_integral", "format_cycle_type",
]


def format_cycle_type(lam: CycleType) -> str:
    return "+".join(map(str, lam))


# ---------------------------------------------------------------------------
# characters of S_p
# ---------------------------------------------------------------------------

def _beta_set(lam: Sequence[int]) -> tuple[int, ...]:
    l = len(lam)
    return tuple(part + (l - 1 - i) for i, part in enumerate(lam))


def _from_beta(beta: Sequence[int]) -> tuple[int, ...]:
    b = sorted(beta, reverse=True)
    l = len(b)
    return tuple(x for x in (b[i] - (l - 1 - i) for i in range(l)) if x > 0)


@lru_cache(maxsize=None)
def _mn(lam: tuple[int, ...], mu: tuple[int, ...]) -> int:
    if not mu:
        return 1 if not lam else 0
    r, rest = mu[0], mu[1:]
    beta = _beta_set(lam)
    members = set(beta)
    total = 0
    # removing a border strip of size r == moving one bead r places down
    for b in beta:
        if b - r < 0 or (b - r) in members:
            continue
        height = sum(1 for c in beta if b - r < c < b)
        new = [c for c in beta if c != b] + [b - r]
        total += (-1) ** height * _mn(_from_beta(new), rest)
    return total


def character_sp(lam: CycleType, mu: CycleType) -> int:
    """Irreducible character ``chi^lam`` on the class ``mu`` (Murnaghan-Nakayama)."""
    lam = tuple(sorted(lam, reverse=True))
    mu = tuple(sorted(mu, reverse=True))
    if sum(lam) != sum(mu):
        raise ValueError(f"size mismatch: |{lam}| != |{mu}|")
    return _mn(lam, mu)


def _content_product(lam: CycleType, n: int) -> int:
    out = 1
    for r, part in enumerate(lam):
        for c in range(part):
            out *= n + c - r
    return out


# ---------------------------------------------------------------------------
# class-algebra Gram system
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _class_data(p: int):
    """Classes of S_p, the class index of every permutation in perm_array order."""
    classes = partitions(p)
    index = {lam: i for i, lam in enumerate(classes)}
    perms = perm_array(p)
    labels = np.empty(len(perms), dtype=np.int64)
    for row, images in enumerate(perms):
        labels[row] = index[Permutation.from_zero_based(images).cycle_type]
    return classes, index, labels


def class_index(p: int) -> dict:
    return _class_data(p)[1]


@lru_cache(maxsize=None)
def _gram_counts(p: int) -> np.ndarray:
    """``N[l, m, c] = #{rho in C_m : #(rho^{-1} sigma_l) = c}`` for class representatives."""
    classes, _, labels = _class_data(p)
    perms = perm_array(p)
    inv = np.argsort(perms, axis=1)
    counts = np.zeros((len(classes), len(classes), p + 1), dtype=np.int64)
    for l, lam in enumerate(classes):
        rep = perms[np.argmax(labels == l)]
        cyc = cycle_counts(compose_arrays(inv, rep[None, :]))
        np.add.at(counts[l], (labels, cyc), 1)
    return counts


def gram_matrix(n: int, p: int) -> list[list[int]]:
    """``G[l][m] = sum_{rho in C_m} n ** #(rho^{-1} sigma_l)``; Wg solves ``G w = e_id``."""
    counts = _gram_counts(p)
    powers = [n ** c for c in range(p + 1)]
    return [[sum(int(x) * w for x, w in zip(row, powers)) for row in block] for block in counts]


def _solve(matrix: list[list[int]], rhs: list[int]) -> list[Fraction]:
    size = len(matrix)
    aug = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if aug[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular class Gram matrix")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        piv = aug[col][col]
        aug[col] = [x / piv for x in aug[col]]
        for r in range(size):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[-1] for row in aug]


@dataclass(frozen=True)
class WeingartenTable:
    p: int
    n: int
    values: dict = field(repr=False)

    def __getitem__(self, lam: CycleType) -> Fraction:
        return self.values[tuple(lam)]

    def __call__(self, a: Permutation) -> Fraction:
        return self.values[a.cycle_type]

    def as_array(self) -> list[Fraction]:
        """Values ordered as ``partitions(p)``."""
        return [self.values[lam] for lam in partitions(self.p)]

    def to_json(self) -> dict[str, str]:
        return {format_cycle_type(lam): f"{v.numerator}/{v.denominator}"
                for lam, v in self.values.items()}


@lru_cache(maxsize=None)
def _character_table(n: int, p: int) -> WeingartenTable:
    classes = partitions(p)
    fact = math.factorial(p)
    values = {}
    rows = [lam for lam in classes if len(lam) <= n]
    dims = {lam: character_sp(lam, (1,) * p) for lam in rows}
    for mu in classes:
        total = Fraction(0)
        for lam in rows:
            total += Fraction(dims[lam] * character_sp(lam, mu), _content_product(lam, n))
        values[mu] = total / fact
    return WeingartenTable(p, n, values)


@lru_cache(maxsize=None)
def weingarten_table(n: int, p: int) -> WeingartenTable:
    """All values ``Wg(n, .)`` on S_p, indexed by cycle type. Cached per ``(n, p)``."""
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")
    if n < p:
        return _character_table(n, p)
    classes = partitions(p)
    rhs = [1 if lam == (1,) * p else 0 for lam in classes]
    # row l: sum_m G[l][m] w_m = [l == id]
    sol = _solve(gram_matrix(n, p), rhs)
    return WeingartenTable(p, n, dict(zip(classes, sol)))


def weingarten_exact(n: int, a: Permutation) -> Fraction:
    return weingarten_table(n, a.size)(a)


def weingarten_character(n: int, a: Permutation) -> Fraction:
    """
    ``(1/p!) sum_{lam, len(lam) <= n} chi^lam(1) chi^lam(a) / prod_cells (n + c - r)``.

    Independent of the Gram route; coincides with it for ``n >= p`` and is the
    pseudo-inverse otherwise.
    """
    return _character_table(n, a.size)(a)


def weingarten_asymptotic(n: int, a: Permutation) -> Fraction:
    """Leading term ``n^{-(p + |a|)} Mob(a)``."""
    return Fraction(mobius(a), n ** (a.size + a.length))


# ---------------------------------------------------------------------------
# monomial integrals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonomialSpec:
    """
    The integrand ``U[i1, j1] ... U[ip, jp] conj(U[i'1, j'1]) ... conj(U[i'q, j'q])``.

    Indices are 1-based.
    """
    i: tuple[int, ...]
    j: tuple[int, ...]
    i_conj: tuple[int, ...]
    j_conj: tuple[int, ...]

    def __post_init__(self):
        for name in ("i", "j", "i_conj", "j_conj"):
            object.__setattr__(self, name, tuple(int(x) for x in getattr(self, name)))
        if len(self.i) != len(self.j) or len(self.i_conj) != len(self.j_conj):
            raise ValueError("row and column tuples must have equal lengths")

    @property
    def degree(self) -> tuple[int, int]:
        return len(self.i), len(self.i_conj)

    def check(self, n: int):
        for idx in self.i + self.j + self.i_conj + self.j_conj:
            if not 1 <= idx <= n:
                raise ValueError(f"index {idx} outside 1..{n}")


def monomial_integral(n: int, spec: MonomialSpec) -> Fraction:
    """Exact Haar integral over U(n) of the monomial ``spec``."""
    spec.check(n)
    p, q = spec.degree
    if p != q:
        return Fraction(0)
    if p == 0:
        return Fraction(1)
    table = weingarten_table(n, p)

    def matchings(a, b):
        return [s for s in _permutations(range(p)) if all(a[x] == b[s[x]] for x in range(p))]

    rows = matchings(spec.i, spec.i_conj)
    cols = matchings(spec.j, spec.j_conj)
    total = Fraction(0)
    for sigma in rows:
        sig_inv = Permutation.from_zero_based(sigma).inverse()
        for t in cols:
            total += table(Permutation.from_zero_based(t) * sig_inv)
    return total
