"""
Symmetric-group combinatorics.

Permutations are stored in one-line notation with 1-based points. Products
compose right to left: ``(a * b)(i) == a(b(i))``.

For the doubled point sets used by the product-channel computations the
T-band occupies ``1..p`` and the B-band ``p+1..2p`` (T-block first).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple, Sequence

import numpy as np

__all__ = [
    "Permutation", "CycleType", "LabeledIndex",
    "cycle_type", "num_cycles", "length", "distance", "is_geodesic",
    "catalan", "mobius", "trace_sigma", "gamma_cycle", "build_gamma_delta",
    "build_bar_gamma_delta", "tau", "enumerate_geodesic_alphas",
    "enumerate_geodesic_pairs", "excess", "all_permutations", "partitions",
    "class_size", "perm_array", "cycle_counts", "compose_arrays",
]

# descending partition of p; the canonical conjugacy-class key
CycleType = tuple


@dataclass(frozen=True)
class Permutation:
    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(x) for x in self.images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValueError(f"not a bijection on 1..{len(images)}: {images}")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, p: int) -> Permutation:
        return cls(tuple(range(1, p + 1)))

    @classmethod
    def from_cycles(cls, p: int, *cycles: Sequence[int]) -> Permutation:
        """Build from cycle notation, e.g. ``from_cycles(4, (1, 2), (3, 4))``."""
        images = list(range(1, p + 1))
        seen = set()
        for cyc in cycles:
            for i, x in enumerate(cyc):
                if x in seen or not 1 <= x <= p:
                    raise ValueError(f"bad cycle {cyc} for size {p}")
                seen.add(x)
                images[x - 1] = cyc[(i + 1) % len(cyc)]
        return cls(tuple(images))

    @classmethod
    def from_zero_based(cls, seq) -> Permutation:
        return cls(tuple(int(x) + 1 for x in seq))

    @property
    def size(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: Permutation) -> Permutation:
        if self.size != other.size:
            raise ValueError("size mismatch")
        return Permutation(tuple(self.images[j - 1] for j in other.images))

    def inverse(self) -> Permutation:
        inv = [0] * self.size
        for i, x in enumerate(self.images, start=1):
            inv[x - 1] = i
        return Permutation(tuple(inv))

    def cycles(self) -> list[tuple[int, ...]]:
        """Cycles (including fixed points), each starting at its smallest point."""
        seen = [False] * self.size
        out = []
        for start in range(1, self.size + 1):
            if seen[start - 1]:
                continue
            cyc = [start]
            seen[start - 1] = True
            j = self.images[start - 1]
            while j != start:
                cyc.append(j)
                seen[j - 1] = True
                j = self.images[j - 1]
            out.append(tuple(cyc))
        return out

    @property
    def num_cycles(self) -> int:
        return len(self.cycles())

    @property
    def cycle_type(self) -> CycleType:
        return tuple(sorted((len(c) for c in self.cycles()), reverse=True))

    @property
    def length(self) -> int:
        return self.size - self.num_cycles

    def direct_sum(self, other: Permutation) -> Permutation:
        shift = self.size
        return Permutation(self.images + tuple(x + shift for x in other.images))

    def restrict(self, points: Sequence[int]) -> Permutation:
        """Restriction to an invariant subset, relabelled 1..len(points) in order."""
        index = {x: i + 1 for i, x in enumerate(points)}
        try:
            return Permutation(tuple(index[self(x)] for x in points))
        except KeyError:
            raise ValueError("subset is not invariant") from None

    def to_json(self) -> list[int]:
        return list(self.images)

    @classmethod
    def from_json(cls, data) -> Permutation:
        return cls(tuple(data))

    def __repr__(self):
        nontrivial = [c for c in self.cycles() if len(c) > 1]
        if not nontrivial:
            return f"Permutation.identity({self.size})"
        body = "".join("(" + " ".join(map(str, c)) + ")" for c in nontrivial)
        return f"<{body} in S_{self.size}>"


class LabeledIndex(NamedTuple):
    """A point ``position`` of a band; bands are T, B (or T1, T2, B1, B2)."""
    position: int
    band: str

    def flat(self, p: int) -> int:
        """Position in the fixed flattening, bands laid out in order T, B."""
        order = {"T": 0, "B": 1, "T1": 0, "T2": 1, "B1": 2, "B2": 3}
        if not 1 <= self.position <= p:
            raise ValueError(f"position {self.position} outside 1..{p}")
        return order[self.band] * p + self.position

    @classmethod
    def unflatten(cls, x: int, p: int, bands=("T", "B")) -> LabeledIndex:
        q, r = divmod(x - 1, p)
        return cls(r + 1, bands[q])


def cycle_type(a: Permutation) -> CycleType:
    return a.cycle_type


def num_cycles(a: Permutation) -> int:
    return a.num_cycles


def length(a: Permutation) -> int:
    return a.length


def _check_sizes(*perms: Permutation):
    if len({x.size for x in perms}) != 1:
        raise ValueError("permutations of different sizes")


def distance(a: Permutation, b: Permutation) -> int:
    """``|a^{-1} b|``, the minimal number of transpositions taking a to b."""
    _check_sizes(a, b)
    return (a.inverse() * b).length


def is_geodesic(a: Permutation, m: Permutation, b: Permutation) -> bool:
    _check_sizes(a, m, b)
    return distance(a, m) + distance(m, b) == distance(a, b)


def catalan(i: int) -> int:
    if i < 0:
        raise ValueError("catalan index must be non-negative")
    return math.factorial(2 * i) // (math.factorial(i + 1) * math.factorial(i))


def mobius(a: Permutation) -> int:
    out = 1
    for c in a.cycle_type:
        out *= (-1) ** (c - 1) * catalan(c - 1)
    return out


def trace_sigma(matrices, a: Permutation):
    """
    Product over the cycles ``(i1 i2 ... ik)`` of ``a`` of ``tr(A_i1 A_i2 ... A_ik)``.

    ``matrices`` is either a sequence of ``a.size`` square matrices or a single
    matrix, which is then used for every slot. Object arrays of Fractions give
    exact results.
    """
    if isinstance(matrices, np.ndarray) and matrices.ndim == 2:
        matrices = [matrices] * a.size
    mats = [np.asarray(m) for m in matrices]
    if len(mats) != a.size:
        raise ValueError(f"expected {a.size} matrices, got {len(mats)}")
    shape = mats[0].shape
    if len(shape) != 2 or shape[0] != shape[1] or any(m.shape != shape for m in mats):
        raise ValueError("matrices must be square and share one dimension")
    out = 1
    for cyc in a.cycles():
        prod = mats[cyc[0] - 1]
        for i in cyc[1:]:
            prod = prod @ mats[i - 1]
        out = out * np.trace(prod)
    return out


def gamma_cycle(p: int) -> Permutation:
    """The full descending cycle ``i -> i-1`` (mod p) on ``1..p``."""
    if p < 1:
        raise ValueError("p must be positive")
    return Permutation(tuple((i - 2) % p + 1 for i in range(1, p + 1)))


def _band(p: int, i: int, band: str) -> int:
    # cyclic position i within a band of size p
    return LabeledIndex((i - 1) % p + 1, band).flat(p)


@lru_cache(maxsize=None)
def build_gamma_delta(p: int) -> tuple[Permutation, Permutation]:
    """
    ``gamma(i^T) = (i-1)^T``, ``gamma(i^B) = (i+1)^B`` and ``delta(i^T) = i^B``,
    ``delta(i^B) = i^T`` as permutations of ``2p`` points.
    """
    if p < 1:
        raise ValueError("p must be positive")
    g = [0] * (2 * p)
    d = [0] * (2 * p)
    for i in range(1, p + 1):
        g[_band(p, i, "T") - 1] = _band(p, i - 1, "T")
        g[_band(p, i, "B") - 1] = _band(p, i + 1, "B")
        d[_band(p, i, "T") - 1] = _band(p, i, "B")
        d[_band(p, i, "B") - 1] = _band(p, i, "T")
    gamma, delta = Permutation(tuple(g)), Permutation(tuple(d))
    assert gamma.length == 2 * p - 2 or p == 1
    assert delta.length == p and distance(gamma, delta) == p
    return gamma, delta


@lru_cache(maxsize=None)
def build_bar_gamma_delta(p: int) -> tuple[Permutation, Permutation]:
    """
    The pair acting on two copies of the ``2p`` points, used for second moments.

    Points are ``1^T..(2p)^T`` followed by ``1^B..(2p)^B``; copy one uses the
    positions ``1..p`` of each band and copy two the positions ``p+1..2p``.
    Each copy carries the wiring of :func:`build_gamma_delta`.
    """
    if p < 1:
        raise ValueError("p must be positive")
    m = 2 * p
    g = [0] * (2 * m)
    d = [0] * (2 * m)
    for copy in range(2):
        off = copy * p
        for i in range(1, p + 1):
            t = LabeledIndex(off + i, "T").flat(m)
            b = LabeledIndex(off + i, "B").flat(m)
            g[t - 1] = LabeledIndex(off + (i - 2) % p + 1, "T").flat(m)
            g[b - 1] = LabeledIndex(off + i % p + 1, "B").flat(m)
            d[t - 1] = b
            d[b - 1] = t
    gamma, delta = Permutation(tuple(g)), Permutation(tuple(d))
    assert distance(gamma, delta) == 2 * p
    return gamma, delta


def tau(p: int, i: int) -> Permutation:
    """The transposition ``(i^T, (i-1)^B)`` in ``S_2p``; ``0^B`` means ``p^B``."""
    a, b = _band(p, i, "T"), _band(p, i - 1, "B")
    return Permutation.from_cycles(2 * p, (a, b))


def _subset_product(p: int, subset) -> Permutation:
    out = Permutation.identity(2 * p)
    for i in sorted(subset):
        out = out * tau(p, i)
    return out


def _subsets(p: int) -> Iterator[frozenset]:
    for r in range(p + 1):
        for c in itertools.combinations(range(1, p + 1), r):
            yield frozenset(c)


def enumerate_geodesic_alphas(p: int) -> list[tuple[frozenset, Permutation]]:
    """All ``(A, gamma * prod_{i in A} tau_i)``: the midpoints of ``gamma -> delta``."""
    gamma, _ = build_gamma_delta(p)
    return [(A, gamma * _subset_product(p, A)) for A in _subsets(p)]


def enumerate_geodesic_pairs(p: int) -> list[tuple[frozenset, frozenset, Permutation, Permutation]]:
    """All ``(A, B, alpha, beta)`` with ``A <= B`` spanning geodesics ``gamma -> alpha -> beta -> delta``."""
    gamma, _ = build_gamma_delta(p)
    out = []
    for B in _subsets(p):
        beta = gamma * _subset_product(p, B)
        for r in range(len(B) + 1):
            for A in itertools.combinations(sorted(B), r):
                A = frozenset(A)
                out.append((A, B, gamma * _subset_product(p, A), beta))
    return out


def excess(a: Permutation, b: Permutation, gamma: Permutation, delta: Permutation) -> int:
    """``d(gamma, a) + d(a, b) + d(b, delta) - d(gamma, delta)``; zero exactly on geodesics."""
    _check_sizes(a, b, gamma, delta)
    return distance(gamma, a) + distance(a, b) + distance(b, delta) - distance(gamma, delta)


def all_permutations(p: int) -> Iterator[Permutation]:
    for images in itertools.permutations(range(1, p + 1)):
        yield Permutation(images)


def partitions(p: int, largest: int | None = None) -> list[CycleType]:
    """Partitions of p as descending tuples, in reverse lexicographic order."""
    if largest is None:
        largest = p
    if p == 0:
        return [()]
    out = []
    for first in range(min(p, largest), 0, -1):
        for rest in partitions(p - first, first):
            out.append((first,) + rest)
    return out


def class_size(lam: CycleType) -> int:
    """Number of permutations with cycle type ``lam``."""
    p = sum(lam)
    denom = 1
    for part in set(lam):
        mult = lam.count(part)
        denom *= part ** mult * math.factorial(mult)
    return math.factorial(p) // denom


# ---------------------------------------------------------------------------
# array forms (0-based rows) for the vectorised exact sums
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def perm_array(p: int) -> np.ndarray:
    """All of S_p as a ``(p!, p)`` int array of 0-based images, lexicographic."""
    arr = np.array(list(itertools.permutations(range(p))), dtype=np.int64)
    arr = arr.reshape(math.factorial(p), p)
    arr.setflags(write=False)
    return arr


def compose_arrays(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise ``a o b`` for broadcastable stacks of 0-based permutations."""
    a, b = np.broadcast_arrays(a, b)
    return np.take_along_axis(a, b, axis=-1)


def cycle_counts(arr: np.ndarray) -> np.ndarray:
    """Number of cycles of every 0-based permutation along the last axis."""
    arr = np.asarray(arr)
    p = arr.shape[-1]
    if p == 0:
        return np.zeros(arr.shape[:-1], dtype=np.int64)
    # a point starts a cycle iff it is the minimum of its orbit
    lowest = np.broadcast_to(np.arange(p), arr.shape).copy()
    cur = arr.copy()
    for _ in range(p - 1):
        np.minimum(lowest, cur, out=lowest)
        cur = np.take_along_axis(arr, cur, axis=-1)
    return (lowest == np.arange(p)).sum(axis=-1)
