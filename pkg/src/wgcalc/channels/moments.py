"""
Exact moments ``E[tr(Z^p)]`` of the channel models as permutation sums.

Every sum runs over pairs ``(alpha, beta)`` of a symmetric group. Terms are
bucketed by small integer features (cycle counts) and by the conjugacy class
of ``alpha beta^{-1}``; the buckets are cached per order, so evaluating at a
new ``(n, k)`` costs one pass over the nonempty buckets in exact rationals.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ..perm import (
    Permutation, build_bar_gamma_delta, build_gamma_delta, cycle_counts,
    enumerate_geodesic_pairs, gamma_cycle, mobius, partitions, perm_array,
)
from ..weingarten import _class_data, weingarten_table

__all__ = [
    "BudgetError", "BUDGETS", "exact_moment_rotated", "exact_moment_independent",
    "exact_moment_conjugate", "second_moment_conjugate", "covariance_exact_p1",
    "geodesic_limit_subset", "geodesic_limit_closed", "geodesic_limit_conjugate",
    "limit_spectrum", "limit_moment",
]

BUDGETS = {"rotated": 6, "rotated-rank-one": 9, "independent": 6, "conjugate": 3,
           "second-moment": 1}


class BudgetError(ValueError):
    pass


def _check_budget(kind: str, p: int):
    if p < 1:
        raise ValueError("p must be at least 1")
    if p > BUDGETS[kind]:
        raise BudgetError(f"exact {kind} moment is limited to p <= {BUDGETS[kind]}, got p={p}")


def _zero_based(a: Permutation) -> np.ndarray:
    return np.asarray(a.images, dtype=np.int64) - 1


@lru_cache(maxsize=None)
def _codes(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Base-m code of each permutation (ascending in lexicographic order) and weights."""
    weights = m ** np.arange(m - 1, -1, -1, dtype=np.int64)
    return perm_array(m) @ weights, weights


def _quotient_classes(m: int) -> np.ndarray:
    """``cls[a, b]`` = class index of ``alpha_a beta_b^{-1}``."""
    perms = perm_array(m)
    inv = np.argsort(perms, axis=1)
    codes, weights = _codes(m)
    labels = _class_data(m)[2]
    out = np.empty((len(perms), len(perms)), dtype=np.int64)
    for a in range(len(perms)):
        comp = perms[a][inv]  # row b: alpha_a o beta_b^{-1}
        out[a] = labels[np.searchsorted(codes, comp @ weights)]
    return out


@lru_cache(maxsize=None)
def _quotient_classes_cached(m: int) -> np.ndarray:
    out = _quotient_classes(m)
    out.setflags(write=False)
    return out


def _histogram(m: int, a_keys: np.ndarray, b_keys: np.ndarray) -> dict:
    """``{(a_key, b_key, class): count}`` over all pairs of S_m."""
    cls = _quotient_classes_cached(m)
    nc = len(partitions(m))
    ka, kb = int(a_keys.max()) + 1, int(b_keys.max()) + 1
    key = (a_keys[:, None] * kb + b_keys[None, :]) * nc + cls
    counts = np.bincount(key.ravel(), minlength=ka * kb * nc)
    out = {}
    for flat in np.nonzero(counts)[0]:
        ab, c = divmod(int(flat), nc)
        a, b = divmod(ab, kb)
        out[(a, b, c)] = int(counts[flat])
    return out


def _wg_values(nk: int, m: int) -> list[Fraction]:
    return weingarten_table(nk, m).as_array()


# ---------------------------------------------------------------------------
# rotated matrix: Y = tr_k[U X U^*]
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _rotated_rank_one_counts(p: int) -> dict:
    perms = perm_array(p)
    ginv = _zero_based(gamma_cycle(p).inverse())
    a = cycle_counts(perms)
    b = cycle_counts(ginv[perms])  # gamma^{-1} o alpha
    counts = {}
    for x, y in zip(a.tolist(), b.tolist()):
        counts[(x, y)] = counts.get((x, y), 0) + 1
    return counts


@lru_cache(maxsize=None)
def _rotated_counts(p: int) -> dict:
    perms = perm_array(p)
    ginv = _zero_based(gamma_cycle(p).inverse())
    a = cycle_counts(perms)
    b = cycle_counts(ginv[perms])
    labels = _class_data(p)[2]
    return _histogram(p, a * (p + 1) + b, labels)


def _power_traces(x, p: int) -> list:
    x = np.asarray(x)
    exact = x.dtype == object or x.dtype.kind in "iub"
    if exact:
        xm = np.vectorize(Fraction, otypes=[object])(x)
    else:
        xm = x.astype(complex)
    out, cur = [], xm
    for _ in range(p):
        out.append(np.trace(cur))
        cur = cur.dot(xm)
    return out


def exact_moment_rotated(n: int, k: int, p: int, x=None):
    """
    ``E[tr(Y^p)] = sum_{alpha, beta} k^{#alpha} n^{#(gamma^{-1} alpha)} tr_beta(X) Wg(nk, alpha beta^{-1})``.

    ``x=None`` is a rank-one projector and uses the single-sum shortcut. An
    integer or Fraction matrix gives an exact Fraction; a float matrix gives
    a complex value.
    """
    if x is None:
        _check_budget("rotated-rank-one", p)
        total = sum(c * k ** a * n ** b for (a, b), c in _rotated_rank_one_counts(p).items())
        return Fraction(total, math.prod(n * k + j for j in range(p)))
    _check_budget("rotated", p)
    x = np.asarray(x)
    if x.shape != (n * k, n * k):
        raise ValueError(f"X must have shape {(n * k, n * k)}, got {x.shape}")
    traces = _power_traces(x, p)
    classes = partitions(p)
    tr_class = [math.prod((traces[part - 1] for part in lam), start=Fraction(1))
                for lam in classes]
    wg = _wg_values(n * k, p)
    total = Fraction(0)
    for (ab, beta_class, q), c in _rotated_counts(p).items():
        a, b = divmod(ab, p + 1)
        total = total + c * k ** a * Fraction(n) ** b * tr_class[beta_class] * wg[q]
    return total


# ---------------------------------------------------------------------------
# independent product
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _independent_tables(p: int):
    """Per-beta buckets of the alpha sum and the coupling counts ``#(beta_U^{-1} beta_V)``."""
    perms = perm_array(p)
    ginv = _zero_based(gamma_cycle(p).inverse())
    a = cycle_counts(perms)
    b = cycle_counts(ginv[perms])
    cls = _quotient_classes_cached(p)  # [alpha, beta]
    nc = len(partitions(p))
    key = (a * (p + 1) + b)[:, None] * nc + cls
    size = (p + 1) ** 2 * nc
    per_beta = np.stack([np.bincount(key[:, j], minlength=size) for j in range(len(perms))])
    inv = np.argsort(perms, axis=1)
    coupling = np.stack([cycle_counts(inv[i][perms]) for i in range(len(perms))])
    return per_beta, coupling, size, nc


def exact_moment_independent(n: int, k: int, p: int) -> Fraction:
    """
    ``E[tr(Z^p)]`` for ``Z = [Phi^U (x) Phi^V](E_n)`` with independent ``U, V``.

    The quadruple sum factors as ``n^{-p} sum_{bU, bV} h(bU) h(bV) n^{#(bU^{-1} bV)}``
    with ``h(beta) = sum_alpha k^{#alpha} n^{#(gamma^{-1} alpha)} Wg(alpha beta^{-1})``.
    """
    _check_budget("independent", p)
    per_beta, coupling, size, nc = _independent_tables(p)
    wg = _wg_values(n * k, p)
    den = math.lcm(*(w.denominator for w in wg))
    weights = np.empty(size, dtype=object)
    for flat in range(size):
        ab, q = divmod(flat, nc)
        a, b = divmod(ab, p + 1)
        weights[flat] = k ** a * n ** b * (wg[q].numerator * (den // wg[q].denominator))
    h = per_beta.astype(object).dot(weights)  # h * den, exact integers
    total = 0
    for c in range(1, p + 1):
        mask = (coupling == c).astype(object)
        total += n ** c * int(h.dot(mask.dot(h)))
    return Fraction(total, den * den * n ** p)


# ---------------------------------------------------------------------------
# conjugate product
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _conjugate_counts(p: int) -> dict:
    m = 2 * p
    gamma, delta = build_gamma_delta(p)
    perms = perm_array(m)
    ginv, d = _zero_based(gamma.inverse()), _zero_based(delta)
    a = cycle_counts(perms)
    b = cycle_counts(perms[:, ginv])  # alpha o gamma^{-1}
    c = cycle_counts(perms[:, d])     # beta o delta
    return _histogram(m, a * (m + 1) + b, c)


def _conjugate_sum(counts: dict, n: int, k: int, m: int, shift: int) -> Fraction:
    wg = _wg_values(n * k, m)
    total = Fraction(0)
    for (ab, c, q), count in counts.items():
        a, b = divmod(ab, m + 1)
        total = total + count * k ** a * Fraction(n) ** (b + c - shift) * wg[q]
    return total


def exact_moment_conjugate(n: int, k: int, p: int) -> Fraction:
    """
    ``E[tr(Z^p)] = sum_{alpha, beta in S_2p} k^{#alpha} n^{#(alpha gamma^{-1}) + #(beta delta) - p} Wg(nk, alpha beta^{-1})``.
    """
    _check_budget("conjugate", p)
    return _conjugate_sum(_conjugate_counts(p), n, k, 2 * p, p)


@lru_cache(maxsize=None)
def _second_moment_counts(p: int) -> dict:
    m = 4 * p
    gamma, delta = build_bar_gamma_delta(p)
    perms = perm_array(m)
    ginv, d = _zero_based(gamma.inverse()), _zero_based(delta)
    a = cycle_counts(perms)
    b = cycle_counts(perms[:, ginv])
    c = cycle_counts(perms[:, d])
    return _histogram(m, a * (m + 1) + b, c)


def second_moment_conjugate(n: int, k: int, p: int = 1) -> Fraction:
    """
    ``E[tr(Z^p)^2]`` as a sum over ``S_4p``: two copies of the conjugate
    diagram, with the ``E_n`` normalization contributing ``n^{-2p}``.
    """
    _check_budget("second-moment", p)
    return _conjugate_sum(_second_moment_counts(p), n, k, 4 * p, 2 * p)


def covariance_exact_p1(n: int, k: int, p: int = 1) -> Fraction:
    """``E[tr(Z)^2] - E[tr(Z)]^2``; zero because ``tr Z = 1``."""
    if p != 1:
        raise BudgetError("the exact covariance is only available at p = 1")
    return second_moment_conjugate(n, k, 1) - exact_moment_conjugate(n, k, 1) ** 2


# ---------------------------------------------------------------------------
# large-n limit of the conjugate model
# ---------------------------------------------------------------------------

def geodesic_limit_subset(k: int, p: int) -> Fraction:
    """Sum of ``k^{-(|alpha| + |alpha beta^{-1}|)} Mob(alpha beta^{-1})`` over geodesic pairs."""
    total = Fraction(0)
    for _, _, alpha, beta in enumerate_geodesic_pairs(p):
        q = alpha * beta.inverse()
        total += Fraction(mobius(q), k ** (alpha.length + q.length))
    return total


def geodesic_limit_closed(k: int, p: int) -> Fraction:
    k = Fraction(k)
    big = 1 / k + 1 / k ** 2 - 1 / k ** 3
    small = 1 / k ** 2 - 1 / k ** 3
    return big ** p + (k * k - 1) * small ** p


def geodesic_limit_conjugate(k: int, p: int) -> Fraction:
    """Limit of ``E[tr(Z^p)]`` as ``n -> infinity``; both evaluation paths must agree."""
    if k < 1 or p < 1:
        raise ValueError("k and p must be positive")
    a, b = geodesic_limit_subset(k, p), geodesic_limit_closed(k, p)
    if a != b:
        raise ArithmeticError(f"geodesic sum {a} disagrees with closed form {b}")
    return a


# ---------------------------------------------------------------------------
# limit spectra
# ---------------------------------------------------------------------------

def _as_fraction(t) -> Fraction:
    if isinstance(t, float):
        return Fraction(t).limit_denominator(10 ** 9)
    return Fraction(t)


def limit_spectrum(kind: str, n: int, k: int, t=None, regime: str = "II") -> list[Fraction]:
    """
    Predicted eigenvalues, descending, padded with zeros to the output size.

    Regime ``I`` is ``k -> infinity`` at fixed n, regime ``II`` is
    ``n -> infinity`` at fixed k. The rotated model uses a rank-one input.
    """
    if regime not in ("I", "II"):
        raise ValueError(f"unknown regime {regime!r}; expected 'I' or 'II'")
    size = n if kind == "rotated" else n * n
    if kind == "rotated":
        vals = [Fraction(1, n)] * n if regime == "I" else [Fraction(1, k)] * k
    elif kind in ("independent", "conjugate") and regime == "I":
        vals = [Fraction(1, n * n)] * (n * n)
    elif kind == "independent":
        vals = [Fraction(1, k * k)] * (k * k)
    elif kind in ("conjugate", "generalized"):
        tt = Fraction(1, k) if kind == "conjugate" else _as_fraction(t)
        if kind == "generalized" and regime == "I":
            raise ValueError("no k -> infinity prediction for the generalized model")
        if not 0 < tt <= 1:
            raise ValueError(f"t must lie in (0, 1], got {tt}")
        small = (1 - tt) / (k * k)
        vals = [tt + small] + [small] * (k * k - 1)
    else:
        raise ValueError(f"unknown model {kind!r}")
    return vals + [Fraction(0)] * max(0, size - len(vals))


def limit_moment(kind: str, n: int, k: int, p: int, t=None, regime: str = "II") -> Fraction:
    return sum((x ** p for x in limit_spectrum(kind, n, k, t, regime)), Fraction(0))
