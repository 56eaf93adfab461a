import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wgcalc.perm import (
    Permutation, all_permutations, build_bar_gamma_delta, build_gamma_delta,
    catalan, class_size, compose_arrays, cycle_counts, distance,
    enumerate_geodesic_alphas, enumerate_geodesic_pairs, excess, gamma_cycle,
    is_geodesic, mobius, partitions, perm_array, tau, trace_sigma,
)


def perms(max_size=7):
    return st.integers(1, max_size).flatmap(
        lambda p: st.permutations(list(range(1, p + 1))).map(Permutation))


def same_size_pair(max_size=6):
    return st.integers(1, max_size).flatmap(lambda p: st.tuples(
        st.permutations(list(range(1, p + 1))).map(Permutation),
        st.permutations(list(range(1, p + 1))).map(Permutation)))


def test_composition_is_right_to_left():
    a = Permutation.from_cycles(3, (1, 2))
    b = Permutation.from_cycles(3, (2, 3))
    ab = a * b
    assert all(ab(i) == a(b(i)) for i in range(1, 4))
    assert ab == Permutation.from_cycles(3, (1, 2, 3))


def test_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation((1, 1, 2))
    with pytest.raises(ValueError):
        Permutation.from_cycles(3, (1, 4))


def test_length_examples():
    assert Permutation.identity(5).length == 0
    assert Permutation.from_cycles(5, (2, 4)).length == 1
    for p in range(1, 6):
        gamma, delta = build_gamma_delta(p)
        assert gamma.length == 2 * p - 2
        assert delta.length == p


@given(perms())
def test_inverse_and_cycles(a):
    ident = Permutation.identity(a.size)
    assert a * a.inverse() == ident
    assert sum(a.cycle_type) == a.size
    assert a.num_cycles == len(a.cycle_type)
    assert a.length == a.size - a.num_cycles


@given(same_size_pair())
def test_distance_is_a_metric(pair):
    a, b = pair
    assert distance(a, a) == 0
    assert distance(a, b) == distance(b, a)
    ident = Permutation.identity(a.size)
    assert distance(a, b) <= distance(a, ident) + distance(ident, b)
    # bi-invariance
    c = Permutation(tuple(reversed(range(1, a.size + 1))))
    assert distance(c * a, c * b) == distance(a, b) == distance(a * c, b * c)


def test_distance_examples():
    t = Permutation.from_cycles(4, (1, 3))
    assert distance(Permutation.identity(4), t) == 1
    gamma, delta = build_gamma_delta(3)
    assert distance(gamma, delta) == 3


def test_is_geodesic_examples():
    a = Permutation.from_cycles(4, (1, 2, 3))
    b = Permutation.from_cycles(4, (2, 4))
    assert is_geodesic(a, a, b)
    t = Permutation.from_cycles(4, (1, 2))
    assert is_geodesic(Permutation.identity(4), t, t)
    gamma, delta = build_gamma_delta(2)
    assert is_geodesic(gamma, gamma * tau(2, 1), delta)


def test_catalan_and_mobius():
    assert [catalan(i) for i in range(7)] == [1, 1, 2, 5, 14, 42, 132]
    with pytest.raises(ValueError):
        catalan(-1)
    assert mobius(Permutation.identity(4)) == 1
    assert mobius(Permutation.from_cycles(4, (1, 2))) == -1
    for m in range(1, 4):
        prod = Permutation.from_cycles(2 * m, *[(2 * i + 1, 2 * i + 2) for i in range(m)])
        assert mobius(prod) == (-1) ** m
    assert mobius(Permutation.from_cycles(4, (1, 2, 3, 4))) == -5


def test_trace_sigma(rng):
    mats = [rng.standard_normal((3, 3)) for _ in range(3)]
    ident = Permutation.identity(3)
    assert np.isclose(trace_sigma(mats, ident), np.prod([np.trace(m) for m in mats]))
    full = Permutation.from_cycles(3, (1, 2, 3))
    a = mats[0]
    assert np.isclose(trace_sigma(a, full), np.trace(a @ a @ a))
    assert np.isclose(trace_sigma(mats, full), np.trace(mats[0] @ mats[1] @ mats[2]))
    x = np.zeros((4, 4), dtype=object)
    x[0, 0] = 1
    for beta in all_permutations(3):
        assert trace_sigma(x, beta) == 1
    with pytest.raises(ValueError):
        trace_sigma(mats[:2], full)


def test_gamma_cycle():
    assert gamma_cycle(1) == Permutation.identity(1)
    assert gamma_cycle(2) == Permutation.from_cycles(2, (1, 2))
    assert gamma_cycle(4).length == 3
    assert gamma_cycle(4)(1) == 4


def test_gamma_delta_small():
    g, d = build_gamma_delta(1)
    assert g == Permutation.identity(2)
    assert d == Permutation.from_cycles(2, (1, 2))
    g, d = build_gamma_delta(2)
    assert g == Permutation.from_cycles(4, (1, 2), (3, 4))
    assert d == Permutation.from_cycles(4, (1, 3), (2, 4))
    g, d = build_gamma_delta(3)
    assert (g.length, d.length, (g * d).length) == (4, 3, 3)


def test_gamma_delta_orientation():
    p = 4
    g, d = build_gamma_delta(p)
    # T-band descends, B-band ascends
    assert g(2) == 1 and g(1) == p
    assert g(p + 1) == p + 2 and g(2 * p) == p + 1
    assert all(d(i) == i + p for i in range(1, p + 1))


def test_bar_gamma_delta():
    g, d = build_bar_gamma_delta(1)
    assert g == Permutation.identity(4)
    assert d.cycle_type == (2, 2)
    assert distance(g, d) == 2
    g, d = build_bar_gamma_delta(2)
    assert d.cycle_type == (2, 2, 2, 2)
    assert distance(g, d) == 4


def _brute_midpoints(p):
    g, d = build_gamma_delta(p)
    return {a for a in all_permutations(2 * p) if is_geodesic(g, a, d)}


@pytest.mark.parametrize("p", [1, 2, 3])
def test_geodesic_alphas_match_brute_force(p):
    found = enumerate_geodesic_alphas(p)
    assert len(found) == 2 ** p
    assert {a for _, a in found} == _brute_midpoints(p)
    g, d = build_gamma_delta(p)
    for A, a in found:
        assert a.length == (2 * p - 2 if not A else 2 * p - len(A))
    full = [a for A, a in found if len(A) == p]
    assert full == [d]


@pytest.mark.parametrize("p", [1, 2])
def test_geodesic_pairs_match_brute_force(p):
    g, d = build_gamma_delta(p)
    pairs = enumerate_geodesic_pairs(p)
    assert len(pairs) == 3 ** p
    brute = {(a, b) for a in all_permutations(2 * p) for b in all_permutations(2 * p)
             if excess(a, b, g, d) == 0}
    assert {(a, b) for _, _, a, b in pairs} == brute
    for A, B, a, b in pairs:
        assert A <= B
        assert distance(a, b) == len(B - A)
    assert pairs[0][2:] == (g, g)


def test_excess_positive_off_geodesic():
    g, d = build_gamma_delta(2)
    e = excess(d, g, g, d)
    assert e > 0 and e % 2 == 0


def test_partitions_and_class_sizes():
    assert partitions(4) == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
    for p in range(1, 8):
        assert sum(class_size(lam) for lam in partitions(p)) == math.factorial(p)
    assert [len(partitions(p)) for p in range(1, 9)] == [1, 2, 3, 5, 7, 11, 15, 22]


@settings(max_examples=30)
@given(st.integers(1, 5))
def test_array_forms_agree(p):
    arr = perm_array(p)
    objs = list(all_permutations(p))
    assert [Permutation.from_zero_based(r) for r in arr] == objs
    counts = cycle_counts(arr)
    assert list(counts) == [a.num_cycles for a in objs]
    comp = compose_arrays(arr[:, None, :], arr[None, :, :])
    for i, j in itertools.product(range(len(objs)), repeat=2):
        if (i * 7 + j) % 5:
            continue
        assert Permutation.from_zero_based(comp[i, j]) == objs[i] * objs[j]
