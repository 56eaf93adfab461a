import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from wgcalc.perm import Permutation, all_permutations, partitions
from wgcalc.weingarten import (
    MonomialSpec, character_sp, format_cycle_type, gram_matrix, monomial_integral,
    weingarten_asymptotic, weingarten_character, weingarten_exact, weingarten_table,
)


def convolution(n, sigma):
    p = sigma.size
    return sum(weingarten_exact(n, sigma * tau.inverse()) * n ** tau.num_cycles
               for tau in all_permutations(p))


def test_small_values():
    for n in range(1, 7):
        assert weingarten_exact(n, Permutation.identity(1)) == Fraction(1, n)
    for n in range(2, 7):
        assert weingarten_exact(n, Permutation.identity(2)) == Fraction(1, n * n - 1)
        assert weingarten_exact(n, Permutation.from_cycles(2, (1, 2))) == Fraction(-1, n * (n * n - 1))


def test_table_n5_p2():
    t = weingarten_table(5, 2)
    assert t[(1, 1)] == Fraction(1, 24)
    assert t[(2,)] == Fraction(-1, 120)
    assert t.to_json() == {"2": "-1/120", "1+1": "1/24"}
    assert format_cycle_type((3, 1, 1)) == "3+1+1"


def test_three_point_values():
    # classical closed forms on S_3
    n = 7
    d = n * (n * n - 1) * (n * n - 4)
    assert weingarten_table(n, 3)[(1, 1, 1)] == Fraction(n * n - 2, d)
    assert weingarten_table(n, 3)[(2, 1)] == Fraction(-1, (n * n - 1) * (n * n - 4))
    assert weingarten_table(n, 3)[(3,)] == Fraction(2, d)


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_convolution_identity(p):
    for n in (p, p + 1, p + 3):
        for sigma in all_permutations(p):
            assert convolution(n, sigma) == (1 if sigma.length == 0 else 0)


@pytest.mark.parametrize("p", range(1, 6))
def test_gram_and_character_routes_agree(p):
    for n in range(p, p + 4):
        gram = weingarten_table(n, p)
        for lam in partitions(p):
            rep = Permutation.from_cycles(p, *_cycles(lam))
            assert gram[lam] == weingarten_character(n, rep)


def _cycles(lam):
    out, start = [], 1
    for part in lam:
        out.append(tuple(range(start, start + part)))
        start += part
    return out


def test_gram_matrix_p2():
    # rows and columns in partitions order: (2,), (1, 1)
    assert gram_matrix(3, 2) == [[9, 3], [3, 9]]
    # row sums are sum over S_p of n^{#rho}
    assert all(sum(row) == 3 * 4 * 5 for row in gram_matrix(3, 3))


@pytest.mark.parametrize("p,n", [(2, 1), (3, 1), (3, 2)])
def test_pseudo_inverse_contract(p, n):
    # Wg * G * Wg = Wg and G * Wg * G = G in the group algebra
    perms = list(all_permutations(p))

    def g(a):
        return Fraction(n ** a.num_cycles)

    def wg(a):
        return weingarten_exact(n, a)

    def conv(f, h):
        return {s: sum(f(s * t.inverse()) * h(t) for t in perms) for s in perms}

    gw = conv(g, wg)
    gwg = conv(lambda s: gw[s], g)
    assert all(gwg[s] == g(s) for s in perms)
    wgw = conv(lambda s: conv(wg, g)[s], wg)
    assert all(wgw[s] == wg(s) for s in perms)


@pytest.mark.parametrize("p", range(1, 6))
def test_u1_moments(p):
    # |u|^{2p} integrates to one on the circle
    spec = MonomialSpec((1,) * p, (1,) * p, (1,) * p, (1,) * p)
    assert monomial_integral(1, spec) == 1


def test_asymptotic_leading_term():
    assert weingarten_asymptotic(5, Permutation.identity(2)) == Fraction(1, 25)
    assert weingarten_asymptotic(5, Permutation.from_cycles(2, (1, 2))) == Fraction(-1, 125)
    for p in range(2, 5):
        for lam in partitions(p):
            a = Permutation.from_cycles(p, *_cycles(lam))
            errs = []
            for n in (16, 32, 64):
                ex = weingarten_exact(n, a)
                errs.append(abs((ex - weingarten_asymptotic(n, a)) / ex))
            assert 3.5 < errs[0] / errs[1] < 4.5
            assert 3.5 < errs[1] / errs[2] < 4.5


def test_characters():
    for p in range(1, 7):
        for mu in partitions(p):
            assert character_sp((p,), mu) == 1
            sign = (-1) ** (p - len(mu))
            assert character_sp((1,) * p, mu) == sign
    # dimensions squared sum to p!
    assert sum(character_sp(lam, (1,) * 5) ** 2 for lam in partitions(5)) == 120


def test_monomial_examples():
    for n in range(1, 6):
        assert monomial_integral(n, MonomialSpec((1,), (1,), (1,), (1,))) == Fraction(1, n)
    assert monomial_integral(3, MonomialSpec((1, 1), (1, 2), (1,), (1,))) == 0
    assert monomial_integral(3, MonomialSpec((1,), (1,), (), ())) == 0
    assert monomial_integral(2, MonomialSpec((1, 2), (1, 2), (1, 2), (1, 2))) == Fraction(1, 3)
    assert monomial_integral(2, MonomialSpec((1, 1), (1, 2), (1, 1), (1, 2))) == Fraction(1, 6)
    assert monomial_integral(3, MonomialSpec((1, 1), (1, 1), (1, 1), (1, 1))) == Fraction(1, 6)
    with pytest.raises(ValueError):
        monomial_integral(2, MonomialSpec((3,), (1,), (1,), (1,)))


@pytest.mark.parametrize("n", range(1, 7))
def test_row_normalization(n):
    total = sum(monomial_integral(n, MonomialSpec((1,), (j,), (1,), (j,))) for j in range(1, n + 1))
    assert total == 1


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_relabeling_invariance(data):
    n = data.draw(st.integers(2, 4))
    p = data.draw(st.integers(1, 2))
    idx = st.tuples(*[st.integers(1, n)] * p)
    i, j, ic, jc = (data.draw(idx) for _ in range(4))
    rows = data.draw(st.permutations(list(range(1, n + 1))))
    cols = data.draw(st.permutations(list(range(1, n + 1))))
    spec = MonomialSpec(i, j, ic, jc)
    moved = MonomialSpec(tuple(rows[x - 1] for x in i), tuple(cols[x - 1] for x in j),
                         tuple(rows[x - 1] for x in ic), tuple(cols[x - 1] for x in jc))
    assert monomial_integral(n, spec) == monomial_integral(n, moved)


def test_monomial_matches_weingarten_sum():
    # |U11 U22|^2 type sums written directly as the double permutation sum
    n, p = 3, 2
    i, j = (1, 2), (2, 3)
    total = Fraction(0)
    for s, t in itertools.product(all_permutations(p), repeat=2):
        if all(i[x] == i[s(x + 1) - 1] for x in range(p)) and all(j[x] == j[t(x + 1) - 1] for x in range(p)):
            total += weingarten_exact(n, s * t.inverse())
    assert monomial_integral(n, MonomialSpec(i, j, i, j)) == total
