import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wgcalc.channels import (
    BudgetError, ChannelError, ChannelModel, MomentReport, SpectrumReport,
    apply_kraus, conjugate_factor, covariance_exact_p1, exact_moment_conjugate,
    exact_moment_independent, exact_moment_rotated, generalized_apply,
    generalized_factor, geodesic_limit_closed, geodesic_limit_conjugate,
    geodesic_limit_subset, gram_spectrum, group_multiplicities, hayden_bound,
    hayden_overlap, input_rank, kraus_from_unitary, limit_moment, limit_spectrum,
    max_entangled_state, output_from_factor, output_spectrum, partial_trace,
    product_factor, second_moment_conjugate, stinespring_apply,
)
from wgcalc.channels.moments import BUDGETS

from conftest import random_state, random_unitary


def kron_output(a_ops, b_ops, rho):
    return sum(np.kron(a, b) @ rho @ np.kron(a, b).conj().T for a in a_ops for b in b_ops)


# ---------------------------------------------------------------------------
# Stinespring and Kraus
# ---------------------------------------------------------------------------

def test_trivial_environment(rng):
    u = random_unitary(rng, 3)
    x = random_state(rng, 3)
    out = stinespring_apply(u, x, 3, 1)
    assert np.allclose(out, u @ x @ u.conj().T)
    assert np.allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(x))


def test_identity_unitary(rng):
    x = random_state(rng, 3)
    assert np.allclose(stinespring_apply(np.eye(6), x, 3, 2), x)
    ops = kraus_from_unitary(np.eye(6), 3, 2)
    assert np.allclose(ops[0], np.eye(3)) and np.allclose(ops[1], 0)


@pytest.mark.parametrize("n,k", [(2, 2), (3, 3), (4, 2), (1, 4)])
def test_kraus_matches_stinespring(rng, n, k):
    for _ in range(5):
        u = random_unitary(rng, n * k)
        x = random_state(rng, n, rank=1)
        ops = kraus_from_unitary(u, n, k)
        assert np.abs(sum(l.conj().T @ l for l in ops) - np.eye(n)).max() < 1e-10
        y = stinespring_apply(u, x, n, k)
        assert np.abs(apply_kraus(ops, x) - y).max() < 1e-10
        assert abs(np.trace(y) - 1) < 1e-10
        assert np.linalg.eigvalsh(y).min() > -1e-10


def test_input_validation(rng):
    with pytest.raises(ChannelError, match="not unitary"):
        stinespring_apply(np.ones((4, 4)), np.eye(2) / 2, 2, 2)
    with pytest.raises(ChannelError, match="trace"):
        stinespring_apply(np.eye(4), np.eye(2), 2, 2)
    with pytest.raises(ChannelError, match="positive"):
        stinespring_apply(np.eye(4), np.diag([1.5, -0.5]), 2, 2)
    with pytest.raises(ChannelError, match="Hermitian"):
        stinespring_apply(np.eye(4), np.array([[0.5, 1], [0, 0.5]]), 2, 2)
    with pytest.raises(ChannelError, match="do not fit"):
        stinespring_apply(np.eye(6), np.eye(2) / 2, 2, 2)


def test_partial_trace_against_einsum(rng):
    m = rng.standard_normal((24, 24))
    t = m.reshape(2, 3, 4, 2, 3, 4)
    assert np.allclose(partial_trace(m, (2, 3, 4), (1,)), np.einsum("abcaec->be", t))
    assert np.allclose(partial_trace(m, (2, 3, 4), (0, 2)),
                       np.einsum("abcdbf->acdf", t).reshape(8, 8))


# ---------------------------------------------------------------------------
# product outputs
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n,k", [(2, 2), (3, 2), (2, 3)])
def test_factors_match_kraus_sums(rng, n, k):
    u, v = random_unitary(rng, n * k), random_unitary(rng, n * k)
    en = max_entangled_state(n)
    a, b = kraus_from_unitary(u, n, k), kraus_from_unitary(v, n, k)
    z = output_from_factor(product_factor(u, v, n, k))
    assert np.abs(z - kron_output(a, b, en)).max() < 1e-12
    z = output_from_factor(conjugate_factor(u, n, k))
    assert np.abs(z - kron_output(a, [l.conj() for l in a], en)).max() < 1e-12


def test_generalized_matches_direct(rng):
    n, k, t = 3, 2, Fraction(1, 2)
    pn = input_rank(n, k, t)
    assert pn == 3
    u = random_unitary(rng, n * k)
    w = u[:, :pn]
    # Phi(X) = tr_k(W X W^*) with Kraus A_c = (I (x) <c|) W
    ops = [w.reshape(n, k, pn)[:, c, :] for c in range(k)]
    z = kron_output(ops, [o.conj() for o in ops], max_entangled_state(pn))
    out = generalized_apply(u, n, k, t)
    assert np.abs(out - z).max() < 1e-12
    assert abs(np.trace(out) - 1) < 1e-10


def test_generalized_full_rank_is_conjugate_input(rng):
    n, k = 2, 2
    u = random_unitary(rng, n * k)
    z = generalized_apply(u, n, k, 1)
    assert input_rank(n, k, 1) == n * k
    overlap, ok = hayden_bound(z, n, Fraction(1, 1) - Fraction(1, 10 ** 12))
    assert overlap <= 1 + 1e-12


def test_input_rank_rounding():
    assert input_rank(16, 2, Fraction(3, 4)) == 24
    assert input_rank(16, 3, Fraction(1, 4)) == 12
    assert input_rank(5, 1, Fraction(1, 2)) == 3  # 2.5 rounds up
    assert input_rank(5, 1, 0.3) == 2
    with pytest.raises(ChannelError):
        input_rank(4, 2, 0)
    with pytest.raises(ChannelError):
        input_rank(4, 2, Fraction(1, 100))


def test_gram_spectrum_matches_full(rng):
    n, k = 4, 2
    u = np.stack([random_unitary(rng, n * k) for _ in range(3)])
    f = conjugate_factor(u, n, k)
    small = gram_spectrum(f)
    full = output_spectrum(output_from_factor(f))
    assert small.shape == (3, k * k)
    assert np.allclose(full[:, :k * k], small)
    assert np.abs(full[:, k * k:]).max() < 1e-12
    assert np.allclose(small.sum(axis=1), 1)


def test_hayden_examples():
    n = 3
    en = max_entangled_state(n)
    assert hayden_bound(en, n, 1)[0] == pytest.approx(1)
    val, ok = hayden_bound(np.eye(n * n) / n ** 2, n, Fraction(1, 2))
    assert val == pytest.approx(1 / n ** 2) and not ok
    with pytest.raises(ChannelError):
        hayden_bound(np.eye(4) / 4, 3, 0.5)


@pytest.mark.parametrize("n,k,t", [(4, 2, Fraction(3, 4)), (5, 3, Fraction(1, 4))])
def test_hayden_overlap_deterministic(rng, n, k, t):
    for _ in range(10):
        u = random_unitary(rng, n * k)
        f = generalized_factor(u, n, k, t)
        z = output_from_factor(f)
        val, ok = hayden_bound(z, n, Fraction(input_rank(n, k, t), n * k))
        assert ok
        assert hayden_overlap(f) == pytest.approx(val)
        assert np.linalg.eigvalsh(z).max() >= val - 1e-10


# ---------------------------------------------------------------------------
# exact moments
# ---------------------------------------------------------------------------

def test_p1_moments_are_one():
    for n, k in [(2, 2), (3, 4), (5, 1)]:
        assert exact_moment_rotated(n, k, 1) == 1
        assert exact_moment_independent(n, k, 1) == 1
        assert exact_moment_conjugate(n, k, 1) == 1
    x = np.diag([Fraction(1, 2), Fraction(1, 3), Fraction(1, 6), 0])
    assert exact_moment_rotated(2, 2, 1, x) == 1


def test_rotated_purity():
    # E tr(Y^2) for a Haar-random pure state reduced to n of nk dimensions
    for n, k in [(2, 2), (3, 2), (2, 5), (4, 3)]:
        assert exact_moment_rotated(n, k, 2) == Fraction(n + k, n * k + 1)


def test_rotated_rank_one_paths_agree():
    for n, k, p in [(2, 2, 2), (2, 3, 3), (3, 2, 4)]:
        x = np.zeros((n * k, n * k), dtype=object)
        x[:] = Fraction(0)
        x[0, 0] = Fraction(1)
        assert exact_moment_rotated(n, k, p) == exact_moment_rotated(n, k, p, x)


def test_rotated_rank_one_via_single_sum():
    # rank-one input: sum over alpha only, divided by the rising factorial
    from wgcalc.perm import all_permutations, gamma_cycle

    for n, k, p in [(2, 2, 2), (3, 2, 3)]:
        g = gamma_cycle(p)
        s = sum(k ** a.num_cycles * n ** (g.inverse() * a).num_cycles for a in all_permutations(p))
        assert exact_moment_rotated(n, k, p) == Fraction(s, math.prod(n * k + j for j in range(p)))


def test_known_values():
    assert exact_moment_independent(3, 2, 2) == Fraction(433, 1225)
    assert exact_moment_conjugate(3, 2, 2) == Fraction(31, 63)
    assert exact_moment_independent(2, 2, 2) == Fraction(12, 25)


def test_k_to_infinity_dominant_behaviour():
    n = 2
    for p in (2, 3):
        target = Fraction(n) ** (2 - 2 * p)
        gaps = [abs(exact_moment_independent(n, k, p) - target) for k in (8, 32, 128)]
        assert gaps[0] > gaps[1] > gaps[2]
        # first-order convergence in 1/k
        assert 3 < gaps[1] / gaps[2] < 5
    gaps = [abs(exact_moment_conjugate(n, k, 2) - Fraction(1, n * n)) for k in (8, 32, 128)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_conjugate_approaches_bell_limit():
    limit = geodesic_limit_conjugate(2, 2)
    assert limit == Fraction(7, 16)
    for p in (2, 3):
        limit = geodesic_limit_conjugate(2, p)
        gaps = [abs(exact_moment_conjugate(n, 2, p) - limit) for n in (4, 8, 16, 32)]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))


def test_second_moment_p1():
    assert second_moment_conjugate(3, 2) == 1
    for n, k in [(2, 2), (3, 2), (4, 3)]:
        assert covariance_exact_p1(n, k) == 0
    with pytest.raises(ValueError):
        covariance_exact_p1(3, 2, p=2)


def test_budgets():
    assert BUDGETS["conjugate"] == 3
    with pytest.raises(BudgetError):
        exact_moment_conjugate(2, 2, BUDGETS["conjugate"] + 1)
    with pytest.raises(BudgetError):
        exact_moment_independent(2, 2, BUDGETS["independent"] + 1)
    with pytest.raises(BudgetError):
        ChannelModel("generalized", 4, 2, Fraction(1, 2)).exact_moment(2)


# ---------------------------------------------------------------------------
# limits
# ---------------------------------------------------------------------------

def test_geodesic_limit_examples():
    for p in range(1, 9):
        assert geodesic_limit_conjugate(1, p) == 1
    assert geodesic_limit_conjugate(2, 1) == 1


@pytest.mark.parametrize("k", range(1, 6))
def test_geodesic_paths_agree(k):
    for p in range(1, 7):
        assert geodesic_limit_subset(k, p) == geodesic_limit_closed(k, p)


def test_limit_spectra():
    assert limit_spectrum("independent", 3, 5, regime="I") == [Fraction(1, 9)] * 9
    spec = limit_spectrum("conjugate", 3, 2)
    assert spec[:4] == [Fraction(5, 8)] + [Fraction(1, 8)] * 3 and spec[4:] == [0] * 5
    assert limit_spectrum("generalized", 3, 2, t=Fraction(1, 2))[:4] == spec[:4]
    assert limit_spectrum("generalized", 8, 2, t=Fraction(1, 4))[:4] == \
        [Fraction(7, 16)] + [Fraction(3, 16)] * 3
    assert limit_spectrum("independent", 4, 2)[:4] == [Fraction(1, 4)] * 4
    assert limit_spectrum("rotated", 4, 2) == [Fraction(1, 2)] * 2 + [0, 0]
    for kind in ("rotated", "independent", "conjugate"):
        for regime in ("I", "II"):
            assert sum(limit_spectrum(kind, 4, 3, regime=regime)) == 1
    with pytest.raises(ValueError):
        limit_spectrum("conjugate", 3, 2, regime="III")
    with pytest.raises(ValueError):
        limit_spectrum("generalized", 3, 2, t=Fraction(1, 2), regime="I")


@pytest.mark.parametrize("k", range(1, 6))
def test_limit_spectrum_reproduces_moments(k):
    for p in range(1, 9):
        assert limit_moment("conjugate", 64, k, p) == geodesic_limit_conjugate(k, p)
    assert limit_moment("independent", 2, k, 3, regime="I") == Fraction(2) ** (2 - 6)


# ---------------------------------------------------------------------------
# models and reports
# ---------------------------------------------------------------------------

def test_model_validation():
    with pytest.raises(ChannelError):
        ChannelModel("nope", 2, 2)
    with pytest.raises(ChannelError):
        ChannelModel("conjugate", 0, 2)
    with pytest.raises(ChannelError):
        ChannelModel("generalized", 2, 2)
    with pytest.raises(ChannelError):
        ChannelModel("conjugate", 2, 2, x=np.eye(4))
    m = ChannelModel("generalized", 16, 2, 0.75)
    assert m.t == Fraction(3, 4) and m.rank == 24 and m.output_dim == 256
    assert ChannelModel("conjugate", 2, 2, Fraction(1, 2)).t is None
    assert m.with_n(4).n == 4


def test_moment_report_round_trip():
    from wgcalc.montecarlo import McEstimate

    r = MomentReport("conjugate", 16, 2, None, 2, Fraction(31, 63), Fraction(7, 16),
                     mc=McEstimate(0.44, 0.001, 1000), seed=7)
    j = r.to_json()
    assert j["exact"] == "31/63" and j["asymptotic"] == "7/16"
    assert j["mc"]["seed"] == 7
    assert MomentReport.from_json(j) == r
    row = r.csv_row()
    assert tuple(row) == MomentReport.CSV_FIELDS
    assert row["t"] == ""


def test_spectrum_report():
    r = SpectrumReport("conjugate", 8, 2, None, [0.6, 0.13, 0.13 * (1 + 1e-8), 0.13],
                       [0.01] * 4, limit_spectrum("conjugate", 8, 2)[:4], 100, seed=1)
    assert r.multiplicities() == [(0.6, 1), (0.13, 3)]
    text = r.to_csv()
    assert text.splitlines()[0].split(",") == list(SpectrumReport.CSV_FIELDS)
    assert "5/8" in text and len(text.splitlines()) == 5


@settings(max_examples=40)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=12))
def test_group_multiplicities_conserve_count(values):
    values = sorted(values, reverse=True)
    groups = group_multiplicities(values)
    assert sum(m for _, m in groups) == len(values)
