import math
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from echeur import local
from echeur.curve import Curve
from echeur.enumeration import UnsupportedPrimeError

PRIMES = [5, 7, 11, 13, 17, 10007]


@pytest.mark.parametrize("p", PRIMES)
def test_completeness_exact(p):
    total = local.completeness_check(p)
    assert isinstance(total, Fraction)
    assert total == 1


@pytest.mark.parametrize("p", [5, 7, 11])
def test_probabilities_nonnegative_and_row_partition(p):
    for k in range(0, 30):
        row = [local.prob_m(p, k), local.prob_a_n(p, k), local.prob_a_t(p, k), local.prob_0(p, k)]
        assert all(x >= 0 for x in row)
        assert local.prob_a(p, k) == row[1] + row[2]
    # additive types never have k = 1, 5, 7 of the non-twist kind
    assert local.prob_a_n(p, 1) == local.prob_a_n(p, 5) == local.prob_a_n(p, 7) == 0


def test_small_primes_rejected():
    for f in (local.prob_m, local.prob_a_n, local.prob_0):
        with pytest.raises(UnsupportedPrimeError):
            f(3, 1)


def test_kodaira_known_curves():
    E = Curve(0, -1, 1, -10, -20)  # 11a1, split I5
    assert str(local.classify(11, E.c4, E.c6, E.delta)) == "I5"
    assert local.tamagawa(11, E.c4, E.c6, E.delta) == 5
    E = Curve(0, -1, 1, 0, 0)  # 11a3, I1
    assert local.tamagawa(11, E.c4, E.c6) == 1
    E = Curve(0, 0, 1, -1, 0)  # 37a1
    assert local.local_datum(37, E.c4, E.c6).tamagawa == 1


@given(st.integers(0, 4), st.integers(0, 4))
def test_i0_star_tamagawa_counts_roots(a, b):
    p = 5
    assume((4 * a**3 + 27 * b * b) % p)
    E = Curve(0, 0, 0, 25 * a, 125 * b)
    assert str(local.classify(p, E.c4, E.c6)) == "I0*"
    roots = sum(1 for x in range(p) if (x**3 + a * x + b) % p == 0)
    assert local.tamagawa(p, E.c4, E.c6) == 1 + roots


@given(*[st.integers(-300, 300)] * 5)
def test_tamagawa_ranges(a1, a2, a3, a4, a6):
    E = Curve(a1, a2, a3, a4, a6)
    assume(not E.singular)
    for p in (5, 7, 11, 13):
        if E.c4 % p**4 == 0 and E.c6 % p**6 == 0:
            continue
        kod = local.classify(p, E.c4, E.c6, E.delta)
        t = local.tamagawa(p, E.c4, E.c6, E.delta)
        if kod.tag == "I_n":
            assert t in (kod.k, 1, 2)
        elif str(kod) == "good":
            assert t == 1
        else:
            assert 1 <= t <= 4


@pytest.mark.parametrize("p", [5, 7, 11, 13])
def test_i0_star_average(p):
    rational, sqrt2 = local.i0_star_sqrt_tamagawa_average(p)
    assert rational == Fraction(2, 3) - Fraction(1, 3 * p)
    assert sqrt2 == Fraction(1, 2)
    assert float(rational) + math.sqrt(2) * float(sqrt2) == pytest.approx(local.epsilon_a_t(p, 6), rel=1e-15)


def test_i0_star_census_total():
    for p in (5, 7, 11):
        c = local.i0_star_root_census(p)
        assert sum(c.values()) == p * p - p  # discriminant vanishes on a curve with p points


def test_epsilon_values():
    assert local.epsilon_m(1) == 1.0
    assert local.epsilon_a_n(2) == 1.0
    assert local.epsilon_a_t(7, 7) == pytest.approx((math.sqrt(2) + 2) / 2)


def test_sqrt_tamagawa_local_is_weighted_mean():
    # brute force over the exact law with a long truncation
    for p in (5, 7):
        total = 0.0
        for k in range(0, 200):
            total += float(local.prob_0(p, k))
            if k >= 1:
                even = math.sqrt(2) if k % 2 == 0 else 1.0
                total += float(local.prob_m(p, k)) * (math.sqrt(k) + even) / 2
            total += float(local.prob_a_n(p, k)) * local.epsilon_a_n(k)
            total += float(local.prob_a_t(p, k)) * local.epsilon_a_t(p, k)
        assert local.expected_sqrt_tamagawa_local(p) == pytest.approx(total, rel=1e-14)


def test_beta_tau_monotone_and_tail_small():
    b1, b2 = local.beta_tau(1000), local.beta_tau(10_000)
    assert b2 > b1 > 1
    assert math.log(b2 / b1) < local.beta_tau_tail(1000)
    assert local.beta_tau_tail(10_000) < 1e-3


@pytest.mark.parametrize("q", [1, 5, 7, 25, 35, 125, 539])
def test_prob_ratio_closed_form_vs_truncated_product(q):
    closed = float(local.prob_ratio(q))
    direct = local.prob_ratio_truncated(q, 200_000)
    assert closed == pytest.approx(direct, rel=2e-6)


def test_ratio_constant_against_zeta_values():
    from echeur.special import zeta
    ref = zeta(10) / zeta(2) / ((1 - 2**-2) * (1 - 3**-2)) * (1 - 2**-10) * (1 - 3**-10)
    assert float(local.ratio_constant()) == pytest.approx(ref, rel=1e-14)


def test_prob_ratio_upper_bound_and_sum():
    qs = local.rough_numbers(1000)
    total = 0.0
    for q in qs:
        f = float(local.prob_ratio(q))
        bound = math.prod(3 / p for p in local.factored(q)) / q
        assert f <= bound
        total += f
    assert total <= 1
    bound, alpha = local.tail_probability_bound(1000)
    assert total >= 1 - bound
    assert 0 < alpha < 1


def test_prob_ratio_rejects_2_and_3():
    with pytest.raises(UnsupportedPrimeError):
        local.prob_ratio(6)


def test_eta_is_one_at_q_1_and_multiplicative():
    assert local.eta(1) == 1.0
    assert local.eta(35) == pytest.approx(local.eta(5) * local.eta(7), rel=1e-15)


def test_sqfree_law():
    for q in (1, 2, 3, 4, 8, 9):
        assert float(local.sqfree_ratio_prob(q)) == pytest.approx(
            6 / math.pi**2 / q * math.prod(1 / (p + 1) for p in local.factored(q)), rel=1e-15)
    freq = local.sqfree_ratio_frequencies(10_000, [1, 2, 4])
    assert freq[1] == Fraction(sum(1 for n in range(1, 10_001) if all(n % (p * p) for p in range(2, 101))), 10_000)


def test_conductor_constant_routes():
    cc = local.conductor_count_constant(p_max=10_000, q_max=300)
    assert cc.c_euler == pytest.approx(12.22, rel=2e-3)
    assert 0 < cc.c < cc.c_euler
    assert local.predicted_B(1e6, cc) == pytest.approx(cc.c * 1e5)


def test_rough_numbers():
    assert local.rough_numbers(25) == [1, 5, 7, 11, 13, 17, 19, 23, 25]


def test_factored_accepts_mapping_and_int():
    assert local.factored(175) == {5: 2, 7: 1}
    assert local.factored({5: 2, 7: 1}) == {5: 2, 7: 1}


def test_valuation_and_squares():
    assert local.valuation(5**7 * 3, 5) == 7
    squares = {x * x % 11 for x in range(1, 11)}
    assert all(local.is_square_mod(a, 11) == (a in squares) for a in range(1, 11))
