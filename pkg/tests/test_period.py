import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from echeur import period
from echeur.curve import C4C6Model, Curve

# least positive real periods, frozen from an independent computer-algebra value
KNOWN = [
    ((0, 0, 1, -1, 0), 2.993458646231959),     # 37a1, delta > 0
    ((0, -1, 1, 0, 0), 6.346046521397768),     # 11a3
    ((0, -1, 1, -10, -20), 1.269209304279553),  # 11a1
    ((1, 0, 1, 4, -6), 1.981341956066883),     # 14a1
]

coef = st.integers(-60, 60)
ainvs = st.tuples(coef, coef, coef, coef, coef)


def _curve(a):
    E = Curve(*a)
    assume(not E.singular)
    return E


@pytest.mark.parametrize("ainvs,omega", KNOWN)
def test_known_periods(ainvs, omega):
    E = Curve(*ainvs)
    assert period.real_period(E) == pytest.approx(omega, rel=1e-13)
    assert period.real_period_quadrature(E) == pytest.approx(omega, rel=1e-12)


@given(ainvs)
def test_agm_matches_quadrature(a):
    E = _curve(a)
    assert period.real_period(E) == pytest.approx(period.real_period_quadrature(E), rel=1e-10)


@given(coef, coef, coef, coef, coef, st.integers(2, 7))
def test_period_scaling(a1, a2, a3, a4, a6, u):
    # (c4, c6) -> (u^4 c4, u^6 c6) scales the period by 1/u
    E = _curve((a1, a2, a3, a4, a6))
    big = E.c_model.scaled(u)
    assert period.real_period(big) == pytest.approx(period.real_period(E) / u, rel=1e-12)


@given(ainvs)
def test_period_is_profile_over_discriminant_power(a):
    E = _curve(a)
    rd = period.real_roots(E)
    scale = abs(E.delta) ** (1 / 12)
    prof = period.profile_pos(rd.t) if rd.sign > 0 else period.profile_neg(rd.c)
    assert period.real_period(E) * scale == pytest.approx(prof, rel=1e-12)


@given(ainvs)
def test_roots_satisfy_cubic(a):
    E = _curve(a)
    rd = period.real_roots(E)
    f = lambda x: 4 * x**3 - E.c4 / 12 * x - E.c6 / 216  # noqa: E731
    scale = max(1.0, abs(E.c4) ** 0.5, abs(E.c6) ** (1 / 3))
    if rd.sign > 0:
        assert rd.e1 > rd.e2 > rd.e3
        for e in (rd.e1, rd.e2, rd.e3):
            assert abs(f(e)) <= 1e-9 * scale**3
        assert 0 < rd.t < 1
        assert 16 * (rd.g12 * rd.g13 * (rd.g13 - rd.g12)) ** 2 == pytest.approx(E.delta, rel=1e-9)
    else:
        assert abs(f(rd.r)) <= 1e-9 * scale**3
        assert 0 < rd.C < 1


def test_sign_errors():
    pos, neg = Curve(0, 0, 1, -1, 0), Curve(0, -1, 1, 0, 0)
    with pytest.raises(period.SignError):
        period.root_quotient(neg)
    with pytest.raises(period.SignError):
        period.c_param(pos)
    with pytest.raises(period.SignError):
        period.mu_coordinates(neg)
    with pytest.raises(period.SingularCurveError):
        period.real_period(Curve(0, 0, 0, 0, 0))


def test_profile_domain():
    with pytest.raises(ValueError):
        period.profile_pos(0.0)
    with pytest.raises(ValueError):
        period.profile_pos(1.0)
    with pytest.raises(ValueError):
        period.profile_neg(math.inf)


def test_profile_maxima():
    mp = period.profile_pos_maximum()
    mn = period.profile_neg_maximum()
    assert mp.argmax == pytest.approx(0.0388505246188, abs=1e-8)
    assert mp.value < 4.414499094
    assert mn.argmax == pytest.approx(-33.58515148525, abs=1e-8)
    assert mn.value < 8.82921518
    ts = np.linspace(1e-4, 0.9999, 2001)
    assert max(period.profile_pos(float(t)) for t in ts) <= mp.value + 1e-12
    cs = np.linspace(-500, 500, 4001)
    assert max(period.profile_neg(float(c)) for c in cs) <= mn.value + 1e-12


def test_profile_neg_stable_branch_continuous():
    # the rewritten inner term for c < 0 must agree with the direct one near 0
    for c in (-1e-3, -1e-6):
        assert period.profile_neg(c) == pytest.approx(period.profile_neg(-c), rel=1e-2)
    assert period.profile_neg(-1e-12) == pytest.approx(period.profile_neg(0.0), rel=1e-10)


def test_mu_lambda_identity_grid():
    mus = np.logspace(-8, 8, 10_000)
    worst = max(abs(m * period.lambda_of_mu(m) * (period.lambda_of_mu(m) + m) - 0.25) for m in mus)
    assert worst < 1e-12


@given(st.floats(1e-3, 1e3))
def test_lambda_two_forms(mu):
    assert period.lambda_of_mu(mu) == pytest.approx(period.lambda_of_mu_direct(mu), rel=1e-9)


@given(ainvs)
def test_c4_c6_reconstruction(a):
    E = _curve(a)
    assume(E.delta > 0)
    lam, mu = period.mu_coordinates(E)
    assert mu * lam * (lam + mu) == pytest.approx(0.25, abs=1e-12)
    assert period.c4_from_mu(E.delta, lam, mu) == pytest.approx(E.c4, rel=1e-9, abs=1e-9 * E.delta ** (1 / 3))
    assert period.c6_from_mu(E.delta, lam, mu) == pytest.approx(E.c6, rel=1e-9, abs=1e-9 * E.delta ** 0.5)


def test_accepts_c4c6_models():
    E = Curve(0, -1, 1, 0, 0)
    assert period.real_period(C4C6Model(E.c4, E.c6)) == period.real_period(E)


def test_quadrature_near_double_complex_root():
    # complex pair nearly colliding (Z/|r| ~ 3e-8): sharp peak in the oracle integrand
    E = Curve(838, 425, -103, -273, 30)
    assert period.real_period_quadrature(E) == pytest.approx(period.real_period(E), rel=1e-9)
