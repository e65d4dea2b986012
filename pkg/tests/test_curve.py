import random

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from echeur.curve import (
    C4C6Model,
    Curve,
    InadmissibleError,
    admissible_classes,
    curve_from_c4c6,
    discriminant_of,
    from_a_invariants,
    is_admissible,
    is_minimal,
)

small = st.integers(-200, 200)


def test_known_curve_invariants():
    # 11a3: y^2 + y = x^3 - x^2
    E = from_a_invariants(0, -1, 1, 0, 0)
    assert (E.c4, E.c6, E.delta) == (16, -152, -11)
    # 37a1: y^2 + y = x^3 - x
    E = Curve(0, 0, 1, -1, 0)
    assert (E.c4, E.c6, E.delta) == (48, -216, 37)


def test_admissible_class_count():
    classes = admissible_classes()
    assert len(classes) == 288
    assert all(0 <= c.c4_res < 576 and 0 <= c.c6_res < 1728 for c in classes)


@given(small, small, small, small, small)
def test_discriminant_identity(a1, a2, a3, a4, a6):
    E = Curve(a1, a2, a3, a4, a6)
    assert E.c4**3 - E.c6**2 == 1728 * E.delta
    assert 4 * E.b8 == E.b2 * E.b6 - E.b4**2


@given(small, small, small, small, small)
def test_integral_models_are_admissible(a1, a2, a3, a4, a6):
    E = Curve(a1, a2, a3, a4, a6)
    assume(not E.singular)
    assert is_admissible(E.c4, E.c6)
    assert E.c_model.congruence_class in admissible_classes()


@given(small, small, small, small, small)
def test_recovery_from_c_invariants(a1, a2, a3, a4, a6):
    E = Curve(a1, a2, a3, a4, a6)
    F = curve_from_c4c6(E.c4, E.c6)
    assert (F.c4, F.c6) == (E.c4, E.c6)
    assert F.a1 in (0, 1) and F.a3 in (0, 1)


@given(small, small, small, small, small, st.sampled_from([2, 3, 5, 7]))
def test_scaled_model_is_not_minimal(a1, a2, a3, a4, a6, u):
    E = Curve(a1, a2, a3, a4, a6)
    assume(not E.singular)
    scaled = E.c_model.scaled(u)
    assert not is_minimal(scaled.c4, scaled.c6)


def test_inadmissible_pairs_rejected():
    with pytest.raises(InadmissibleError):
        discriminant_of(1, 0)
    with pytest.raises(InadmissibleError):
        is_minimal(1, 1)
    with pytest.raises(InadmissibleError):
        curve_from_c4c6(1, 0)


def test_minimality_known_cases():
    assert is_minimal(16, -152)
    assert not is_minimal(16 * 5**4, -152 * 5**6)
    # a model that is non-minimal at 2 only through the 2-adic class condition
    E = Curve(0, 0, 0, -1, 0)  # y^2 = x^3 - x, c4 = 48, c6 = 0
    assert is_minimal(E.c4, E.c6)


def test_parse_roundtrip():
    E = Curve.parse("[0, -1, 1, -10, -20]")
    assert E.ainvs == (0, -1, 1, -10, -20)
    assert Curve.parse(E.to_csv()) == E
    with pytest.raises(ValueError):
        Curve.parse("1,2,3")


def test_c4c6_model_delta():
    assert C4C6Model(16, -152).delta == -11
    rng = random.Random(3)
    for _ in range(200):
        E = Curve(*(rng.randint(-50, 50) for _ in range(5)))
        if not E.singular:
            assert E.c_model.delta == E.delta
