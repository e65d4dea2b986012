import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from echeur import lattice
from echeur.lattice import GramMatrix

entry = st.floats(0.05, 50)
_GENS = {"S": (0, 1, -1, 0), "T": (1, 0, 1, 1), "U": (1, 0, -1, 1), "N": (-1, 0, 0, -1)}


def _word(w):
    m = (1, 0, 0, 1)
    for ch in w:
        a, b, c, d = m
        e, f, g, h = _GENS[ch]
        m = (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    return m


unimodular = st.text(alphabet="STUN", max_size=8).map(_word)


def _gram(a, b, c):
    g = GramMatrix(a, b, c)
    assume(a > 0 and c > 0 and g.det / (a * c) > 1e-3)
    return g


def test_square_and_hexagonal_lattices():
    z = lattice.reduce(GramMatrix(1, 0, 1))
    assert (z.x, z.y) == pytest.approx((0.0, 1.0))
    z = lattice.reduce(GramMatrix(2, 1, 2))
    assert (z.x, z.y) == pytest.approx((0.5, math.sqrt(3) / 2))


@given(entry, st.floats(-50, 50), entry)
def test_reduced_point_in_right_half_domain(a, b, c):
    z = lattice.reduce(_gram(a, b, c))
    assert 0 <= z.x <= 0.5
    assert z.x**2 + z.y**2 >= 1 - 1e-9


@given(entry, st.floats(-20, 20), entry, unimodular)
def test_basis_change_invariance(a, b, c, m):
    g = _gram(a, b, c)
    h = g.transform(*m)
    assume(h.det / (h.g11 * h.g22) > 1e-6)
    z, w = lattice.reduce(g), lattice.reduce(h)
    assert z.y == pytest.approx(w.y, rel=1e-7)
    # on the boundary x and the mirror point are identified
    if 1e-6 < z.x < 0.5 - 1e-6 and z.x**2 + z.y**2 > 1 + 1e-6:
        assert z.x == pytest.approx(w.x, abs=1e-7)


def test_reduce_matches_brute_force():
    rng = np.random.Generator(np.random.PCG64(11))
    compared = mismatches = 0
    for _ in range(1000):
        P = rng.normal(size=2)
        Q = rng.normal(size=2)
        g = GramMatrix(float(P @ P), float(P @ Q), float(Q @ Q))
        try:
            b = lattice.reduce_brute_force(g)
        except lattice.ConditioningError:  # oracle box too large for a pure-Python scan
            continue
        a = lattice.reduce(g)
        compared += 1
        mismatches += not (abs(a.x - b.x) < 1e-9 and abs(a.y - b.y) < 1e-9)
    assert compared >= 950
    assert mismatches == 0


def test_reduce_many_matches_scalar():
    rng = np.random.Generator(np.random.PCG64(5))
    P = rng.normal(size=(500, 2))
    Q = rng.normal(size=(500, 2))
    g11, g12, g22 = (P * P).sum(1), (P * Q).sum(1), (Q * Q).sum(1)
    x, y = lattice.reduce_many(g11, g12, g22)
    for i in range(500):
        z = lattice.reduce(GramMatrix(g11[i], g12[i], g22[i]))
        assert (x[i], y[i]) == pytest.approx((z.x, z.y), abs=1e-9)


def test_errors():
    with pytest.raises(lattice.NotPositiveDefiniteError):
        lattice.reduce(GramMatrix(1, 2, 1))
    with pytest.raises(lattice.ConditioningError):
        lattice.reduce(GramMatrix(1, 1 - 1e-14, 1))


def test_haar_reference():
    assert lattice.haar_fraction_y_at_least(1) == 3 / math.pi
    with pytest.raises(ValueError):
        lattice.haar_fraction_y_at_least(0.9)


def test_haar_sample_deterministic_and_in_domain():
    x1, y1 = lattice.sample_haar_array(10_000, 3)
    x2, y2 = lattice.sample_haar_array(10_000, 3)
    assert np.array_equal(x1, x2) and np.array_equal(y1, y2)
    assert np.all((x1 >= 0) & (x1 <= 0.5) & (x1**2 + y1**2 >= 1))
    assert not np.array_equal(x1, lattice.sample_haar_array(10_000, 4)[0])


def test_haar_sample_fractions():
    pts = lattice.sample_haar_array(400_000, 1)
    for Y, frac in lattice.y_threshold_fractions(pts).items():
        assert abs(frac - lattice.haar_fraction_y_at_least(Y)) < 5e-3
    table = lattice.bin_x(pts)
    assert all(abs(f - 0.1) < 5e-3 for f in table.fractions)


def test_bin_x_edges():
    pts = [lattice.UpperHalfPoint(0.5, 2.0), lattice.UpperHalfPoint(0.0, 2.0), lattice.UpperHalfPoint(0.2, 0.9)]
    t = lattice.bin_x(pts, bins=5)
    assert t.total == 2
    assert t.counts[0] == 1 and t.counts[-1] == 1
    with pytest.raises(ValueError):
        lattice.bin_x(pts, y_min=10)


def test_ingest_csv(tmp_path):
    f = tmp_path / "g.csv"
    f.write_text("g11,g12,g22\n# comment\n1,0,1\n2,1,2\n\n1,2,1\nx,1,1\n")
    with pytest.raises(lattice.GramParseError) as err:
        lattice.ingest_gram_csv(f)
    assert [n for n, _ in err.value.errors] == [6, 7]
    grams = lattice.ingest_gram_csv(f, strict=False)
    assert grams == [GramMatrix(1, 0, 1), GramMatrix(2, 1, 2)]
