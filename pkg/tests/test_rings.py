import math

import pytest

from decalage.rings import (
    IntegerRing,
    PolynomialRing,
    PrimeField,
    RationalField,
    RingElementError,
    make_ring,
    ring_from_description,
)


def test_integer_xi_valuation_examples(z2):
    assert z2.xi_valuation(12) == 2
    assert z2.xi_valuation(0) == math.inf
    assert z2.xi_valuation(7) == 0


def test_poly_xi_valuation_example(f5t):
    x = f5t.parse("t^3+t^4")
    assert f5t.xi_valuation(x) == 3
    assert f5t.xi_valuation(f5t.zero()) == math.inf


def test_xi_must_be_prime():
    with pytest.raises(ValueError):
        IntegerRing(6)
    with pytest.raises(ValueError):
        PrimeField(9)


def test_residue_examples(z5, f5t):
    assert z5.residue(5) == 0
    assert z5.residue(7) == 2
    assert f5t.residue(f5t.parse("t+1")) == 1
    assert f5t.residue(f5t.parse("t")) == 0


def test_divrem_symmetric_across_signs(z5):
    for a in range(-25, 26):
        for b in [x for x in range(-9, 10) if x]:
            q, r = z5.divrem(a, b)
            assert a == q * b + r
            assert 2 * abs(r) <= abs(b)


def test_poly_divrem_and_units(f5t):
    a = f5t.parse("t^3+2*t+1")
    b = f5t.parse("t+3")
    q, r = f5t.divrem(a, b)
    assert f5t.add(f5t.mul(q, b), r) == a
    assert f5t.size(r) < f5t.size(b)
    assert f5t.is_unit(f5t.parse("3"))
    assert not f5t.is_unit(f5t.parse("t+3"))


def test_unit_normalize(z5, f5t, qt):
    u, n = z5.unit_normalize(-12)
    assert (u, n) == (-1, 12)
    u, n = f5t.unit_normalize(f5t.parse("3*t^2+1"))
    assert f5t.mul(u, n) == f5t.parse("3*t^2+1")
    assert n[-1] == 1  # monic
    u, n = qt.unit_normalize(qt.parse("1/2*t-3"))
    assert n[-1] == 1


def test_format_parse_roundtrip(f5t, qt, rng):
    for ring in (f5t, qt):
        for _ in range(50):
            deg = rng.randint(0, 4)
            if ring is f5t:
                coeffs = [rng.randrange(5) for _ in range(deg + 1)]
            else:
                from fractions import Fraction

                coeffs = [Fraction(rng.randint(-4, 4), rng.randint(1, 3))
                          for _ in range(deg + 1)]
            x = ring.from_coeffs(coeffs)
            assert ring.parse(ring.format(x)) == x
    assert f5t.format(f5t.parse("2*t^3+1")) == "2*t^3+1"
    assert f5t.format(f5t.parse("t^4 + t^3")) == "t^4+t^3"


def test_parse_rejects_garbage(f5t, z2):
    with pytest.raises(RingElementError):
        f5t.parse("t^-1")
    with pytest.raises(RingElementError):
        f5t.parse("2**t")
    with pytest.raises(RingElementError):
        z2.parse("two")


def test_valuation_additivity(rng, z3, f5t):
    for ring in (z3, f5t):
        for _ in range(120):
            if ring is z3:
                x = rng.randint(-40, 40)
                y = rng.randint(-40, 40)
            else:
                x = ring.from_coeffs([rng.randrange(5) for _ in range(rng.randint(1, 4))])
                y = ring.from_coeffs([rng.randrange(5) for _ in range(rng.randint(1, 4))])
            if ring.is_zero(x) or ring.is_zero(y):
                continue
            assert ring.xi_valuation(ring.mul(x, y)) == \
                ring.xi_valuation(x) + ring.xi_valuation(y)


def test_ring_descriptions_roundtrip(z5, f5t, qt):
    for ring in (z5, f5t, qt, PrimeField(7), RationalField()):
        assert ring_from_description(ring.describe()) == ring


def test_make_ring():
    assert make_ring("z", "7") == IntegerRing(7)
    assert make_ring("fp-poly", None, 3) == PolynomialRing(PrimeField(3))
    assert make_ring("q-poly") == PolynomialRing(RationalField())
    with pytest.raises(RingElementError):
        make_ring("fp-poly", "5")
