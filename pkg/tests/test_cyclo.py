import cmath
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iwasawa_cf.cyclo import (
    INFINITY,
    CharacterSpec,
    CycloNumber,
    cyclotomic_poly,
    from_exponents,
    norm,
    pn_valuation,
    pn_valuation_by_division,
    psi_value,
)
from iwasawa_cf.errors import ConsistencyError, PreconditionError

LEVELS = [(3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (7, 1)]


def embed(x, a=1):
    z = cmath.exp(2j * cmath.pi * a / x.p**x.n)
    return sum(complex(c) * z**e for e, c in enumerate(x.coeffs))


def cyclo(level, coeffs):
    p, n = level
    return CycloNumber.from_coeffs(p, n, coeffs)


@st.composite
def cyclo_numbers(draw, level=None, integral=True):
    level = level or draw(st.sampled_from(LEVELS))
    p, n = level
    k = p**n
    if integral:
        coeffs = draw(st.lists(st.integers(-50, 50), min_size=k, max_size=k))
    else:
        coeffs = draw(st.lists(st.fractions(-5, 5, max_denominator=7), min_size=k, max_size=k))
    return cyclo(level, coeffs)


def test_reduction_of_full_exponent_vector():
    # 1 + z + z^2 = 0 at level 3^1
    assert from_exponents(3, 1, [1, 1, 1]).is_zero()
    # sum of primitive 9th roots is 0
    assert from_exponents(3, 2, [0, 1, 1, 0, 1, 1, 0, 1, 1]).is_zero()


def test_cyclotomic_poly():
    assert cyclotomic_poly(3, 2) == (1, 0, 0, 1, 0, 0, 1)
    assert cyclotomic_poly(5, 1) == (1, 1, 1, 1, 1)


@given(st.data())
@settings(max_examples=80)
def test_ring_operations_match_complex_embedding(data):
    level = data.draw(st.sampled_from(LEVELS))
    x = data.draw(cyclo_numbers(level, integral=False))
    y = data.draw(cyclo_numbers(level, integral=False))
    assert embed(x + y) == pytest.approx(embed(x) + embed(y), abs=1e-7)
    assert embed(x - y) == pytest.approx(embed(x) - embed(y), abs=1e-7)
    assert embed(x * y) == pytest.approx(embed(x) * embed(y), abs=1e-6)


@given(st.data())
@settings(max_examples=60)
def test_galois_action_is_embedding_change(data):
    level = data.draw(st.sampled_from(LEVELS))
    x = data.draw(cyclo_numbers(level))
    p, n = level
    a = data.draw(st.integers(1, p**n - 1).filter(lambda a: a % p))
    assert embed(x.galois(a)) == pytest.approx(embed(x, a), abs=1e-6)


def test_galois_rejects_multiple_of_p():
    with pytest.raises(PreconditionError):
        CycloNumber.zeta(3, 1).galois(3)


def test_norm_and_valuation_of_basic_elements():
    for p, n in LEVELS:
        z = CycloNumber.zeta(p, n)
        one = CycloNumber.rational(p, n, 1)
        phi = p ** (n - 1) * (p - 1)
        assert abs(norm(one - z)) == p
        assert pn_valuation(one - z) == 1
        assert pn_valuation(CycloNumber.rational(p, n, p)) == phi
        assert pn_valuation(z) == 0
        assert pn_valuation(CycloNumber.zero(p, n)) == INFINITY


def test_known_valuations():
    a = CycloNumber.from_coeffs(3, 1, [-24, -12])
    b = CycloNumber.from_coeffs(3, 2, [12, -12, 84, 72, 12, 72])
    c = CycloNumber.from_coeffs(5, 1, [-2, 5, 1, 6])
    assert [pn_valuation(x) for x in (a, b, c)] == [3, 6, 2]


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_valuation_additive_and_galois_invariant(data):
    level = data.draw(st.sampled_from(LEVELS))
    x = data.draw(cyclo_numbers(level))
    y = data.draw(cyclo_numbers(level))
    if x.is_zero() or y.is_zero():
        return
    vx, vy = pn_valuation(x), pn_valuation(y)
    assert pn_valuation(x * y) == vx + vy
    for c in x.conjugates():
        assert pn_valuation(c) == vx


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_two_valuation_methods_agree(data):
    x = data.draw(cyclo_numbers())
    assert pn_valuation(x) == pn_valuation_by_division(x)


def test_valuation_needs_integral():
    x = CycloNumber.from_coeffs(3, 1, [Fraction(1, 2)])
    with pytest.raises(ConsistencyError):
        pn_valuation(x)
    with pytest.raises(ConsistencyError):
        pn_valuation_by_division(x)


def test_is_galois_conjugate():
    x = CycloNumber.from_coeffs(3, 1, [-12, 12])  # 12 z - 12
    assert x.is_galois_conjugate(CycloNumber.from_coeffs(3, 1, [-24, -12]))
    assert not x.is_galois_conjugate(CycloNumber.from_coeffs(3, 1, [-24, 12]))


@given(cyclo_numbers(integral=False))
def test_json_round_trip(x):
    data = json.loads(json.dumps(x.to_json()))
    assert CycloNumber.from_json(x.p, x.n, data) == x


def test_str_and_denominator():
    x = CycloNumber.from_coeffs(5, 1, [-2, 5, 1, 6])
    assert str(x) == "6*z^3 + z^2 + 5*z - 2"
    assert str(CycloNumber.zero(5, 1)) == "0"
    assert x.scale(Fraction(1, 6)).denominator() == 6


def test_level_mismatch():
    with pytest.raises(PreconditionError):
        CycloNumber.zeta(3, 1) + CycloNumber.zeta(3, 2)


@pytest.mark.parametrize("p,n,g", [(3, 1, 2), (3, 2, 2), (5, 1, 2), (5, 2, 3), (7, 1, 3)])
def test_character_is_multiplicative(p, n, g):
    spec = CharacterSpec(p, n, g)
    f = spec.conductor
    assert psi_value(g, spec) == CycloNumber.zeta(p, n)
    units = [t for t in range(1, f) if t % p]
    for a in units[:7]:
        for b in units[-7:]:
            assert psi_value(a * b, spec) == psi_value(a, spec) * psi_value(b, spec)
    assert psi_value(p, spec).is_zero()
    # primitive: nontrivial on 1 + p^n
    assert psi_value(1 + p**n, spec) != CycloNumber.rational(p, n, 1)


def test_twisted_character():
    spec = CharacterSpec(5, 1, 2, exponent_twist=3)
    assert psi_value(2, spec) == CycloNumber.zeta(5, 1, 3)
