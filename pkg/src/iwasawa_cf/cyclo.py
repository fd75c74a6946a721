"""Exact arithmetic in Q(zeta_{p^n}) and the valuation at (1 - zeta).

Numbers are rational coefficient vectors in the power basis
1, zeta, ..., zeta^(phi-1), always reduced modulo
Phi_{p^n}(x) = sum_{j<p} x^(j p^(n-1)).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm

from sympy import Poly, symbols

from ._arith import ord_p
from .errors import ConsistencyError, PreconditionError
from .quadring import dlog, dlog_table

_X = symbols("x")

INFINITY = float("inf")


def _reduce_full(vec, p, n):
    """Fold a length-p^n exponent vector (mutated) into length phi(p^n)."""
    step = p ** (n - 1)
    phi = step * (p - 1)
    for e in range(len(vec) - 1, phi - 1, -1):
        c = vec[e]
        if c:
            r = e - phi
            for j in range(p - 1):
                vec[r + j * step] -= c
    return vec[:phi]


def from_exponents(p, n, vec):
    """Sum of vec[e] * zeta^e for e in [0, p^n); vec may be any length."""
    order = p**n
    full = [0] * order
    for e, c in enumerate(vec):
        if c:
            full[e % order] += c
    return CycloNumber(p, n, tuple(Fraction(c) for c in _reduce_full(full, p, n)))


@dataclass(frozen=True)
class CycloNumber:
    p: int
    n: int
    coeffs: tuple

    @classmethod
    def zero(cls, p, n):
        return cls(p, n, (Fraction(0),) * (p ** (n - 1) * (p - 1)))

    @classmethod
    def rational(cls, p, n, r):
        z = [Fraction(0)] * (p ** (n - 1) * (p - 1))
        z[0] = Fraction(r)
        return cls(p, n, tuple(z))

    @classmethod
    def zeta(cls, p, n, e=1):
        vec = [0] * p**n
        vec[e % p**n] = 1
        return from_exponents(p, n, vec)

    @classmethod
    def from_coeffs(cls, p, n, coeffs):
        """Arbitrary-length coefficient list, reduced mod Phi_{p^n}."""
        return from_exponents(p, n, [Fraction(c) for c in coeffs])

    @property
    def phi(self):
        return len(self.coeffs)

    def _check(self, other):
        if isinstance(other, (int, Fraction)):
            return CycloNumber.rational(self.p, self.n, other)
        if (other.p, other.n) != (self.p, self.n):
            raise PreconditionError("level mismatch")
        return other

    def __add__(self, other):
        other = self._check(other)
        return CycloNumber(self.p, self.n, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CycloNumber(self.p, self.n, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._check(other)
        order = self.p**self.n
        full = [Fraction(0)] * order
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        full[(i + j) % order] += a * b
        return CycloNumber(self.p, self.n, tuple(_reduce_full(full, self.p, self.n)))

    __rmul__ = __mul__

    def scale(self, r):
        r = Fraction(r)
        return CycloNumber(self.p, self.n, tuple(a * r for a in self.coeffs))

    def __pow__(self, e):
        out = CycloNumber.rational(self.p, self.n, 1)
        for _ in range(e):
            out = out * self
        return out

    def is_zero(self):
        return not any(self.coeffs)

    def is_integral(self):
        return all(c.denominator == 1 for c in self.coeffs)

    def denominator(self):
        return lcm(*(c.denominator for c in self.coeffs))

    def galois(self, a):
        """Image under zeta -> zeta^a, gcd(a, p) = 1."""
        if a % self.p == 0:
            raise PreconditionError("Galois exponent must be prime to p")
        order = self.p**self.n
        vec = [Fraction(0)] * order
        for e, c in enumerate(self.coeffs):
            vec[e * a % order] += c
        return CycloNumber(self.p, self.n, tuple(_reduce_full(vec, self.p, self.n)))

    def conjugates(self):
        order = self.p**self.n
        return [self.galois(a) for a in range(1, order) if a % self.p]

    def is_galois_conjugate(self, other):
        other = self._check(other)
        return any(c == other for c in self.conjugates())

    def to_json(self):
        return [f"{c.numerator}/{c.denominator}" for c in self.coeffs]

    @classmethod
    def from_json(cls, p, n, data):
        return cls(p, n, tuple(Fraction(s) for s in data))

    def __str__(self):
        terms = []
        for e in range(self.phi - 1, -1, -1):
            c = self.coeffs[e]
            if not c:
                continue
            mono = "" if e == 0 else ("z" if e == 1 else f"z^{e}")
            if e == 0:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            elif c == -1:
                terms.append(f"-{mono}")
            else:
                terms.append(f"{c}*{mono}")
        if not terms:
            return "0"
        return " + ".join(terms).replace("+ -", "- ")


@lru_cache(maxsize=None)
def cyclotomic_poly(p, n):
    """Coefficients (low to high) of Phi_{p^n}."""
    step = p ** (n - 1)
    coeffs = [0] * (step * (p - 1) + 1)
    for j in range(p):
        coeffs[j * step] = 1
    return tuple(coeffs)


def norm(x):
    """Absolute norm N(x) = Res(Phi_{p^n}, x(T)) for integral x."""
    if not x.is_integral():
        raise ConsistencyError("not an algebraic integer")
    if x.is_zero():
        return 0
    f = Poly(list(reversed(cyclotomic_poly(x.p, x.n))), _X, domain="ZZ")
    g = Poly([int(c) for c in reversed(x.coeffs)], _X, domain="ZZ")
    if g.degree() <= 0:
        return int(g.LC()) ** f.degree()
    return int(f.resultant(g))


def pn_valuation(x):
    """Order of x at the prime (1 - zeta_{p^n}); +inf for zero.

    The prime is totally ramified of residue degree 1, so the order equals
    ord_p |N(x)|.
    """
    if not x.is_integral():
        raise ConsistencyError("not an algebraic integer")
    if x.is_zero():
        return INFINITY
    return ord_p(norm(x), x.p)


@lru_cache(maxsize=None)
def _inverse_one_minus_zeta(p, n):
    # Phi(T) - p = (T - 1) Q(T), so (1 - zeta)^(-1) = Q(zeta) / p
    phi_coeffs = list(cyclotomic_poly(p, n))
    phi_coeffs[0] -= p
    # synthetic division by (T - 1)
    deg = len(phi_coeffs) - 1
    quot = [0] * deg
    acc = 0
    for i in range(deg, 0, -1):
        acc = acc + phi_coeffs[i]
        quot[i - 1] = acc
    return CycloNumber.from_coeffs(p, n, quot).scale(Fraction(1, p))


def pn_valuation_by_division(x):
    """Same order as pn_valuation, by dividing out (1 - zeta) repeatedly."""
    if not x.is_integral():
        raise ConsistencyError("not an algebraic integer")
    if x.is_zero():
        return INFINITY
    inv = _inverse_one_minus_zeta(x.p, x.n)
    v = 0
    # pull out powers of p first: (p) = P^phi
    content = 0
    for c in x.coeffs:
        content = gcd(content, int(c))
    e = ord_p(content, x.p)
    if e:
        x = x.scale(Fraction(1, x.p**e))
        v += e * x.phi
    while True:
        y = x * inv
        if not y.is_integral():
            return v
        x = y
        v += 1


@dataclass(frozen=True)
class CharacterSpec:
    """psi with psi(g) = zeta^twist, conductor p^(n+1), order p^n (twist prime to p)."""

    p: int
    n: int
    g: int
    exponent_twist: int = 1

    @property
    def conductor(self):
        return self.p ** (self.n + 1)

    def exponents(self):
        """e(t) with psi(t) = zeta^e(t) for t mod p^(n+1); -1 where psi(t) = 0."""
        return _exponent_table(self.p, self.n, self.g, self.exponent_twist)


@lru_cache(maxsize=64)
def _exponent_table(p, n, g, twist):
    order = p**n
    return tuple(e if e < 0 else e * twist % order for e in dlog_table(g, p, n + 1))


def psi_value(t, spec):
    p, n = spec.p, spec.n
    if t % p == 0:
        return CycloNumber.zero(p, n)
    e = dlog(t, spec.g, p, n + 1) * spec.exponent_twist
    return CycloNumber.zeta(p, n, e)
