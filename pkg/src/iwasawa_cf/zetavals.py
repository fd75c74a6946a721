"""Partial zeta values at s = 0 and twisted Dedekind sums.

The c_k sequence attached to a ray class [(alpha)] mod p^(n+1) feeds the
Bernoulli-polynomial sum for zeta(0, c); the twisted Dedekind sums are the
character-weighted versions of the same quantities.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .cfrac import convergent_arrays
from .cyclo import CycloNumber, from_exponents


def frac(x):
    return x - (x.numerator // x.denominator)


def B1(x):
    return x - Fraction(1, 2)


def B2(x):
    return x * x - x + Fraction(1, 6)


@dataclass(frozen=True)
class RayClassRep:
    """alpha = x + y*omega, a unit mod p^(n+1)."""

    x: int
    y: int
    p: int
    n: int

    @property
    def modulus(self):
        return self.p ** (self.n + 1)


@dataclass(frozen=True)
class CkSequence:
    values: tuple  # values[i] = c_{i-2}

    def __getitem__(self, k):
        return self.values[k + 2]

    def __len__(self):
        return len(self.values)


def c_sequence(rep, cf, count):
    """c_{-2}, ..., c_{count-1} by the closed form {-(x q_k + y p_k)/p^(n+1)}.

    ``cf`` is the expansion of (delta + sqrt D)/2.
    """
    f = rep.modulus
    ps, qs = convergent_arrays(cf, count, f)
    c_m2 = Fraction((rep.x - (cf.b0 - cf.delta) * rep.y) % f, f)
    vals = [c_m2]
    for p_k, q_k in zip(ps, qs):
        vals.append(Fraction(-(rep.x * q_k + rep.y * p_k) % f, f))
    return CkSequence(tuple(vals))


def c_sequence_recursive(rep, cf, count):
    """Same sequence from c_{-2}, c_{-1} and c_k = {b_k c_{k-1} - c_{k-2}}.

    The recursion runs along varpi = [[2 b0 - delta, b1, ...]], so b_0 is
    replaced by 2 b0 - delta.
    """
    f = rep.modulus
    c2 = Fraction((rep.x - (cf.b0 - cf.delta) * rep.y) % f, f)
    c1 = Fraction(-rep.y % f, f)
    vals = [c2, c1]
    for k in range(count):
        b = 2 * cf.b0 - cf.delta if k == 0 else cf.term(k)
        c = frac(b * c1 - c2)
        vals.append(c)
        c2, c1 = c1, c
    return CkSequence(tuple(vals))


def yamamoto_zeta0(rep, cf, rn):
    """zeta(0, [(alpha)]) as sum_{k=1}^{rn m} (b_k/2 B2(c_{k-1}) - B1(c_{k-1}) B1(c_{k-2}))."""
    L = rn * cf.m
    c = c_sequence(rep, cf, L)
    total = Fraction(0)
    for k in range(1, L + 1):
        total += Fraction(cf.term(k), 2) * B2(c[k - 1]) - B1(c[k - 1]) * B1(c[k - 2])
    return total


def yamamoto_zeta0_prep(rep, cf, rn):
    """The B1^2 form without the class-independent constant."""
    L = rn * cf.m
    c = c_sequence(rep, cf, L)
    total = Fraction(0)
    for k in range(1, L + 1):
        b1 = B1(c[k - 1])
        total += Fraction(cf.term(k), 2) * b1 * b1 - b1 * B1(c[k - 2])
    return total


def class_constant(cf, rn):
    """C = -(rn/24) sum_{k=1}^{m} b_k; zeta(0, c) = prep form + C."""
    return -Fraction(rn, 24) * sum(cf.period)


def twisted_dedekind(a, b, spec):
    """sum_{t=1}^{f} psi(t) ({at/f} - 1/2)({bt/f} - 1/2), f = p^(n+1)."""
    f = spec.conductor
    table = spec.exponents()
    vec = [0] * spec.p**spec.n
    for t in range(1, f):
        e = table[t]
        if e >= 0:
            vec[e] += (2 * (a * t % f) - f) * (2 * (b * t % f) - f)
    return from_exponents(spec.p, spec.n, vec).scale(Fraction(1, 4 * f * f))


def psi_square_sum(spec):
    """sum_{t=1}^{f-1} psi(t) t^2 as an integral cyclotomic number."""
    table = spec.exponents()
    vec = [0] * spec.p**spec.n
    for t in range(1, spec.conductor):
        if table[t] >= 0:
            vec[table[t]] += t * t
    return from_exponents(spec.p, spec.n, vec)


def dedekind_diag_closed_form(a, spec):
    """D_psi(a, a) = conj(psi(a)) / p^(2n+2) * sum psi(t) t^2."""
    p, n, f = spec.p, spec.n, spec.conductor
    if a % p == 0:
        return CycloNumber.zero(p, n)
    e = spec.exponents()[a % f]
    return (psi_square_sum(spec) * CycloNumber.zeta(p, n, -e)).scale(Fraction(1, f * f))
