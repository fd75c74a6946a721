"""Independent checks: Kronecker symbols, Bernoulli numbers, binary forms.

Nothing here touches continued fractions, so these routines can validate
the main pipeline from the outside.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt

from sympy import isprime
from sympy.functions.combinatorial.numbers import kronecker_symbol as _kronecker

from ._arith import genus_factorization, is_fundamental_discriminant, prime_factors
from .cyclo import from_exponents
from .errors import AssumptionError, PreconditionError


def kronecker_symbol(d, m):
    return int(_kronecker(d, m))


def quadratic_character(delta):
    """Values of (delta | a) for a in [0, |delta|)."""
    n = abs(delta)
    return [kronecker_symbol(delta, a) for a in range(n)]


def bernoulli_L0(delta, spec=None):
    """L(0, eps*psi) = -B_{1, eps*psi} = -(1/F) sum_{a=1}^{F} eps(a) psi(a) a.

    Without ``spec`` this is the rational L(0, eps) = 2h/w.
    """
    if not is_fundamental_discriminant(delta):
        raise PreconditionError(f"{delta} is not fundamental")
    chi = quadratic_character(delta)
    N = abs(delta)
    if spec is None:
        total = sum(chi[a % N] * a for a in range(1, N + 1))
        return -Fraction(total, N)
    table = spec.exponents()
    f = spec.conductor
    F = N * f
    vec = [0] * spec.p**spec.n
    for a in range(1, F + 1):
        s = chi[a % N]
        e = table[a % f]
        if s and e >= 0:
            vec[e] += s * a
    return from_exponents(spec.p, spec.n, vec).scale(Fraction(-1, F))


def imaginary_class_number(delta):
    """Count reduced forms (a, b, c) of discriminant delta < 0."""
    if delta >= 0 or not is_fundamental_discriminant(delta):
        raise PreconditionError(f"{delta} is not fundamental")
    h = 0
    a = 1
    while 3 * a * a <= -delta:
        for b in range(-a + 1, a + 1):
            num = b * b - delta
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if c == a and b < 0:
                continue
            if gcd(gcd(a, b), c) == 1:
                h += 1
        a += 1
    return h


def reduced_indefinite_forms(D):
    """All reduced forms (a, b, c), b^2 - 4ac = D > 0.

    Reduced means |sqrt D - 2|a|| < b < sqrt D.
    """
    s = isqrt(D)
    out = []
    for b in range(1, s + 1):
        if (b - D) % 2:
            continue
        ac = (b * b - D) // 4
        for a in range(1, -ac + 1):
            if ac % a:
                continue
            # 2|a| + b > sqrt D and 2|a| - b < sqrt D
            if 2 * a + b <= s or 2 * a - b > s:
                continue
            for sa in (a, -a):
                sc = ac // sa
                if gcd(gcd(sa, b), sc) == 1:
                    out.append((sa, b, sc))
    return out


def rho(form, D):
    """Reduction step (a, b, c) -> (c, r, (r^2 - D)/(4c)) with r = -b mod 2c."""
    a, b, c = form
    s = isqrt(D)
    ac2 = 2 * abs(c)
    r = s - (s + b) % ac2
    return (c, r, (r * r - D) // (4 * c))


def form_cycles(D):
    forms = set(reduced_indefinite_forms(D))
    cycles = []
    while forms:
        start = min(forms)
        cyc = [start]
        forms.discard(start)
        f = rho(start, D)
        while f != start:
            if f not in forms:
                raise RuntimeError(f"rho left the reduced set at {f}")
            forms.discard(f)
            cyc.append(f)
            f = rho(f, D)
        cycles.append(cyc)
    return cycles


def narrow_class_number(D):
    return len(form_cycles(D))


def has_unit_of_norm_minus_one(D):
    """True iff the principal form and its negative share a cycle."""
    for cyc in form_cycles(D):
        if any(a == 1 for a, _, _ in cyc):
            return any(a == -1 for a, _, _ in cyc)
    raise RuntimeError("principal cycle not found")


def real_class_number(D):
    if D <= 0 or not is_fundamental_discriminant(D):
        raise PreconditionError(f"{D} is not a positive fundamental discriminant")
    h_plus = narrow_class_number(D)
    if has_unit_of_norm_minus_one(D):
        return h_plus
    return h_plus // 2


def real_class_number_is_one(D):
    return real_class_number(D) == 1


def check_assumption_a(D):
    """Return (D1, D2) if h(Q(sqrt D)) = 1 and some prime 3 mod 4 divides D."""
    if D <= 0 or not is_fundamental_discriminant(D):
        raise AssumptionError(f"D={D} is not a positive fundamental discriminant", clause="A")
    if not any(q % 4 == 3 for q in prime_factors(D)):
        raise AssumptionError(f"no prime 3 mod 4 divides D={D}", clause="A")
    h = real_class_number(D)
    if h != 1:
        raise AssumptionError(f"class number of Q(sqrt {D}) is {h}, not 1", clause="A")
    if has_unit_of_norm_minus_one(D):
        raise AssumptionError(f"Q(sqrt {D}) has a unit of norm -1", clause="A")
    return genus_factorization(D)


def discriminant_of(ell):
    """Field discriminant of Q(sqrt ell) for squarefree ell > 1."""
    return ell if ell % 4 == 1 else 4 * ell


def qualifying_primes(limit):
    """Primes ell < limit, ell = 3 mod 4, with h(Q(sqrt ell)) = 1."""
    return [
        ell
        for ell in range(3, limit)
        if ell % 4 == 3 and isprime(ell) and real_class_number_is_one(4 * ell)
    ]


def is_square_mod(a, q):
    return any((x * x - a) % q == 0 for x in range(q))


__all__ = [
    "bernoulli_L0",
    "check_assumption_a",
    "discriminant_of",
    "form_cycles",
    "has_unit_of_norm_minus_one",
    "imaginary_class_number",
    "is_square_mod",
    "kronecker_symbol",
    "narrow_class_number",
    "qualifying_primes",
    "quadratic_character",
    "real_class_number",
    "real_class_number_is_one",
    "reduced_indefinite_forms",
    "rho",
]
