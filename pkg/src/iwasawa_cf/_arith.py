"""Small integer helpers: squares, valuations, discriminants, genus splitting."""

from math import isqrt

from sympy import factorint

from .errors import PreconditionError


def is_square(n):
    return n >= 0 and isqrt(n) ** 2 == n


def ord_p(n, p):
    """p-adic order of a nonzero integer."""
    if n == 0:
        raise ValueError("ord of zero")
    n = abs(n)
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def prime_factors(n):
    return sorted(factorint(abs(n)))


def is_fundamental_discriminant(d):
    if d in (0, 1):
        return False
    if d % 4 == 1:
        return all(e == 1 for e in factorint(abs(d)).values())
    if d % 4 == 0:
        m = d // 4
        if m % 4 not in (2, 3):
            return False
        return all(e == 1 for e in factorint(abs(m)).values())
    return False


def prime_discriminants(d):
    """Split a fundamental discriminant into its prime discriminants.

    Odd primes q contribute q* = (-1)^((q-1)/2) q; the 2-part is whatever
    remains (one of -4, 8, -8).
    """
    if not is_fundamental_discriminant(d):
        raise PreconditionError(f"{d} is not a fundamental discriminant")
    parts = []
    rest = d
    for q in prime_factors(d):
        if q == 2:
            continue
        qs = q if q % 4 == 1 else -q
        parts.append(qs)
        rest //= qs
    if rest != 1:
        parts.append(rest)
    return sorted(parts, key=abs, reverse=True)


def genus_factorization(d):
    """Return (D1, D2) with D = D1*D2, both negative, |D1| an odd prime.

    Only defined when D has exactly two prime discriminant factors and both
    are negative, which is what class number one plus a prime 3 mod 4
    dividing D forces.
    """
    parts = prime_discriminants(d)
    if len(parts) != 2 or any(x > 0 for x in parts):
        raise PreconditionError(
            f"D={d} does not factor as a product of two negative prime discriminants",
            clause="genus",
        )
    d1, d2 = parts
    if d1 in (-4, -8):
        d1, d2 = d2, d1
    return d1, d2


def roots_of_unity_count(delta):
    """Number of roots of unity in Q(sqrt(delta)) for delta < 0."""
    if delta == -3:
        return 6
    if delta == -4:
        return 4
    return 2


def divisors(n):
    """Positive divisors of n in increasing order."""
    out = [1]
    for q, e in factorint(n).items():
        out = [d * q**k for d in out for k in range(e + 1)]
    return sorted(out)
