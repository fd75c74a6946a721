"""Minus continued fractions of real quadratic irrationals.

A minus expansion writes alpha = b0 - 1/(b1 - 1/(b2 - ...)) with every b_i >= 2
past b0.  Everything here runs in exact integer arithmetic on surds
(P + sqrt(D))/Q; floats never enter the core path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import islice
from math import isqrt
from typing import Iterator, Optional

from ._arith import divisors, genus_factorization, is_square, roots_of_unity_count
from .errors import ConsistencyError, PreconditionError


def surd_sign(u, v, d):
    """Sign of u + v*sqrt(d) for integers u, v and d > 0."""
    if v == 0:
        return (u > 0) - (u < 0)
    if u >= 0 and v >= 0:
        return 1
    if u <= 0 and v <= 0:
        return -1
    # mixed signs: compare u^2 with v^2 d
    cmp = u * u - v * v * d
    if u > 0:
        return (cmp > 0) - (cmp < 0)
    return (cmp < 0) - (cmp > 0)


@dataclass(frozen=True)
class QuadraticSurd:
    """The real number (P + sqrt(D)) / Q, kept with Q | D - P^2."""

    P: int
    Q: int
    D: int

    def __post_init__(self):
        P, Q, D = self.P, self.Q, self.D
        if Q == 0:
            raise PreconditionError("zero denominator")
        if D <= 0 or is_square(D):
            raise PreconditionError("not irrational")
        if (D - P * P) % Q:
            # scale numerator and denominator by |Q| so the divisibility holds
            aq = abs(Q)
            P, Q, D = P * aq, Q * aq, D * Q * Q
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "D", D)

    def floor(self):
        s = isqrt(self.D)
        if self.Q > 0:
            return (self.P + s) // self.Q
        return (-self.P - s - 1) // (-self.Q)

    def ceil(self):
        # never an integer, so ceil = floor + 1
        return self.floor() + 1

    def conjugate_sign(self):
        """Sign of (P - sqrt(D))/Q."""
        return surd_sign(self.P, -1, self.D) * (1 if self.Q > 0 else -1)

    def __float__(self):
        return (self.P + self.D**0.5) / self.Q


@dataclass(frozen=True)
class MinusCF:
    """Eventually periodic minus expansion [[head; period, period, ...]].

    ``head`` holds the preperiod including b0 (empty for purely periodic
    input). ``delta`` and ``D`` are set when the expansion is of
    (delta + sqrt(D))/2, otherwise None.
    """

    head: tuple
    period: tuple
    D: Optional[int] = None
    delta: Optional[int] = None

    @property
    def m(self):
        return len(self.period)

    @property
    def b0(self):
        return self.term(0)

    def term(self, k):
        h = len(self.head)
        if k < h:
            return self.head[k]
        return self.period[(k - h) % len(self.period)]

    def terms(self) -> Iterator[int]:
        k = 0
        while True:
            yield self.term(k)
            k += 1

    def __str__(self):
        head = ", ".join(map(str, self.head))
        per = ", ".join(map(str, self.period))
        if head:
            return f"[[{head}; {per}]]"
        return f"[[; {per}]]"


def _minimal_period(block):
    n = len(block)
    for d in divisors(n):
        if block[:d] * (n // d) == block:
            return block[:d]
    return block


def expand_minus_cf(surd, max_steps=100_000):
    """Expand ``surd`` as head + minimal repeating block.

    Partial quotients are b = ceil(alpha), alpha <- 1/(b - alpha); the period
    is found by the first repeat of the (P, Q) state.
    """
    P, Q, D = surd.P, surd.Q, surd.D
    seen = {}
    bs = []
    for _ in range(max_steps + 1):
        state = (P, Q)
        if state in seen:
            start = seen[state]
            head, period = tuple(bs[:start]), tuple(bs[start:])
            period = _minimal_period(period)
            return MinusCF(head=head, period=period)
        seen[state] = len(bs)
        b = QuadraticSurd(P, Q, D).ceil()
        bs.append(b)
        P = b * Q - P
        Q = (P * P - D) // Q
    raise PreconditionError("period overflow")


def expand_discriminant(D):
    """Minus expansion of (delta + sqrt(D))/2 with delta = D mod 4."""
    if D % 4 not in (0, 1):
        raise PreconditionError(f"{D} is not a discriminant")
    delta = D % 4
    cf = expand_minus_cf(QuadraticSurd(delta, 2, D))
    return MinusCF(cf.head, cf.period, D=D, delta=delta)


def plus_to_minus(plus_cf, length=None):
    """Convert a plus expansion [a0; a1, a2, ...] into minus partial quotients.

    ``plus_cf`` may be any iterable, including an infinite generator; pass
    ``length`` to cut the (lazy) output.
    """

    def gen():
        it = iter(plus_cf)
        try:
            a0 = next(it)
        except StopIteration:
            raise PreconditionError("empty expansion") from None
        yield a0 + 1
        for i, a in enumerate(it, start=1):
            if i % 2:
                yield from [2] * (a - 1)
            else:
                yield a + 2

    out = gen()
    if length is not None:
        return list(islice(out, length))
    return list(out)


@dataclass(frozen=True)
class ConvergentPair:
    k: int
    p: int
    q: int


def convergents_mod(cf, count, modulus=None):
    """Convergents (p_k, q_k) for k = -1 .. count-1 of a minus expansion.

    p_k = b_k p_{k-1} - p_{k-2}, q_k likewise, seeded by p_{-1}=1, q_{-1}=0,
    p_{-2}=0, q_{-2}=-1. With ``modulus`` every value is reduced.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    if modulus is not None and modulus <= 0:
        raise ValueError("modulus must be positive")
    out = [ConvergentPair(-1, 1, 0)]
    p2, q2, p1, q1 = 0, -1, 1, 0
    for k in range(count):
        b = cf.term(k)
        p, q = b * p1 - p2, b * q1 - q2
        if modulus is not None:
            p %= modulus
            q %= modulus
        out.append(ConvergentPair(k, p, q))
        p2, q2, p1, q1 = p1, q1, p, q
    return out


def convergent_arrays(cf, count, modulus):
    """Residues of p_k, q_k as two flat lists starting at k = -1.

    ps[i] = p_{i-1} mod modulus for i = 0 .. count. Used by the hot loops,
    where building ConvergentPair objects is wasted work.
    """
    ps = [1 % modulus]
    qs = [0]
    p2, q2, p1, q1 = 0, modulus - 1, 1 % modulus, 0
    for k in range(count):
        b = cf.term(k)
        p, q = (b * p1 - p2) % modulus, (b * q1 - q2) % modulus
        ps.append(p)
        qs.append(q)
        p2, q2, p1, q1 = p1, q1, p, q
    return ps, qs


@dataclass(frozen=True)
class FundamentalUnit:
    """eps = a + b*omega with omega = (delta + sqrt(D))/2."""

    a: int
    b: int
    D: int

    @property
    def delta(self):
        return self.D % 4

    @property
    def norm(self):
        a, b, d = self.a, self.b, self.delta
        return a * a + d * a * b - b * b * (self.D - d) // 4

    def trace(self):
        return 2 * self.a + self.delta * self.b

    def __str__(self):
        if self.delta == 0:
            return f"{self.a} + {self.b}*sqrt({self.D // 4})"
        return f"({2 * self.a + self.b} + {self.b}*sqrt({self.D}))/2"

    def embeddings_sign(self):
        """Signs of eps and its conjugate (2a + b delta +- b sqrt D)/2."""
        u = 2 * self.a + self.delta * self.b
        return surd_sign(u, self.b, self.D), surd_sign(u, -self.b, self.D)

    def greater_than_one(self):
        u = 2 * self.a + self.delta * self.b - 2
        return surd_sign(u, self.b, self.D) > 0


def _check_discriminant(D):
    if D <= 0 or D % 4 not in (0, 1):
        raise PreconditionError(f"{D} is not a positive discriminant")
    if is_square(D):
        raise PreconditionError("not irrational")


def fundamental_unit(D):
    """Generator > 1 of the totally positive units of Z + omega Z.

    Uses the purely periodic expansion of varpi = (2 b0 - delta + sqrt D)/2:
    eps = Q_{m-1} varpi - Q_{m-2} with Q_k the convergent denominators.
    """
    _check_discriminant(D)
    cf = expand_discriminant(D)
    delta, b0, m = cf.delta, cf.b0, cf.m
    varpi = expand_minus_cf(QuadraticSurd(2 * b0 - delta, 2, D))
    if varpi.head or varpi.period != (2 * b0 - delta,) + cf.period[:-1]:
        raise ConsistencyError("unit construction failed: varpi not purely periodic")
    conv = convergents_mod(varpi, m)
    q_m1, q_m2 = conv[m].q, conv[m - 1].q
    # varpi = b0 - delta + omega
    eps = FundamentalUnit(q_m1 * (b0 - delta) - q_m2, q_m1, D)
    _validate_unit(eps)
    return eps


def _validate_unit(eps):
    if eps.norm != 1:
        raise ConsistencyError(f"unit construction failed: norm {eps.norm}")
    if eps.embeddings_sign() != (1, 1):
        raise ConsistencyError("unit construction failed: not totally positive")
    if not eps.greater_than_one():
        raise ConsistencyError("unit construction failed: eps <= 1")


def hz_class_number_product(D, D1=None, D2=None):
    """h(D1) h(D2) from the period of (delta + sqrt D)/2.

    (w1 w2 / 24) * sum_{k=1}^{m} (b_k - 3); the result must be a positive
    integer, otherwise the class-number-one hypothesis on D is violated.
    """
    if D1 is None or D2 is None:
        D1, D2 = genus_factorization(D)
    if D1 * D2 != D:
        raise PreconditionError(f"{D1}*{D2} != {D}")
    cf = expand_discriminant(D)
    w = roots_of_unity_count(D1) * roots_of_unity_count(D2)
    value = Fraction(w, 24) * sum(b - 3 for b in cf.period)
    if value <= 0 or value.denominator != 1:
        raise PreconditionError(f"assumption violation: got {value}", clause="A")
    return int(value)


def hz_class_number(ell):
    """h(-ell) = (w/2) ((1/3) sum b_i - m) from the minus expansion of sqrt(ell).

    w = 2 except for ell = 3.
    """
    cf = expand_minus_cf(QuadraticSurd(0, 1, ell))
    value = Fraction(roots_of_unity_count(-ell), 2) * (Fraction(sum(cf.period), 3) - cf.m)
    if value <= 0 or value.denominator != 1:
        raise PreconditionError(f"assumption violation: got {value}", clause="A")
    return int(value)


def sqrt_expansion(ell):
    return expand_discriminant(4 * ell)


__all__ = [
    "ConvergentPair",
    "FundamentalUnit",
    "MinusCF",
    "QuadraticSurd",
    "convergent_arrays",
    "convergents_mod",
    "expand_discriminant",
    "expand_minus_cf",
    "fundamental_unit",
    "hz_class_number",
    "hz_class_number_product",
    "plus_to_minus",
    "sqrt_expansion",
    "surd_sign",
]
