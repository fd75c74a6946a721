"""Arithmetic in O_K / (p^k) for a real quadratic field K.

Elements are x + y*omega with omega = (delta + sqrt D)/2, stored as residues
mod p^k. The unit group of this ring, the order of the fundamental unit,
and the auxiliary generator eta all live here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import isqrt
from typing import Optional

from sympy import factorint
from sympy.functions.combinatorial.numbers import kronecker_symbol
from sympy.ntheory import discrete_log

from .cfrac import FundamentalUnit, fundamental_unit, surd_sign
from .errors import AssumptionError, ConsistencyError, PreconditionError


@dataclass(frozen=True)
class QuadRing:
    D: int
    p: int
    k: int

    def __post_init__(self):
        if self.p < 3 or self.p % 2 == 0:
            raise PreconditionError(f"p={self.p} must be an odd prime")
        if self.D % self.p == 0:
            raise PreconditionError(f"p={self.p} divides D={self.D} (ramified)")
        if self.k < 1:
            raise ValueError("k must be >= 1")

    @property
    def delta(self):
        return self.D % 4

    @property
    def modulus(self):
        return self.p**self.k

    @property
    def omega_sq(self):
        """(c0, c1) with omega^2 = c0 + c1*omega."""
        return (self.D - self.delta) // 4, self.delta

    @property
    def split_type(self):
        return "split" if kronecker_symbol(self.D, self.p) == 1 else "inert"

    @property
    def group_exponent(self):
        p = self.p
        if self.split_type == "inert":
            return p ** (self.k - 1) * (p * p - 1)
        return p ** (self.k - 1) * (p - 1)

    @property
    def group_order(self):
        p, e = self.p, self.k - 1
        if self.split_type == "inert":
            return p ** (2 * e) * (p * p - 1)
        return p ** (2 * e) * (p - 1) ** 2

    def elem(self, x, y=0):
        return RingElem(x % self.modulus, y % self.modulus, self)

    def one(self):
        return self.elem(1, 0)

    def with_exponent(self, k):
        return QuadRing(self.D, self.p, k)


@dataclass(frozen=True)
class RingElem:
    x: int
    y: int
    ring: QuadRing = field(repr=False)

    def _check(self, other):
        if not isinstance(other, RingElem):
            return self.ring.elem(other)
        if other.ring != self.ring:
            raise PreconditionError("ring mismatch")
        return other

    def __add__(self, other):
        other = self._check(other)
        return self.ring.elem(self.x + other.x, self.y + other.y)

    __radd__ = __add__

    def __neg__(self):
        return self.ring.elem(-self.x, -self.y)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __mul__(self, other):
        other = self._check(other)
        c0, c1 = self.ring.omega_sq
        yy = self.y * other.y
        return self.ring.elem(
            self.x * other.x + yy * c0,
            self.x * other.y + self.y * other.x + yy * c1,
        )

    __rmul__ = __mul__

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.ring.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def norm(self):
        d = self.ring.delta
        c0 = self.ring.omega_sq[0]
        return (self.x * self.x + d * self.x * self.y - self.y * self.y * c0) % self.ring.modulus

    def conjugate(self):
        return self.ring.elem(self.x + self.ring.delta * self.y, -self.y)

    def is_unit(self):
        return self.norm() % self.ring.p != 0

    def inverse(self):
        if not self.is_unit():
            raise PreconditionError("not a unit")
        ninv = pow(self.norm(), -1, self.ring.modulus)
        c = self.conjugate()
        return self.ring.elem(c.x * ninv, c.y * ninv)

    def is_one(self):
        return self.x == 1 % self.ring.modulus and self.y == 0

    def reduce(self, k):
        return self.ring.with_exponent(k).elem(self.x, self.y)

    def key(self):
        return (self.x, self.y)

    def __str__(self):
        s = "sqrt" if self.ring.delta == 0 else "omega"
        if self.ring.delta == 0:
            return f"{self.x} + {self.y}*sqrt({self.ring.D // 4})"
        return f"{self.x} + {self.y}*{s}"


def order_of(a):
    """Multiplicative order of a unit of O_K/(p^k)."""
    if not a.is_unit():
        raise PreconditionError("not a unit")
    order = a.ring.group_exponent
    for q in factorint(order):
        while order % q == 0 and (a ** (order // q)).is_one():
            order //= q
    return order


def _multiplicative_order(g, modulus, group_order):
    order = group_order
    for q in factorint(group_order):
        while order % q == 0 and pow(g, order // q, modulus) == 1:
            order //= q
    return order


def primitive_root(p):
    """Smallest g >= 2 generating (Z/p^2)^x, hence (Z/p^k)^x for all k."""
    m = p * p
    phi = p * (p - 1)
    g = 2
    while True:
        if g % p and _multiplicative_order(g, m, phi) == phi:
            return g
        g += 1


def dlog(t, g, p, k):
    """x in [0, p^(k-1)(p-1)) with g^x = t mod p^k."""
    if t % p == 0:
        raise PreconditionError("not a unit")
    m = p**k
    order = p ** (k - 1) * (p - 1)
    t %= m
    if t == 1:
        return 0
    x = discrete_log(m, t, g, order=order) % order
    if pow(g, x, m) != t:
        raise ConsistencyError("discrete log failed")
    return x


def dlog_table(g, p, k):
    """List e with g^e[t] = t mod p^k, and -1 at non-units."""
    m = p**k
    table = [-1] * m
    x = 1
    for e in range(p ** (k - 1) * (p - 1)):
        table[x] = e
        x = x * g % m
    return table


@dataclass(frozen=True)
class AssumptionBResult:
    D: int
    p: int
    r0: int
    passed: bool
    witness: RingElem
    epsilon: FundamentalUnit

    def describe(self):
        if self.passed:
            return f"p^2 does not divide eps^{self.r0} - 1 (eps^{self.r0} = {self.witness} mod {self.p}^2)"
        return f"Assumption B fails: {self.p}^2 | eps^{self.r0} - 1 (eps = {self.epsilon}, order {self.r0} mod {self.p})"


def check_assumption_b(D, p, eps=None):
    eps = eps or fundamental_unit(D)
    ring1 = QuadRing(D, p, 1)
    r0 = order_of(ring1.elem(eps.a, eps.b))
    witness = QuadRing(D, p, 2).elem(eps.a, eps.b) ** r0
    return AssumptionBResult(D, p, r0, not witness.is_one(), witness, eps)


@dataclass
class PipelineParams:
    """Everything the lambda formulas need at one level n."""

    D: int
    p: int
    n: int
    g: int
    unit: FundamentalUnit
    epsilon: RingElem
    r0: int
    rn: int
    u: int
    v: int
    split_type: str
    eta: Optional[tuple] = None
    eta_method: Optional[str] = None
    e1: Optional[int] = None
    e2: Optional[int] = None

    @property
    def modulus(self):
        return self.p ** (self.n + 1)

    @property
    def ring(self):
        return self.epsilon.ring

    def eta_elem(self):
        return self.ring.elem(*self.eta)

    def echo(self):
        return {
            "g": self.g,
            "epsilon": str(self.unit),
            "r0": self.r0,
            "rn": self.rn,
            "u": self.u,
            "v": self.v,
            "eta": list(self.eta) if self.eta else None,
            "eta_method": self.eta_method,
            "split_type": self.split_type,
            "e1": self.e1,
            "e2": self.e2,
        }


def build_params(D, p, n, g=None, eta_method="auto"):
    """Assemble g, eps, r0, r_n, u, v and eta for modulus p^(n+1).

    Raises AssumptionError when p^2 | eps^r0 - 1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ring = QuadRing(D, p, n + 1)
    unit = fundamental_unit(D)
    check = check_assumption_b(D, p, unit)
    if not check.passed:
        raise AssumptionError(check.describe(), clause="B", witness=check)
    r0 = check.r0
    eps = ring.elem(unit.a, unit.b)
    rn = order_of(eps)
    if rn != p**n * r0:
        raise ConsistencyError(f"order of eps mod p^{n + 1} is {rn}, expected {p**n * r0}")
    if g is None:
        g = primitive_root(p)
    elif g % p == 0 or _multiplicative_order(g, p * p, p * (p - 1)) != p * (p - 1):
        raise PreconditionError(f"g={g} is not a primitive root modulo powers of {p}")
    u = 1 if r0 % 2 == 0 else 0
    split = ring.split_type
    sign = 1 if split == "inert" else -1
    v, rem = divmod(2**u * (p + sign), r0)
    if rem:
        raise ConsistencyError(f"r0={r0} does not divide 2^u(p{'+' if sign > 0 else '-'}1)")
    params = PipelineParams(D, p, n, g, unit, eps, r0, rn, u, v, split)
    if D % 4 == 0 and D // 4 % 4 == 3:
        ell = D // 4
        params.e1 = dlog(ell, g, p, n + 1)
        params.e2 = params.e1 * (p**n + 1) // 2 % p**n
    params.eta, params.eta_method = find_eta(params, method=eta_method)
    return params


def subgroup_eps_g(params):
    """The subgroup <eps, g> of (O_K/p^(n+1))^x as a set of (x, y) keys.

    Memory is O(|subgroup|) = O(p^(2n) r0 (p-1)); fine at desk scale.
    """
    ring = params.ring
    f = params.modulus
    eps_powers = []
    e = ring.one()
    for _ in range(params.rn):
        eps_powers.append(e)
        e = e * params.epsilon
    out = set()
    gi = 1
    for _ in range(params.p**params.n * (params.p - 1)):
        for ep in eps_powers:
            out.add(((ep.x * gi) % f, (ep.y * gi) % f))
        gi = gi * params.g % f
    return out


def _generates_quotient(cand, v, in_h):
    if not cand.is_unit():
        return False
    for q in factorint(v):
        if in_h(cand ** (v // q)):
            return False
    return True


def _hensel_eighth_root(params):
    """Lift 1 + sqrt(ell) (order 8 mod 3) to a root of X^4 + 1 mod 3^(n+1)."""
    ring = params.ring
    start = ring.elem(1, 1)
    if not (start.reduce(1) ** 4 == -ring.with_exponent(1).one()):
        return None
    x = start
    for _ in range(params.n + 2):
        fx = x**4 + ring.one()
        x = x - fx * (ring.elem(4) * x**3).inverse()
    if not (x**4 + ring.one() == ring.elem(0)):
        raise ConsistencyError("Hensel lifting did not converge")
    return x


def find_eta(params, method="auto"):
    """Totally positive eta whose class generates (O_K/p^(n+1))^x / <eps, g>.

    method: "hensel" (p = 3, D = 4 ell, v | 8), "subgroup" (explicit
    enumeration of <eps, g>), or "auto" which tries hensel first.
    """
    v = params.v
    ring = params.ring
    eta = None
    used = None
    if method in ("auto", "hensel"):
        if params.p == 3 and params.D % 4 == 0 and 8 % v == 0 and params.split_type == "inert":
            eta = _hensel_eighth_root(params)
            used = "hensel"
        if eta is None and method == "hensel":
            raise PreconditionError("Hensel path needs p=3, D=4*ell, v | 8 and (1+sqrt ell)^4 = -1 mod 3")
    if eta is None:
        if method not in ("auto", "subgroup"):
            raise ValueError(f"unknown eta method {method!r}")
        h = subgroup_eps_g(params)
        in_h = lambda z: z.key() in h  # noqa: E731
        used = "subgroup"
        # the class of eta only depends on eta mod p (the p-part of the
        # group already lies in <eps, g>), so residues mod p are enough
        for y in range(params.p):
            for x in range(params.p):
                cand = ring.elem(x, y)
                if v == 1 or _generates_quotient(cand, v, in_h):
                    eta = cand
                    break
            if eta is not None:
                break
        if eta is None:
            raise ConsistencyError("no generator found")
        eta = teichmuller(eta)
    return totally_positive_lift(eta), used


def teichmuller(a):
    """The root of unity of order prime to p congruent to ``a`` mod p.

    a^(q^(k-1)) with q the size of the residue ring mod p; the chi_n value of
    the class of eta is only trivial when eta has order prime to p.
    """
    ring = a.ring
    q = ring.p**2 if ring.split_type == "inert" else ring.p
    return a ** (q ** (ring.k - 1))


def totally_positive_lift(elem):
    """Representative x + y*omega of ``elem`` with both embeddings positive."""
    ring = elem.ring
    f = ring.modulus
    x, y, d, D = elem.x, elem.y, ring.delta, ring.D

    def positive(x):
        u = 2 * x + d * y
        return surd_sign(u, y, D) > 0 and surd_sign(u, -y, D) > 0

    if not positive(x):
        need = y * (isqrt(D) + 1) - d * y - 2 * x
        x += max(0, need // (2 * f)) * f
        while not positive(x):
            x += f
    return x, y
