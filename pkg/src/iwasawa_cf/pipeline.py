"""Sum of lambda invariants lambda_p(D1) + lambda_p(D2) from minus CF data.

Two evaluation routes produce an algebraic integer in Z[zeta_{p^n}] whose
order at (1 - zeta) gives the lambda sum once it drops below phi(p^n):

* ``lambda_sum_general``: the double sum over eta-powers and the period of
  twisted Dedekind sums, valid for any D satisfying the hypotheses.
* ``lambda_sum_inert_fast``: for D = 4 ell with p inert in Q(sqrt -ell),
  the carry formulation over residues of convergents.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np
from sympy import isprime

from . import __version__
from ._arith import ord_p, prime_factors
from .cfrac import convergent_arrays, expand_discriminant
from .cyclo import CharacterSpec, CycloNumber, from_exponents, pn_valuation
from .errors import AssumptionError, ConsistencyError, PreconditionError
from .oracles import bernoulli_L0, check_assumption_a, imaginary_class_number, kronecker_symbol
from .quadring import build_params, check_assumption_b
from .zetavals import dedekind_diag_closed_form, twisted_dedekind

log = logging.getLogger(__name__)

NORMALIZATION = "psi(g) = zeta_{p^n}"

_INT64_SAFE = 2**62


@dataclass(frozen=True)
class Verdict:
    kind: str  # "exact" | "lower_bound" | "inconclusive"
    value: Optional[int] = None

    def __str__(self):
        if self.kind == "exact":
            return f"Exact({self.value})"
        if self.kind == "lower_bound":
            return f"LowerBound({self.value})"
        return "Inconclusive"


def verdict_for(valuation, phi_pn):
    """Exact below phi(p^n); otherwise the sum is at least phi(p^n)."""
    if valuation < phi_pn:
        return Verdict("exact", int(valuation))
    return Verdict("lower_bound", phi_pn)


@dataclass
class SplitResult:
    values: Optional[tuple]
    lower: tuple
    reasons: tuple

    def to_dict(self):
        return {"values": list(self.values) if self.values else None,
                "lower": list(self.lower), "reasons": list(self.reasons)}

    @classmethod
    def from_dict(cls, d):
        vals = tuple(d["values"]) if d["values"] is not None else None
        return cls(vals, tuple(d["lower"]), tuple(d["reasons"]))


@dataclass
class LambdaReport:
    D: int
    D1: int
    D2: int
    p: int
    n: int
    value: CycloNumber
    valuation: int
    phi_pn: int
    verdict: Verdict
    path: str = "general"
    split: Optional[SplitResult] = None
    params: dict = field(default_factory=dict)
    normalization: str = NORMALIZATION
    version: str = __version__

    def to_dict(self):
        return {
            "D": self.D,
            "D1": self.D1,
            "D2": self.D2,
            "p": self.p,
            "n": self.n,
            "value": self.value.to_json(),
            "value_str": str(self.value),
            "valuation": self.valuation,
            "phi_pn": self.phi_pn,
            "verdict": {"kind": self.verdict.kind, "value": self.verdict.value},
            "path": self.path,
            "split": self.split.to_dict() if self.split else None,
            "params": self.params,
            "normalization": self.normalization,
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            D=d["D"],
            D1=d["D1"],
            D2=d["D2"],
            p=d["p"],
            n=d["n"],
            value=CycloNumber.from_json(d["p"], d["n"], d["value"]),
            valuation=d["valuation"],
            phi_pn=d["phi_pn"],
            verdict=Verdict(**d["verdict"]),
            path=d["path"],
            split=SplitResult.from_dict(d["split"]) if d["split"] else None,
            params=d["params"],
            normalization=d["normalization"],
            version=d["version"],
        )


def _check_prime(p, D):
    if not isprime(p) or p == 2:
        raise PreconditionError(f"p={p} must be an odd prime", clause="p")
    if D % p == 0:
        raise PreconditionError(f"p={p} divides D={D}", clause="p")


def _chunks(seq, k):
    k = max(1, min(k, len(seq)))
    size = -(-len(seq) // k)
    return [seq[i:i + size] for i in range(0, len(seq), size)]


def _run(fn, parts, workers):
    if workers <= 1 or len(parts) == 1:
        return [fn(part) for part in parts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map preserves order, so the reduction below is deterministic
        return list(pool.map(fn, parts))


def _dtype_for(bound):
    return np.int64 if bound < _INT64_SAFE else object


def theorem_aggregate(params, cf=None, workers=1):
    """sum_{j,k} (b_k/2 D_psi(h_{j,k-1}, h_{j,k-1}) - D_psi(h_{j,k-1}, h_{j,k-2})).

    All Dedekind sums share the factor 1/(4 f^2), so the work is an integer
    accumulation per unit t, bucketed by the exponent of psi(t).
    """
    cf = cf or expand_discriminant(params.D)
    p, n, f = params.p, params.n, params.modulus
    L = params.rn * cf.m
    ps, qs = convergent_arrays(cf, L, f)
    bmax = max(cf.period + cf.head)
    dtype = _dtype_for(params.v * L * (bmax + 2) * f * f)
    ps = np.array(ps, dtype=dtype)
    qs = np.array(qs, dtype=dtype)
    b = np.array([cf.term(k) for k in range(1, L + 1)], dtype=dtype)

    eta = params.eta_elem()
    hs = []
    power = params.ring.one()
    for _ in range(params.v):
        hs.append((-(power.x * qs + power.y * ps)) % f)
        power = power * eta

    spec = CharacterSpec(p, n, params.g)
    table = spec.exponents()
    units = [t for t in range(1, f) if t % p]
    rows = max(1, 4_000_000 // max(1, len(units)))

    def weights(ts):
        T = np.array(ts, dtype=dtype)
        acc = np.zeros(len(ts), dtype=dtype)
        for h in hs:
            for lo in range(0, L, rows):
                hi = min(L, lo + rows)
                x1 = 2 * ((h[lo + 1:hi + 1, None] * T[None, :]) % f) - f
                x0 = 2 * ((h[lo:hi, None] * T[None, :]) % f) - f
                acc += (b[lo:hi, None] * x1 * x1 - 2 * x1 * x0).sum(axis=0)
        return list(zip(ts, (int(w) for w in acc)))

    vec = [0] * p**n
    for part in _run(weights, _chunks(units, workers), workers):
        for t, w in part:
            vec[table[t]] += w
    return from_exponents(p, n, vec).scale(Fraction(1, 8 * f * f))


def theorem_aggregate_reference(params, cf=None):
    """Straight transcription with one Dedekind sum per term. Slow; for tests."""
    cf = cf or expand_discriminant(params.D)
    f = params.modulus
    L = params.rn * cf.m
    ps, qs = convergent_arrays(cf, L, f)
    spec = CharacterSpec(params.p, params.n, params.g)
    diag = lru_cache(maxsize=None)(lambda a: dedekind_diag_closed_form(a, spec))
    off = lru_cache(maxsize=None)(lambda a, c: twisted_dedekind(a, c, spec))
    total = CycloNumber.zero(params.p, params.n)
    eta = params.eta_elem()
    power = params.ring.one()
    for _ in range(params.v):
        h = [-(power.x * q + power.y * pk) % f for pk, q in zip(ps, qs)]
        for k in range(1, L + 1):
            total = total + diag(h[k]).scale(Fraction(cf.term(k), 2)) - off(h[k], h[k - 1])
        power = power * eta
    return total


def bernoulli_product(params, D1, D2):
    """2^(u-1) B_{1, eps1 psi'} B_{1, eps2 psi'} with psi'^2 = psi.

    The aggregate counts each class of the narrow ray class group 2^u
    times and only the classes of norm-positive generators, hence the
    power of two; psi' is the character of the class-group side.
    """
    p, n = params.p, params.n
    half = CharacterSpec(p, n, params.g, exponent_twist=(p**n + 1) // 2)
    prod = bernoulli_L0(D1, half) * bernoulli_L0(D2, half)
    return prod.scale(Fraction(2) ** (params.u - 1))


def _finish(D, D1, D2, p, n, value, path, params_echo):
    if not value.is_integral():
        raise ConsistencyError(f"aggregate is not an algebraic integer: {value}")
    phi_pn = p ** (n - 1) * (p - 1)
    val = pn_valuation(value)
    if val == float("inf"):
        verdict = Verdict("lower_bound", phi_pn)
        val = -1
    else:
        verdict = verdict_for(val, phi_pn)
    report = LambdaReport(D, D1, D2, p, n, value, val, phi_pn, verdict, path=path, params=params_echo)
    if verdict.kind == "exact":
        report.split = split_lambdas(verdict.value, p, D1, D2)
    return report


def lambda_sum_general(D, p, n, g=None, eta_method="auto", workers=1, verify=False):
    """Evaluate the twisted Dedekind sum formula at level n."""
    _check_prime(p, D)
    D1, D2 = check_assumption_a(D)
    params = build_params(D, p, n, g=g, eta_method=eta_method)
    value = theorem_aggregate(params, workers=workers)
    if verify:
        oracle = bernoulli_product(params, D1, D2)
        if oracle != value:
            raise ConsistencyError(f"Bernoulli oracle mismatch: {oracle} != {value}")
    echo = params.echo()
    echo["verified"] = bool(verify)
    return _finish(D, D1, D2, p, n, value, "general", echo)


def check_corollary(ell, p):
    """Validate the inert fast-path hypotheses; returns r (order of eps mod p)."""
    if not isprime(ell) or ell % 4 != 3:
        raise PreconditionError(f"ell={ell} must be a prime 3 mod 4", clause="ell")
    _check_prime(p, 4 * ell)
    check_assumption_a(4 * ell)
    if kronecker_symbol(-ell, p) != -1:
        raise AssumptionError(f"p={p} is not inert in Q(sqrt -{ell})", clause="inert")

    chk = check_assumption_b(4 * ell, p)
    r = chk.r0
    if not chk.passed:
        raise AssumptionError(f"technical assumption 1 fails: {p}^2 | eps^{r} - 1", clause="corollary-1", witness=chk)
    if p % 4 == 1 and r != p + 1:
        raise AssumptionError(f"technical assumption 2 fails: r={r} != p+1", clause="corollary-2")
    if p % 4 == 3 and r != (p - 1) // 2:
        raise AssumptionError(f"technical assumption 3 fails: r={r} != (p-1)/2", clause="corollary-3")
    return r


def inert_fast_sum(ell, p, n, g, e2, r, half_k=False, half_i=False, workers=1):
    """sum_i zeta^i sum_k (t_k q_{k-1} + zeta^e2 s_k p_{k-1}) / (2 p^(n+1)).

    ``half_k`` (p = 1 mod 4, so -1 is a power of epsilon) stops the
    k-sum at K/2 and gives exactly half the full value. ``half_i`` (p = 1 mod 4) keeps one
    index from each pair {i, i + I/2}; these name the same ray class, but
    the truncated k-sums are not class invariants, so with both flags set
    each pair is summed and the result halved instead of dropping i > I/2.
    """
    cf = expand_discriminant(4 * ell)
    f = p ** (n + 1)
    K = p**n * r * cf.m
    I = p**n * (p - 1)
    halve = Fraction(1)
    if half_i:
        if p % 4 != 1:
            raise PreconditionError("halving the i-range needs p = 1 mod 4")
        if half_k:
            halve = Fraction(1, 2)
        else:
            I //= 2
    if half_k:
        # for p = 3 mod 4 the truncated sum is not even integral
        if p % 4 != 1:
            raise PreconditionError("halving the k-range needs p = 1 mod 4")
        K //= 2
    # ps[k + 1] = p_k mod f for k = -1 .. K
    ps, qs = convergent_arrays(cf, K + 1, f)
    bmax = max(cf.period + cf.head)
    dtype = _dtype_for(K * (bmax + 2) * f * f)
    ps = np.array(ps, dtype=dtype)
    qs = np.array(qs, dtype=dtype)
    b = np.array([cf.term(k) for k in range(1, K + 1)], dtype=dtype)

    def per_i(irange):
        out = []
        for i in irange:
            G = pow(g, i, f)
            P = (G * ps) % f
            Q = (G * qs) % f
            s = (b * P[1:K + 1] - P[0:K] - P[2:K + 2]) // f
            t = (b * Q[1:K + 1] - Q[0:K] - Q[2:K + 2]) // f
            out.append((i, int((t * Q[1:K + 1]).sum()), int((s * P[1:K + 1]).sum())))
        return out

    order = p**n
    vec = [0] * order
    for part in _run(per_i, _chunks(list(range(1, I + 1)), workers), workers):
        for i, tq, sp in part:
            vec[i % order] += tq
            vec[(i + e2) % order] += sp
    return from_exponents(p, n, vec).scale(halve / (2 * f))


def lambda_sum_inert_fast(ell, p, n, g=None, half_k=False, half_i=False, workers=1):
    """Carry formulation for D = 4 ell, p inert in Q(sqrt -ell)."""
    r = check_corollary(ell, p)
    D = 4 * ell
    params = build_params(D, p, n, g=g)
    value = inert_fast_sum(ell, p, n, params.g, params.e2, r, half_k, half_i, workers)
    echo = params.echo()
    echo.update(half_k=half_k, half_i=half_i)
    D1, D2 = -ell, -4
    return _finish(D, D1, D2, p, n, value, "inert_fast", echo)


@dataclass
class IterationResult:
    final: Optional[LambdaReport]
    trace: list

    @property
    def verdict(self):
        return self.final.verdict if self.final else Verdict("inconclusive")


def iterate_n(D, p, n_max, fast=False, **kw):
    """Raise n until the valuation drops below phi(p^n) or n_max is reached."""
    trace = []
    for n in range(1, n_max + 1):
        if fast:
            if D % 4:
                raise PreconditionError("fast path needs D = 4*ell", clause="ell")
            report = lambda_sum_inert_fast(D // 4, p, n, **kw)
        else:
            report = lambda_sum_general(D, p, n, **kw)
        log.info("n=%d valuation=%s verdict=%s", n, report.valuation, report.verdict)
        trace.append(report)
        if report.verdict.kind == "exact":
            break
    return IterationResult(trace[-1] if trace else None, trace)


def split_lambdas(total, p, D1, D2):
    """Pin down (lambda_p(D1), lambda_p(D2)) from an exact sum when forced.

    lambda = 0 if p is inert in K_i and p does not divide h(D_i);
    lambda >= 1 if p splits in K_i or p divides h(D_i). A ramified p gives
    no information.
    """
    lower, zero, reasons = [], [], []
    for Di in (D1, D2):
        kr = kronecker_symbol(Di, p)
        p_divides_h = imaginary_class_number(Di) % p == 0
        if kr == 1 or p_divides_h:
            lower.append(1)
            zero.append(False)
            reasons.append(f"{Di}:{'split' if kr == 1 else 'p-divides-h'}")
        else:
            lower.append(0)
            zero.append(kr == -1)
            reasons.append(f"{Di}:{'inert-p-nmid-h' if kr == -1 else 'ramified'}")
    if total < sum(lower):
        raise ConsistencyError(f"sum {total} is below the lower bounds {lower}")
    values = None
    if zero[0] and zero[1]:
        if total:
            raise ConsistencyError(f"sum {total} but both invariants vanish")
        values = (0, 0)
    elif zero[0]:
        values = (0, total)
    elif zero[1]:
        values = (total, 0)
    elif sum(lower) == total:
        values = tuple(lower)
    if values is not None:
        reasons.append("sum-forced")
    return SplitResult(values, tuple(lower), tuple(reasons))


def ferrero_kida_lambda2(delta):
    """lambda_2(delta) = -1 + sum over odd primes l | delta of 2^(ord_2(l^2-1) - 3)."""
    if delta >= 0 or delta in (-4, -8):
        raise PreconditionError(f"out of domain: {delta}")
    if delta % 4 not in (0, 1):
        raise PreconditionError(f"out of domain: {delta} is not a discriminant")
    return -1 + sum(2 ** (ord_p(q * q - 1, 2) - 3) for q in prime_factors(delta) if q != 2)
