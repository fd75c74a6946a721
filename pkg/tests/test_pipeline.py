import json
from fractions import Fraction

import pytest

from iwasawa_cf.cyclo import pn_valuation
from iwasawa_cf.errors import AssumptionError, ConsistencyError, PreconditionError
from iwasawa_cf.pipeline import (
    LambdaReport,
    Verdict,
    bernoulli_product,
    check_corollary,
    ferrero_kida_lambda2,
    iterate_n,
    lambda_sum_general,
    lambda_sum_inert_fast,
    split_lambdas,
    theorem_aggregate,
    theorem_aggregate_reference,
    verdict_for,
)
from iwasawa_cf.quadring import build_params

ORACLE_CASES = [
    (956, 3, 1), (956, 3, 2), (188, 5, 1), (188, 5, 2),
    (21, 5, 1), (24, 5, 1), (33, 5, 1), (57, 5, 1), (44, 3, 2), (44, 7, 1), (124, 5, 1), (956, 7, 1),
]


@pytest.mark.parametrize("D,p,n", [(956, 3, 1), (188, 5, 1), (57, 5, 1), (28, 3, 1)])
def test_vectorised_equals_reference(D, p, n):
    params = build_params(D, p, n)
    assert theorem_aggregate(params) == theorem_aggregate_reference(params)


@pytest.mark.parametrize("D,p,n", ORACLE_CASES)
def test_aggregate_equals_bernoulli_product(D, p, n):
    report = lambda_sum_general(D, p, n, verify=True)
    params = build_params(D, p, n)
    assert report.value == bernoulli_product(params, report.D1, report.D2)


@pytest.mark.parametrize("D,p,n,gs", [(956, 3, 2, [2, 5]), (188, 5, 1, [2, 3, 47]), (124, 5, 1, [2, 3])])
def test_valuation_independent_of_choices(D, p, n, gs):
    vals = set()
    for g in gs:
        for method in ("auto", "subgroup"):
            vals.add(lambda_sum_general(D, p, n, g=g, eta_method=method).valuation)
    assert len(vals) == 1


def test_workers_do_not_change_result():
    a = lambda_sum_general(956, 3, 2)
    b = lambda_sum_general(956, 3, 2, workers=3)
    assert a.value == b.value
    c = lambda_sum_inert_fast(47, 5, 2)
    d = lambda_sum_inert_fast(47, 5, 2, workers=4)
    assert c.value == d.value


@pytest.mark.parametrize("ell,p,n", [(47, 5, 1), (47, 5, 2), (7, 5, 1), (103, 5, 1), (11, 7, 1), (43, 7, 1), (7, 13, 1)])
def test_fast_path_equals_general(ell, p, n):
    fast = lambda_sum_inert_fast(ell, p, n)
    general = lambda_sum_general(4 * ell, p, n)
    assert fast.value == general.value


@pytest.mark.parametrize("ell,p,n", [(47, 5, 1), (47, 5, 2), (7, 5, 1), (103, 5, 2), (71, 13, 1)])
def test_half_ranges(ell, p, n):
    full = lambda_sum_inert_fast(ell, p, n)
    hk = lambda_sum_inert_fast(ell, p, n, half_k=True)
    hi = lambda_sum_inert_fast(ell, p, n, half_i=True)
    both = lambda_sum_inert_fast(ell, p, n, half_k=True, half_i=True)
    assert hk.value.scale(2) == full.value
    assert hi.value.scale(2) == full.value
    assert both.value.scale(4) == full.value
    assert full.valuation == hk.valuation == hi.valuation == both.valuation


def test_half_ranges_rejected_for_p_3_mod_4():
    with pytest.raises(PreconditionError):
        lambda_sum_inert_fast(11, 7, 1, half_k=True)
    with pytest.raises(PreconditionError):
        lambda_sum_inert_fast(11, 7, 1, half_i=True)


def test_palindromic_residues():
    from iwasawa_cf.cfrac import convergent_arrays, expand_discriminant

    for ell, p, n in [(47, 5, 1), (47, 5, 2), (239, 3, 2), (7, 5, 1)]:
        params = build_params(4 * ell, p, n)
        cf = expand_discriminant(4 * ell)
        f = p ** (n + 1)
        K = params.rn * cf.m
        ps, qs = convergent_arrays(cf, K + 1, f)
        P = lambda k: ps[k + 1]  # noqa: E731
        Q = lambda k: qs[k + 1]  # noqa: E731
        for k in range(1, K):
            assert P(k - 1) == P(K - k - 1)
            assert Q(k - 1) == -Q(K - k - 1) % f
        for k in range(1, K):
            assert cf.term(k) == cf.term(K - k)


def test_corollary_clauses():
    assert check_corollary(47, 5) == 6
    with pytest.raises(AssumptionError) as e:
        check_corollary(47, 3)
    assert e.value.clause == "inert"
    with pytest.raises(PreconditionError):
        check_corollary(13, 5)
    with pytest.raises(AssumptionError) as e:
        check_corollary(23, 7)
    assert e.value.clause in ("inert", "corollary-1")


def test_verdict_rule():
    assert verdict_for(3, 2) == Verdict("lower_bound", 2)
    assert verdict_for(6, 6) == Verdict("lower_bound", 6)
    assert verdict_for(6, 18) == Verdict("exact", 6)
    assert str(Verdict("exact", 6)) == "Exact(6)"
    assert str(Verdict("lower_bound", 2)) == "LowerBound(2)"


def test_iteration_239():
    result = iterate_n(956, 3, 3)
    assert [r.valuation for r in result.trace] == [3, 6, 6]
    assert result.verdict == Verdict("exact", 6)
    assert result.final.split.values == (6, 0)


def test_iteration_stops_early():
    result = iterate_n(188, 5, 3)
    assert len(result.trace) == 1
    assert result.final.split.values == (1, 1)


def test_iteration_fast_path_needs_4_ell():
    with pytest.raises(PreconditionError):
        iterate_n(21, 5, 1, fast=True)


def test_split_rules():
    # 3 splits in Q(sqrt -239), inert in Q(i) and does not divide h(-4) = 1
    s = split_lambdas(6, 3, -239, -4)
    assert s.values == (6, 0) and s.lower == (1, 0)
    # 5 | h(-47) and 5 splits in Q(i): both at least 1
    s = split_lambdas(2, 5, -47, -4)
    assert s.values == (1, 1)
    s = split_lambdas(3, 5, -47, -4)
    assert s.values is None and s.lower == (1, 1)
    assert split_lambdas(0, 7, -239, -4).values == (0, 0)
    with pytest.raises(ConsistencyError):
        split_lambdas(1, 7, -239, -4)
    with pytest.raises(ConsistencyError):
        split_lambdas(1, 5, -47, -4)


def test_report_json_round_trip():
    report = lambda_sum_general(956, 3, 3)
    text = json.dumps(report.to_dict())
    back = LambdaReport.from_dict(json.loads(text))
    assert back == report
    assert back.to_dict() == report.to_dict()


def test_report_without_split_round_trip():
    report = lambda_sum_general(956, 3, 1)
    assert report.split is None
    assert LambdaReport.from_dict(json.loads(json.dumps(report.to_dict()))) == report


def test_precondition_errors():
    with pytest.raises(PreconditionError):
        lambda_sum_general(956, 2, 1)
    with pytest.raises(PreconditionError):
        lambda_sum_general(956, 239, 1)
    with pytest.raises(AssumptionError) as e:
        lambda_sum_general(4 * 23, 7, 1)
    assert "7^2 | eps^3 - 1" in str(e.value)


def test_verify_detects_tampering(monkeypatch):
    import iwasawa_cf.pipeline as pl

    real = pl.theorem_aggregate
    monkeypatch.setattr(pl, "theorem_aggregate", lambda params, **kw: real(params, **kw) + 4)
    with pytest.raises(ConsistencyError, match="oracle"):
        lambda_sum_general(188, 5, 1, verify=True)


def brute_lambda2(delta):
    # hand substitution into -1 + sum 2^(ord_2(l^2 - 1) - 3)
    total = -1
    d = abs(delta)
    for q in range(3, d + 1, 2):
        if d % q == 0 and all(q % r for r in range(2, q)):
            v, x = 0, q * q - 1
            while x % 2 == 0:
                x //= 2
                v += 1
            total += 2 ** (v - 3)
    return total


@pytest.mark.parametrize("delta", [d for d in range(-99, 0) if d % 4 in (0, 1) and d not in (-4, -8)])
def test_ferrero_kida(delta):
    from iwasawa_cf._arith import is_fundamental_discriminant

    if not is_fundamental_discriminant(delta):
        return
    assert ferrero_kida_lambda2(delta) == brute_lambda2(delta)


@pytest.mark.parametrize("delta", [-4, -8, 5, -5])
def test_ferrero_kida_domain(delta):
    with pytest.raises(PreconditionError):
        ferrero_kida_lambda2(delta)


def test_zero_value_is_lower_bound():
    from iwasawa_cf.cyclo import CycloNumber
    from iwasawa_cf.pipeline import _finish

    r = _finish(956, -239, -4, 3, 1, CycloNumber.zero(3, 1), "general", {})
    assert r.verdict.kind == "lower_bound"


def test_value_scaling_is_ord_neutral():
    r = lambda_sum_inert_fast(47, 5, 1)
    assert pn_valuation(r.value.scale(Fraction(1, 4))) == r.valuation
