"""Command-line front end: expand, classnum, lambda, survey.

Exit codes: 0 exact result (or plain success), 2 precondition or
assumption failure, 3 only a lower bound was reached, 4 internal
consistency failure such as an oracle mismatch.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from sympy import isprime

from . import __version__
from .cfrac import (
    QuadraticSurd,
    convergents_mod,
    expand_discriminant,
    expand_minus_cf,
    fundamental_unit,
    hz_class_number_product,
)
from .errors import ConsistencyError, PreconditionError
from .oracles import check_assumption_a, discriminant_of, imaginary_class_number
from .pipeline import NORMALIZATION, iterate_n

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_LOWER_BOUND = 3
EXIT_CONSISTENCY = 4

CACHE_ENV = "IWASAWA_CF_CACHE"
DEFAULT_CACHE = "iwasawa_survey.jsonl"

log = logging.getLogger("iwasawa_cf")


def _discriminant(args):
    if args.d is not None:
        return args.d
    return discriminant_of(args.ell)


# -- expand ---------------------------------------------------------------

def cmd_expand(args, out):
    if args.ell is not None:
        surd = QuadraticSurd(0, 1, args.ell)
        label = f"sqrt({args.ell})"
        D = discriminant_of(args.ell)
    else:
        D = args.d
        surd = None
        label = f"(delta + sqrt({D}))/2"
    cf = expand_minus_cf(surd) if surd is not None else expand_discriminant(D)
    print(f"{label} = {cf}", file=out)
    print(f"period length m = {cf.m}", file=out)
    print("k\tb_k\tp_k\tq_k", file=out)
    for c in convergents_mod(cf, args.convergents):
        print(f"{c.k}\t{cf.term(c.k) if c.k >= 0 else ''}\t{c.p}\t{c.q}", file=out)
    eps = fundamental_unit(D)
    print(f"totally positive fundamental unit, discriminant {D}: {eps}", file=out)
    return EXIT_OK


# -- classnum -------------------------------------------------------------

def cmd_classnum(args, out):
    ell = args.ell
    if ell % 4 != 3:
        raise PreconditionError(f"ell={ell} must be 3 mod 4", clause="ell")
    D = 4 * ell
    D1, D2 = check_assumption_a(D)
    h = hz_class_number_product(D, D1, D2)
    print(f"h({D1}) * h({D2}) = {h}", file=out)
    if args.check:
        h1, h2 = imaginary_class_number(D1), imaginary_class_number(D2)
        status = "agrees" if h1 * h2 == h else "DISAGREES"
        print(f"reduced forms: h({D1}) = {h1}, h({D2}) = {h2}; {status}", file=out)
        if h1 * h2 != h:
            raise ConsistencyError(f"class number product {h} != {h1 * h2}")
    return EXIT_OK


# -- lambda ---------------------------------------------------------------

def _pipeline_kwargs(args):
    kw = {"g": args.g, "workers": args.workers}
    if args.fast_inert:
        kw.update(half_k=args.half_k, half_i=args.half_i)
    else:
        kw.update(eta_method=args.eta_method, verify=args.verify)
    return kw


def _exit_for(result):
    return EXIT_OK if result.verdict.kind == "exact" else EXIT_LOWER_BOUND


def render_trace(result, out):
    trace = result.trace
    r0 = trace[0]
    print(f"D = {r0.D} = ({r0.D1})({r0.D2}), p = {r0.p}, path = {r0.path}", file=out)
    print("n\tphi\tvaluation\tverdict\tvalue", file=out)
    for r in trace:
        print(f"{r.n}\t{r.phi_pn}\t{r.valuation}\t{r.verdict}\t{r.value}", file=out)
    final = result.final
    print(f"final: {final.verdict}", file=out)
    if final.split is not None:
        s = final.split
        if s.values is not None:
            a, b = s.values
            print(f"split: lambda_{final.p}({final.D1}) = {a}, lambda_{final.p}({final.D2}) = {b}", file=out)
        else:
            print(f"split: not forced; lower bounds {s.lower}", file=out)
        print(f"reasons: {', '.join(s.reasons)}", file=out)


def cmd_lambda(args, out):
    D = _discriminant(args)
    if args.fast_inert and D % 4:
        raise PreconditionError("--fast-inert needs D = 4*ell", clause="ell")
    result = iterate_n(D, args.p, args.n_max, fast=args.fast_inert, **_pipeline_kwargs(args))
    if args.json:
        payload = {
            "D": D,
            "p": args.p,
            "n_max": args.n_max,
            "trace": [r.to_dict() for r in result.trace],
            "final": result.final.to_dict(),
        }
        print(json.dumps(payload, indent=2), file=out)
    else:
        render_trace(result, out)
    if args.plot:
        from .plotting import plot_valuation_trace

        plot_valuation_trace(result.trace, args.plot)
        print(f"wrote {args.plot}", file=sys.stderr)
    return _exit_for(result)


# -- survey ---------------------------------------------------------------

@dataclass
class SurveyRecord:
    key: dict
    ell: int
    status: str
    trace: list = field(default_factory=list)
    verdict: dict = None
    split: dict = None
    params: dict = None
    normalization: str = NORMALIZATION
    seconds: float = 0.0

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)


def survey_key(D, p, n_max, g, eta_method, fast):
    return {
        "D": D,
        "p": p,
        "n_max": n_max,
        "version": __version__,
        "g": g,
        "eta_method": eta_method,
        "path": "inert_fast" if fast else "general",
    }


def _key_str(key):
    return json.dumps(key, sort_keys=True)


def load_cache(path):
    records = {}
    if path.exists():
        with path.open() as fh:
            for line in fh:
                line = line.strip()
                if line:
                    rec = json.loads(line)
                    records[_key_str(rec["key"])] = rec
    return records


def _skip_reason(exc):
    clause = getattr(exc, "clause", None)
    if clause in ("A", "B"):
        return f"skipped:assumption-{clause}"
    if clause:
        return f"skipped:{clause}"
    return "skipped:precondition"


def survey_one(ell, args):
    fast = args.fast_inert
    D = 4 * ell
    key = survey_key(D, args.p, args.n_max, args.g, args.eta_method, fast)
    if D % args.p == 0:
        return SurveyRecord(key, ell, "skipped:p-divides-D")
    t0 = time.perf_counter()
    try:
        result = iterate_n(D, args.p, args.n_max, fast=fast, **_pipeline_kwargs(args))
    except PreconditionError as exc:
        log.info("ell=%d skipped: %s", ell, exc)
        return SurveyRecord(key, ell, _skip_reason(exc))
    final = result.final
    return SurveyRecord(
        key,
        ell,
        "ok",
        trace=[{"n": r.n, "valuation": r.valuation, "verdict": str(r.verdict),
                "value": r.value.to_json()} for r in result.trace],
        verdict={"kind": final.verdict.kind, "value": final.verdict.value},
        split=final.split.to_dict() if final.split else None,
        params=final.params,
        seconds=round(time.perf_counter() - t0, 4),
    )


def survey_domain(lo, hi):
    """Primes ell = 3 mod 4 in [lo, hi]."""
    return [ell for ell in range(max(lo, 3), hi + 1) if ell % 4 == 3 and isprime(ell)]


def write_csv(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["ell", "D", "p", "status", "verdict", "lambda_sum", "lambda_1", "lambda_2", "n_final", "seconds"])
        for r in records:
            split = (r.get("split") or {}).get("values") or [None, None]
            v = r.get("verdict") or {}
            n_final = r["trace"][-1]["n"] if r.get("trace") else None
            w.writerow([r["ell"], r["key"]["D"], r["key"]["p"], r["status"], v.get("kind"),
                        v.get("value"), split[0], split[1], n_final, r.get("seconds")])


def cmd_survey(args, out):
    path = Path(args.out or os.environ.get(CACHE_ENV) or DEFAULT_CACHE)
    cache = load_cache(path)
    path.touch()
    domain = survey_domain(args.ell_min, args.ell_max)
    selected, computed = [], 0
    with path.open("a") as fh:
        for ell in domain:
            key = _key_str(survey_key(4 * ell, args.p, args.n_max, args.g, args.eta_method, args.fast_inert))
            if key in cache:
                selected.append(cache[key])
                continue
            rec = survey_one(ell, args)
            line = rec.to_json()
            fh.write(line + "\n")
            fh.flush()
            computed += 1
            cache[key] = json.loads(line)
            selected.append(cache[key])
    print(f"# {len(selected)} records, {computed} computed, cache {path}", file=out)
    print("ell\tstatus\tverdict\tsplit", file=out)
    for r in selected:
        v = r.get("verdict")
        verdict = "" if v is None else (f"Exact({v['value']})" if v["kind"] == "exact" else f"LowerBound({v['value']})")
        split = (r.get("split") or {}).get("values")
        print(f"{r['ell']}\t{r['status']}\t{verdict}\t{'' if split is None else tuple(split)}", file=out)
    if args.csv:
        write_csv(selected, args.csv)
        print(f"wrote {args.csv}", file=sys.stderr)
    if args.plot:
        from .plotting import plot_survey

        plot_survey(selected, args.plot, p=args.p)
        print(f"wrote {args.plot}", file=sys.stderr)
    return EXIT_OK


# -- parser ---------------------------------------------------------------

def _add_field(sp, required=True):
    grp = sp.add_mutually_exclusive_group(required=required)
    grp.add_argument("--ell", type=int, help="squarefree ell; uses Q(sqrt ell)")
    grp.add_argument("--d", type=int, help="fundamental discriminant D > 0")


def _add_pipeline(sp):
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n-max", type=int, default=3)
    sp.add_argument("--g", type=int, default=None, help="primitive root mod p^k (default: least)")
    sp.add_argument("--eta-method", choices=["auto", "hensel", "subgroup"], default="auto")
    sp.add_argument("--fast-inert", action="store_true", help="carry formulation, D = 4 ell, p inert in Q(sqrt -ell)")
    sp.add_argument("--half-k", action="store_true", help="fast path: palindromic half of the k-range")
    sp.add_argument("--half-i", action="store_true", help="fast path: half of the i-range (p = 1 mod 4)")
    sp.add_argument("--verify", action="store_true", help="compare with the Bernoulli-number oracle")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--plot", metavar="PNG", default=None)


def build_parser():
    ap = argparse.ArgumentParser(prog="iwasawa-cf", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("expand", help="minus continued fraction, convergents, fundamental unit")
    _add_field(sp)
    sp.add_argument("--convergents", type=int, default=4)
    sp.set_defaults(func=cmd_expand)

    sp = sub.add_parser("classnum", help="h(-ell) h(-4) from the minus period")
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--check", action="store_true", help="cross-check with reduced forms")
    sp.set_defaults(func=cmd_classnum)

    sp = sub.add_parser("lambda", help="lambda_p(D1) + lambda_p(D2)")
    _add_field(sp)
    _add_pipeline(sp)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_lambda)

    sp = sub.add_parser("survey", help="lambda sums over a range of ell, cached as JSON lines")
    sp.add_argument("--ell-min", type=int, default=3)
    sp.add_argument("--ell-max", type=int, required=True)
    _add_pipeline(sp)
    sp.add_argument("--out", default=None, help=f"cache file (default ${CACHE_ENV} or {DEFAULT_CACHE})")
    sp.add_argument("--csv", default=None)
    sp.set_defaults(func=cmd_survey)
    return ap


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, out)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ConsistencyError as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
