"""End-to-end audit of a candidate solution and its JSON certificate.

Stages run in a fixed order: transform, factorization, invariants,
trivial_t, mass_increment, gcd_pairs, aux_grouping, bounds. Every stage
runs when its inputs exist; the verdict names the first stage that failed.
"""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import mpmath

from .arith_core import is_prime
from .aux_curves import exponent_within_sqrt_log, faltings_log_bound, pairs_to_points
from .combinatorics import gcd_dense_pairs, hypothesis_check
from .config import Config
from .errors import AuditError, DegenerateTermError, InputError, ValidationError
from .es_model import ApSolution, point_from_triple, validate_ap
from .factor_terms import (
    TermFactorization,
    _factor_one,
    check_term_invariants,
    count_trivial_ti,
)
from .mass_increment import TRIVIAL_CAP as TRIVIAL_LIMIT, mass_increment_audit

CERT_VERSION = "1"
STAGES = (
    "transform",
    "factorization",
    "invariants",
    "trivial_t",
    "mass_increment",
    "gcd_pairs",
    "aux_grouping",
    "bounds",
)


# -- candidates --------------------------------------------------------------


@dataclass(frozen=True)
class Candidate:
    k: int
    l: int
    d: int
    n: int | None = None
    t: int | None = None
    terms: tuple | None = None  # given term data instead of (n, t)

    def as_dict(self) -> dict:
        out = {"k": self.k, "l": self.l, "d": self.d}
        if self.terms is None:
            out.update(n=self.n, t=self.t)
        else:
            out["terms_sha256"] = _terms_digest(self.terms)
            out["term_count"] = len(self.terms)
        return out


def _int_field(obj: dict, key: str, where: str = "", optional: bool = False):
    name = f"{where}{key}"
    if key not in obj or obj[key] is None:
        if optional:
            return None
        raise InputError("missing", name)
    v = obj[key]
    if isinstance(v, bool):
        raise InputError("expected an integer", name)
    if isinstance(v, str):
        try:
            v = int(v)
        except ValueError:
            raise InputError(f"not an integer: {v!r}", name) from None
    if not isinstance(v, int):
        raise InputError(f"expected an integer, got {type(v).__name__}", name)
    return v


def parse_candidate(obj) -> Candidate:
    """Candidate from decoded JSON: {n, d, t, k, l} or {k, l, d, terms: [...]}.

    Integers may be JSON numbers or decimal strings; ``t`` may be null for
    a speculative candidate.
    """
    if not isinstance(obj, dict):
        raise InputError("candidate must be a JSON object")
    k = _int_field(obj, "k")
    l = _int_field(obj, "l")
    d = _int_field(obj, "d")
    if k < 3:
        raise InputError("must be at least 3", "k")
    if l < 2:
        raise InputError("must be at least 2", "l")
    if d < 1:
        raise InputError("must be positive", "d")
    if "terms" in obj:
        raw = obj["terms"]
        if not isinstance(raw, list):
            raise InputError("expected a list", "terms")
        if len(raw) != k:
            raise InputError(f"expected {k} entries, got {len(raw)}", "terms")
        terms = []
        for pos, item in enumerate(raw):
            where = f"terms[{pos}]."
            if not isinstance(item, dict):
                raise InputError("expected an object", f"terms[{pos}]")
            i = _int_field(item, "i", where)
            if i != pos:
                raise InputError(f"index {i} out of order", f"{where}i")
            a = _int_field(item, "a", where)
            rough = _int_field(item, "rough", where)
            t = _int_field(item, "t", where, optional=True)
            exact = t is not None and t**l == rough
            terms.append(TermFactorization(i, a, rough, t if exact else None, exact))
        return Candidate(k, l, d, terms=tuple(terms))
    n = _int_field(obj, "n")
    t = _int_field(obj, "t", optional=True)
    return Candidate(k, l, d, n=n, t=t)


def load_candidate(path) -> Candidate:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read candidate: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"line {exc.lineno} column {exc.colno}: {exc.msg}", str(path)) from None
    return parse_candidate(raw)


def terms_to_json(terms, k: int, l: int, d: int) -> dict:
    return {
        "k": k,
        "l": l,
        "d": d,
        "terms": [
            {"i": t.index, "a": str(t.a), "rough": str(t.rough), "t": None if t.t is None else str(t.t)}
            for t in terms
        ],
    }


def _terms_digest(terms) -> str:
    h = hashlib.sha256()
    for t in terms:
        h.update(f"{t.index}:{t.a}:{t.rough}:{t.t}\n".encode())
    return h.hexdigest()


# -- sharded factorization ---------------------------------------------------


def _factor_chunk(args):
    n, step, k, l, lo, hi = args
    return [_factor_one(i, n + i * step, k, l) for i in range(lo, hi)]


def _chunks(k: int, shards: int):
    size = -(-k // shards)
    return [(lo, min(k, lo + size)) for lo in range(0, k, size)]


def sharded_factor_terms(n: int, d: int, k: int, l: int, shards: int = 1) -> list:
    step = d**l
    jobs = [(n, step, k, l, lo, hi) for lo, hi in _chunks(k, max(1, shards))]
    if shards <= 1 or len(jobs) == 1:
        parts = [_factor_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(shards, len(jobs))) as ex:
            parts = list(ex.map(_factor_chunk, jobs))
    out = [t for part in parts for t in part]
    out.sort(key=lambda t: t.index)
    return out


# -- stages ------------------------------------------------------------------


def _stage(name, status, **detail):
    return {"name": name, "status": status, "detail": detail}


def _first_failure(stage) -> dict:
    d = stage["detail"]
    return {"stage": stage["name"], "assertion": d.get("assertion"), "values": d.get("values")}


def _transform(c: Candidate):
    if c.terms is not None:
        return _stage("transform", "skipped", reason="term data supplied directly"), None
    if c.t is None:
        return _stage("transform", "skipped", reason="speculative: no t supplied"), None
    s = ApSolution(c.n, c.d, c.t, c.k, c.l)
    try:
        s = validate_ap(c.n, c.d, c.t, c.k, c.l)
    except ValidationError as exc:
        value = s.product() if c.d >= 1 else None
        return _stage(
            "transform", "fail",
            assertion="prod (n + i d^l) = t^l with gcd(n, d) = 1",
            values={"product": value, "t^l": c.t**c.l, "gcd(n,d)": gcd(c.n, c.d)},
            message=str(exc),
        ), None
    p = point_from_triple(c.n, c.d, c.t, c.k, c.l)
    return _stage("transform", "pass", point={"x": p.x, "y": p.y}), s


def _factorization(c: Candidate, shards: int):
    if c.terms is not None:
        terms = list(c.terms)
        source = "supplied"
    else:
        try:
            terms = sharded_factor_terms(c.n, c.d, c.k, c.l, shards)
        except DegenerateTermError as exc:
            return _stage(
                "factorization", "fail",
                assertion="every term is nonzero",
                values={"index": exc.index},
            ), None
        source = "computed"
    small = {t.a for t in terms if t.a < c.k}
    detail = {
        "source": source,
        "terms": len(terms),
        "exact_powers": sum(1 for t in terms if t.exact_power),
        "distinct_small_a": len(small),
        "sha256": _terms_digest(terms),
        "head": [{"i": t.index, "a": t.a, "rough": t.rough, "t": t.t} for t in terms[:8]],
    }
    return _stage("factorization", "pass", **detail), terms


def _invariants(c: Candidate, terms):
    rep = check_term_invariants(terms, c.k, c.d, c.l, c.n)
    failed = rep.failed()
    if failed:
        first = failed[0]
        return _stage(
            "invariants", "fail",
            assertion=first,
            values=rep.bullets[first].counterexample,
            failed=failed,
            bullets=rep.as_dict(),
        )
    return _stage("invariants", "pass", bullets=rep.as_dict())


def _trivial_t(c: Candidate, terms):
    tc = count_trivial_ti(terms, c.k)
    detail = {"count": tc.count, "indices": tc.indices[:25], "limit": TRIVIAL_LIMIT}
    if c.k >= TRIVIAL_LIMIT + 1 and tc.count > TRIVIAL_LIMIT:
        return _stage("trivial_t", "fail",
                      assertion=f"at most {TRIVIAL_LIMIT} indices with a_i < k and |t_i| = 1",
                      values={"count": tc.count}, **detail)
    return _stage("trivial_t", "pass", **detail)


def _mass_increment(c: Candidate, terms):
    try:
        trace = mass_increment_audit(terms, c.k, c.l, c.d)
    except AuditError as exc:
        return _stage("mass_increment", "fail", assertion="term data consistent", values={"error": str(exc)}), None
    detail = trace.as_dict()
    if trace.broken:
        return _stage("mass_increment", "fail", assertion=trace.broken,
                      values={"small": trace.small, "distinct": trace.distinct, "A_size": trace.A_size},
                      trace=detail), trace
    return _stage("mass_increment", "pass", trace=detail), trace


def _gcd_pairs(c: Candidate, terms, trace, cfg: Config):
    h = cfg.hypothesis
    lhs, ok = hypothesis_check(h)
    if trace is not None:
        idx = trace.I
    else:
        idx = range(c.k)
    b = sorted({terms[i].a for i in idx if terms[i].a < c.k})
    base = {"c": h.c, "eta": h.eta, "A": h.A, "hypothesis_lhs": lhs, "hypothesis_ok": ok, "r": len(b)}
    if not ok:
        return _stage("gcd_pairs", "skipped", reason="hypothesis fails for the configured constants", **base), []
    if len(b) < h.c * c.k:
        return _stage("gcd_pairs", "skipped", reason="fewer than c k distinct a_i < k", **base), []
    res = gcd_dense_pairs(b, h, c.k)
    base.update(pairs=len(res.pairs), lower_bound=res.lower_bound, s=res.s, small_k=res.small_k,
                sample=[list(p) for p in res.pairs[:10]])
    if len(res.pairs) < res.lower_bound:
        return _stage("gcd_pairs", "fail", assertion="pairs >= r - eta k - s",
                      values={"pairs": len(res.pairs), "bound": res.lower_bound}, **base), res.pairs
    return _stage("gcd_pairs", "pass", **base), res.pairs


def _aux_grouping(c: Candidate, terms, trace, pairs):
    first_index: dict[int, int] = {}
    for t in terms:
        if t.exact_power:
            first_index.setdefault(t.a, t.index)
    tuples, coeffs = [], []
    for u, v in pairs:
        if u not in first_index or v not in first_index:
            continue
        i, j = first_index[u], first_index[v]
        g = gcd(u, v)
        if (i - j) % g:
            continue
        gap = (i - j) // g
        if gap == 0:
            continue
        tuples.append((terms[i].t, terms[j].t, c.d, 1 if gap > 0 else -1))
        coeffs.append((u // g, v // g, abs(gap)))
    collision = []
    if trace is not None and trace.collision and trace.collision.get("A0") is not None:
        A0 = trace.collision["A0"]
        for p in trace.collision["pairs"]:
            i, j = p["i"], p["j"]
            collision.append((terms[i].t, terms[j].t, c.d, 1 if A0 > 0 else -1))
            coeffs.append((1, 1, abs(A0)))
    tuples += collision
    if not tuples:
        return _stage("aux_grouping", "skipped", reason="no pairs with exact t-values"), None
    try:
        grp = pairs_to_points(tuples, coeffs, c.l)
    except ValidationError as exc:
        return _stage("aux_grouping", "fail", assertion="ternary identity for every pair",
                      values={"error": str(exc)}), None
    detail = {
        "pairs_used": len(tuples),
        "from_collision": len(collision),
        "groups": len(grp.groups),
        "largest_curve": list(grp.largest),
        "largest_points": [[x, y] for x, y in grp.largest_points[:10]],
        "largest_size": len(grp.largest_points),
        "distinct_asserted": grp.distinct_asserted,
    }
    return _stage("aux_grouping", "pass", **detail), grp


def _bounds(c: Candidate, grp, cfg: Config):
    rows = {}
    with mpmath.workdps(cfg.precision):
        logk = mpmath.log(c.k)
        rows["log_k"] = mpmath.nstr(logk, 20)
        if c.l >= 5 and is_prime(c.l):
            H = max(abs(v) for v in grp.largest) if grp is not None else c.k
            fb = faltings_log_bound(c.l, H, cfg.precision)
            rows["faltings"] = {
                "H": H,
                "ln_ln_bound": mpmath.nstr(fb.ln_ln_bound, 30),
                "log_base": fb.log_base,
                "points_on_largest_curve": len(grp.largest_points) if grp is not None else 0,
            }
            rows["exponent_within_sqrt_log_k"] = exponent_within_sqrt_log(c.l, logk)
        else:
            rows["faltings"] = {"applicable": False, "reason": "needs a prime l >= 5"}
        if c.l == 3:
            ce = mpmath.mpf(c.k) ** (mpmath.mpf(cfg.c.numerator) / cfg.c.denominator / mpmath.log(logk)) \
                if logk > 1 else None
            rows["threshold"] = {
                "ln_threshold": None if ce is None else mpmath.nstr(ce, 20),
                "ln_d": mpmath.nstr(mpmath.log(c.d), 20),
                "d_at_least_threshold": None if ce is None else bool(mpmath.log(c.d) >= ce),
            }
    return _stage("bounds", "info", **rows)


# -- certificate -------------------------------------------------------------


def _canonical(obj):
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, mpmath.mpf):
        return mpmath.nstr(obj, 20)
    if isinstance(obj, float):
        return repr(obj)
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    return obj


def run_audit(c: Candidate, cfg: Config | None = None, shards: int = 1) -> dict:
    cfg = cfg or Config()
    stages = []
    transform, _ = _transform(c)
    stages.append(transform)
    fact, terms = _factorization(c, shards)
    stages.append(fact)
    trace = grp = None
    if terms is not None:
        stages.append(_invariants(c, terms))
        stages.append(_trivial_t(c, terms))
        mi, trace = _mass_increment(c, terms)
        stages.append(mi)
        gp, pairs = _gcd_pairs(c, terms, trace, cfg)
        stages.append(gp)
        ag, grp = _aux_grouping(c, terms, trace, pairs)
        stages.append(ag)
    else:
        for name in STAGES[2:7]:
            stages.append(_stage(name, "skipped", reason="no term data"))
    stages.append(_bounds(c, grp, cfg))
    failed = [s for s in stages if s["status"] == "fail"]
    if failed:
        verdict = {"result": f"contradiction-at-stage-{failed[0]['name']}",
                   "first_failure": _first_failure(failed[0]),
                   "failed_stages": [s["name"] for s in failed]}
    else:
        verdict = {"result": "consistent"}
    cert = {
        "version": CERT_VERSION,
        "input": {"candidate": c.as_dict(), "config": cfg.as_dict()},
        "stages": stages,
        "verdict": verdict,
    }
    return _canonical(cert)


def certificate_json(cert: dict) -> str:
    return json.dumps(cert, indent=2, ensure_ascii=True) + "\n"


def is_contradiction(cert: dict) -> bool:
    return cert["verdict"]["result"] != "consistent"

