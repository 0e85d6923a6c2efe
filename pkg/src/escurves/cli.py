"""Command-line entry point: search, audit, lemmas, bounds, report."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import mpmath

from . import __version__
from .aux_curves import faltings_log_bound
from .config import Config, load_config
from .errors import EsCurvesError, InputError, PreconditionError
from .es_model import EsCurve, admissible_denominators, merge_points, sander_catalog, search_shard, trivial_points
from .lemmas import SELECTORS, run_suites
from .mordell import (
    HeightBallQuery,
    ball_bounds,
    canonical_height,
    height_gap,
    independent_points,
    is_torsion,
    mordell_curve,
    search_points_naive,
)
from .pipeline import certificate_json, is_contradiction, load_candidate, parse_candidate, run_audit, terms_to_json

EXIT_OK = 0
EXIT_FAILED_SUITE = 1
EXIT_CONTRADICTION = 2
EXIT_USAGE = 64
EXIT_INPUT = 65

CSV_COLUMNS = ("k", "l", "x_num", "x_den", "y_num", "y_den", "trivial")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="PRNG seed (default 0)")
    p.add_argument("--shards", type=int, default=None, help="worker processes (default from config, else 1)")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--format", choices=("json", "csv"), default=None, help="output format")
    return p


def build_parser() -> Parser:
    common = _common()
    parser = Parser(prog="escurves", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("search", parents=[common], help="rational points on y^l = x(x+1)...(x+k-1)")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--l", type=int, required=True)
    s.add_argument("--denoms", type=int, help="largest denominator; omit with --numers for family mode")
    s.add_argument("--numers", type=int, help="largest |numerator|")
    s.add_argument("--param-bound", type=int, default=10, help="family parameter bound for (2,2)")

    a = sub.add_parser("audit", parents=[common], help="audit a candidate and emit a certificate")
    src = a.add_mutually_exclusive_group(required=True)
    src.add_argument("candidate", nargs="?", help="candidate JSON file")
    src.add_argument("--fixture", choices=("tampered",), help="built-in term fixture")
    a.add_argument("--out", help="write the certificate here instead of stdout")
    a.add_argument("--dump-fixture", help="also write the fixture's term JSON to this path")

    lm = sub.add_parser("lemmas", parents=[common], help="seeded property suites")
    lm.add_argument("--run", default="all", choices=SELECTORS + ("all",))
    lm.add_argument("--trials", type=int, default=100)

    b = sub.add_parser("bounds", parents=[common], help="log-space bound table")
    b.add_argument("--l", type=int, default=5)
    b.add_argument("--H", type=int, default=17000, help="coefficient height for the Faltings row")
    b.add_argument("--k", type=int, default=10**4, help="k for the threshold row")
    b.add_argument("--c", default=None, help="threshold exponent c (default from config)")
    b.add_argument("--gamma", type=int, default=-2, help="Mordell curve y^2 = x^3 + gamma")
    b.add_argument("--mult", type=float, default=5.0, help="ball radius H as a multiple of L")
    b.add_argument("--rank", type=int, default=None, help="rank for the bound side (default: lower bound)")
    b.add_argument("--L", type=float, default=None, help="height floor (default: config, else least found)")
    b.add_argument("--search-height", type=int, default=2000)

    r = sub.add_parser("report", parents=[common], help="summarize a certificate")
    r.add_argument("certificate")
    return parser


# -- helpers -----------------------------------------------------------------


def _config(args) -> Config:
    cfg = load_config(args.config) if args.config else Config()
    return cfg


def _shards(args, cfg: Config) -> int:
    n = args.shards if args.shards is not None else cfg.shards
    if n < 1:
        raise UsageError("--shards must be positive")
    return n


def _points_csv(points, k, l) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for p in points:
        w.writerow((k, l, p.x.numerator, p.x.denominator, p.y.numerator, p.y.denominator,
                    str(p.is_trivial).lower()))
    return buf.getvalue()


def _points_json(points, k, l, extra=None) -> str:
    doc = {
        "k": str(k),
        "l": str(l),
        "points": [
            {"x": str(p.x), "y": str(p.y), "trivial": p.is_trivial} for p in points
        ],
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2) + "\n"


def _search_job(job):
    k, l, qs, numers = job
    return search_shard(EsCurve(k, l), qs, numers)


def sharded_search(curve: EsCurve, denoms: int, numers: int, shards: int):
    qs = admissible_denominators(curve, denoms)
    groups = [qs[i::shards] for i in range(shards)]
    jobs = [(curve.k, curve.l, g, numers) for g in groups if g]
    if shards == 1 or len(jobs) <= 1:
        parts = [_search_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=len(jobs)) as ex:
            parts = list(ex.map(_search_job, jobs))
    return merge_points(parts)


# -- commands ----------------------------------------------------------------


def cmd_search(args, out, err) -> int:
    cfg = _config(args)
    shards = _shards(args, cfg)
    if (args.denoms is None) != (args.numers is None):
        raise UsageError("give both --denoms and --numers, or neither for family mode")
    curve = EsCurve(args.k, args.l)
    diagnostic = None
    if args.denoms is None:
        catalog = sander_catalog(curve, args.param_bound)
        points = merge_points([trivial_points(curve), catalog.points])
        diagnostic = catalog.diagnostic
        mode = "family"
    else:
        if args.denoms < 1 or args.numers < 1:
            raise UsageError("--denoms and --numers must be positive")
        points = sharded_search(curve, args.denoms, args.numers, shards)
        mode = "search"
    fmt = args.format or "csv"
    if fmt == "csv":
        out.write(_points_csv(points, curve.k, curve.l))
    else:
        out.write(_points_json(points, curve.k, curve.l, {"mode": mode, "diagnostic": diagnostic}))
    nontrivial = [p for p in points if not p.is_trivial]
    if nontrivial:
        listed = ", ".join(f"({p.x}, {p.y})" for p in nontrivial[:12])
        more = f" and {len(nontrivial) - 12} more" if len(nontrivial) > 12 else ""
        err.write(f"{len(nontrivial)} nontrivial point(s): {listed}{more}\n")
    else:
        err.write("trivial-only\n")
    if diagnostic:
        err.write(f"diagnostic: {diagnostic}\n")
    return EXIT_OK


def cmd_audit(args, out, err) -> int:
    cfg = _config(args)
    shards = _shards(args, cfg)
    if args.format == "csv":
        raise UsageError("certificates are JSON only")
    if args.fixture:
        from .fixtures import tampered_terms

        terms, d = tampered_terms()
        doc = terms_to_json(terms, len(terms), 3, d)
        if args.dump_fixture:
            with open(args.dump_fixture, "w", encoding="utf-8") as fh:
                json.dump(doc, fh)
        cand = parse_candidate(doc)
    else:
        cand = load_candidate(args.candidate)
    cert = run_audit(cand, cfg, shards)
    text = certificate_json(cert)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    err.write(f"verdict: {cert['verdict']['result']}\n")
    return EXIT_CONTRADICTION if is_contradiction(cert) else EXIT_OK


def cmd_lemmas(args, out, err) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    reports = run_suites(args.run, args.trials, args.seed)
    if args.format == "json":
        out.write(json.dumps({"seed": args.seed, "suites": [r.as_dict() for r in reports]}, indent=2) + "\n")
    else:
        for r in reports:
            out.write(f"[{'pass' if r.ok else 'FAIL'}] {r.name}: {r.trials} trials, {r.failures} failures\n")
            for line in r.lines:
                out.write(f"    {line}\n")
            for ex in r.examples:
                out.write(f"    failing input: {ex}\n")
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAILED_SUITE


def bounds_rows(args, cfg: Config) -> list[dict]:
    rows = []
    try:
        fb = faltings_log_bound(args.l, args.H, cfg.precision)
        rows.append({"row": "faltings", "l": args.l, "H": args.H,
                     "ln_ln_bound": mpmath.nstr(fb.ln_ln_bound, 30), "log": fb.log_base})
    except PreconditionError as exc:
        rows.append({"row": "faltings", "l": args.l, "H": args.H, "inapplicable": str(exc)})

    E = mordell_curve(args.gamma)
    pts = search_points_naive(E, args.search_height)
    basis = independent_points(E, pts)
    r = args.rank if args.rank is not None else len(basis)
    L = args.L if args.L is not None else cfg.curve_override(args.gamma, "L")
    L_source = "given"
    if L is None:
        hs = [canonical_height(E, P) for P in pts if not P.is_infinity and not is_torsion(E, P)]
        L, L_source = (min(hs), "least height found") if hs else (1.0, "default (no nontorsion point)")
    gap = cfg.curve_override(args.gamma, "gap")
    gap_source = "given"
    if gap is None:
        gap, gap_source = height_gap(E, pts), "max over searched points"
    q = HeightBallQuery(args.mult * L, L, r)
    nac, prop = ball_bounds(q)
    rows.append({
        "row": "mordell", "curve": str(E), "H_over_L": args.mult, "L": repr(L), "L_source": L_source,
        "r": r, "r_source": "given" if args.rank is not None else "lower bound",
        "height_gap": repr(gap), "gap_source": gap_source,
        "bound_nac": repr(nac), "bound_prop": repr(prop),
        "bound_prop_formula": f"16*(9*{args.mult:g})^({r}/2)",
    })

    c = mpmath.mpf(args.c) if args.c is not None else mpmath.mpf(cfg.c.numerator) / cfg.c.denominator
    with mpmath.workdps(cfg.precision):
        lk = mpmath.log(args.k)
        if lk <= 1:
            rows.append({"row": "threshold", "k": args.k, "inapplicable": "needs log log k > 0"})
        else:
            ln_thr = mpmath.mpf(args.k) ** (c / mpmath.log(lk))
            rows.append({"row": "threshold", "k": args.k, "c": mpmath.nstr(c, 6),
                         "shape": "d >= exp(k^(c/log log k))",
                         "ln_threshold": mpmath.nstr(ln_thr, 20)})
    return rows


def cmd_bounds(args, out, err) -> int:
    cfg = _config(args)
    rows = bounds_rows(args, cfg)
    if args.format == "json":
        out.write(json.dumps({"rows": rows}, indent=2) + "\n")
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("row", "key", "value"))
        for row in rows:
            for key, v in row.items():
                if key != "row":
                    w.writerow((row["row"], key, v))
        out.write(buf.getvalue())
    else:
        for row in rows:
            body = ", ".join(f"{k}={v}" for k, v in row.items() if k != "row")
            out.write(f"{row['row']:<10} {body}\n")
    return EXIT_OK


def cmd_report(args, out, err) -> int:
    try:
        with open(args.certificate, encoding="utf-8") as fh:
            cert = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read certificate: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"line {exc.lineno} column {exc.colno}: {exc.msg}", args.certificate) from None
    if not isinstance(cert, dict) or not {"version", "input", "stages", "verdict"} <= set(cert):
        raise InputError("not a certificate", args.certificate)
    cand = cert["input"].get("candidate", {})
    out.write(f"certificate v{cert['version']}  k={cand.get('k')} l={cand.get('l')} d={cand.get('d')}\n")
    for st in cert["stages"]:
        d = st.get("detail", {})
        extra = d.get("assertion") or d.get("reason") or ""
        out.write(f"  {st['name']:<15} {st['status']:<8} {extra}\n")
    out.write(f"verdict: {cert['verdict']['result']}\n")
    ff = cert["verdict"].get("first_failure")
    if ff:
        out.write(f"  first failure: {ff['stage']} / {ff['assertion']}: {json.dumps(ff['values'])}\n")
    return EXIT_CONTRADICTION if cert["verdict"]["result"] != "consistent" else EXIT_OK


COMMANDS = {
    "search": cmd_search,
    "audit": cmd_audit,
    "lemmas": cmd_lemmas,
    "bounds": cmd_bounds,
    "report": cmd_report,
}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out, err)
    except UsageError as exc:
        err.write(f"escurves {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except InputError as exc:
        err.write(f"escurves {args.command}: input error: {exc}\n")
        return EXIT_INPUT
    except EsCurvesError as exc:
        err.write(f"escurves {args.command}: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
