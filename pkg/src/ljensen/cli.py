"""Command-line interface: ``ljensen {gamma,table,scan,asympt}``.

Exit codes: 0 success, 1 a certified non-hyperbolic Jensen polynomial was found,
2 invalid configuration, 3 precision failure, 4 too many undecided verdicts.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import mpmath
from mpmath import mp, mpf

from . import fixtures
from .asymptotics import (
    asymptotic_F,
    b1,
    correction_terms,
    gamma_hat,
    hj_normalizers,
    log_expansion,
    saddle_point,
    two_term_Fhat,
)
from .errors import InvalidParams, LJensenError, NoConvergence, NoDecayProof, PrecisionInsufficient
from .jensen import hermite_deviation, hyperbolicity_scan, jensen_polynomial, normalized_jensen
from .lfunction import GammaCache, central_F, family_hash, gamma_range, make_family, mpf_to_hex
from .numerics import PrecisionContext
from .theta import load_coefficients_csv

EXIT_OK = 0
EXIT_NOT_HYPERBOLIC = 1
EXIT_CONFIG = 2
EXIT_PRECISION = 3
EXIT_UNKNOWN = 4

# n beyond which an exact F for the asympt ratio field is skipped
EXACT_F_LIMIT = 5000


@dataclass
class RunConfig:
    family: object
    ctx: PrecisionContext
    fmt: str
    cache: Optional[GammaCache]
    workers: int
    allow_long: bool
    digits: int


def sci(x, digits: int = 15) -> str:
    """Decimal with an explicit exponent."""
    if not isinstance(x, mpf):
        with mp.workprec(256):
            x = mpf(x)
    if x == 0:
        return "0.0e+0"
    s = mpmath.nstr(x, digits, min_fixed=mpmath.inf, max_fixed=-mpmath.inf)
    return s if "e" in s else s + "e+0"


def parse_range(text: str) -> list[int]:
    """``"A"`` or ``"A..B"`` (inclusive); ``B < A`` gives an empty range."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A or A..B, got {text!r}") from None


def _epsf(text: str):
    if text == "auto":
        return "auto"
    if text in ("+1", "1"):
        return 1
    if text == "-1":
        return -1
    raise argparse.ArgumentTypeError("expected +1, -1 or auto")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    fam = common.add_argument_group("family")
    fam.add_argument("--family", choices=["zeta", "dirichlet", "modular", "dedekind"], default="dirichlet")
    fam.add_argument("--disc", type=int, default=-4, help="fundamental discriminant D")
    fam.add_argument("--level", type=int, help="modular level N")
    fam.add_argument("--weight", type=int, default=2, help="modular weight w (even)")
    fam.add_argument("--coeffs", type=Path, help="CSV file with header n,a_n")
    fam.add_argument("--epsf", type=_epsf, default="auto", help="Atkin-Lehner sign: +1, -1 or auto")
    run = common.add_argument_group("run")
    run.add_argument("--digits", type=int, default=60, help="decimal digits of working precision (>= 10)")
    run.add_argument("--format", choices=["csv", "json", "pretty"], default="pretty", dest="fmt")
    run.add_argument("--cache", type=Path, help="gamma cache directory")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--allow-long", action="store_true", help="permit rows with n >= 10000")

    parser = argparse.ArgumentParser(prog="ljensen", description=__doc__, allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gamma", parents=[common], allow_abbrev=False, help="Taylor coefficients gamma(n)")
    g.add_argument("--n", type=parse_range, required=True)

    t = sub.add_parser("table", parents=[common], allow_abbrev=False, help="reproduce a published table")
    t.add_argument("which", choices=["chi4_gamma", "chi4_jensen"])
    t.add_argument("--n", type=parse_range, action="append", help="row(s); repeatable")
    t.add_argument("--d", type=parse_range, help="degrees for chi4_jensen (default 2..3)")

    s = sub.add_parser("scan", parents=[common], allow_abbrev=False, help="hyperbolicity scan")
    s.add_argument("--n", type=parse_range, required=True)
    s.add_argument("--d", type=parse_range, required=True)
    s.add_argument("--out", type=Path, help="CSV report path (default stdout)")
    s.add_argument("--unknown-threshold", type=float, default=0.0, help="allowed fraction of Unknown verdicts")

    a = sub.add_parser("asympt", parents=[common], allow_abbrev=False, help="saddle-point diagnostics")
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--order", type=int, default=2)
    return parser


def make_config(args) -> RunConfig:
    if args.digits < 10:
        raise InvalidParams(f"--digits must be >= 10, got {args.digits}")
    if args.workers < 1:
        raise InvalidParams("--workers must be >= 1")
    ctx = PrecisionContext.from_digits(args.digits)
    if args.family == "zeta":
        family = make_family("zeta")
    elif args.family == "dirichlet":
        family = make_family("dirichlet", D=args.disc)
    elif args.family == "dedekind":
        family = make_family("dedekind", D=args.disc)
    else:
        if args.level is None or args.coeffs is None:
            raise InvalidParams("modular family needs --level and --coeffs")
        coeffs = load_coefficients_csv(args.coeffs)
        family = make_family("modular", N=args.level, w=args.weight, coeffs=coeffs, eps_f=args.epsf)
    cache = GammaCache(args.cache) if args.cache else None
    return RunConfig(family, ctx, args.fmt, cache, args.workers, args.allow_long, args.digits)


def _check_long(cfg: RunConfig, ns) -> None:
    big = [n for n in ns if n >= fixtures.LONG_RUN_THRESHOLD]
    if big and not cfg.allow_long:
        raise InvalidParams(f"rows n >= {fixtures.LONG_RUN_THRESHOLD} take minutes to hours; pass --allow-long")


def _num(x, digits) -> dict:
    if not isinstance(x, mpf):
        with mp.workprec(256):
            x = mpf(x)
    return {"decimal": sci(x, digits), "hex": mpf_to_hex(x)}


def _emit(cfg: RunConfig, header: list[str], rows: list[list], out=None) -> None:
    out = out or sys.stdout
    if cfg.fmt == "json":
        doc = [{h: v for h, v in zip(header, row)} for row in rows]
        json.dump(doc, out, indent=1)
        out.write("\n")
        return
    flat = [[v["decimal"] if isinstance(v, dict) else str(v) for v in row] for row in rows]
    if cfg.fmt == "csv":
        out.write(",".join(header) + "\n")
        for row in flat:
            out.write(",".join(row) + "\n")
        return
    widths = [max(len(h), *(len(r[i]) for r in flat)) if flat else len(h) for i, h in enumerate(header)]
    out.write("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip() + "\n")
    for row in flat:
        out.write("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() + "\n")


def cmd_gamma(cfg: RunConfig, ns: list[int]) -> int:
    if not ns:
        raise InvalidParams("empty --n range")
    _check_long(cfg, ns)
    recs = gamma_range(cfg.family, ns[0], ns[-1], cfg.ctx, cfg.cache, cfg.workers)
    digits = min(cfg.digits, 30)
    rows = [[r.n, _num(r.value, digits), _num(r.error_bound, 3)] for r in recs]
    _emit(cfg, ["n", "gamma", "error_bound"], rows)
    return EXIT_OK


def _reldiff(a, b) -> str:
    return sci(abs(a / b - 1), 3)


def cmd_table(cfg: RunConfig, which: str, ns: Optional[list[int]], ds: Optional[list[int]]) -> int:
    if cfg.family.name != "dirichlet" or cfg.family.params != (-4,):
        cfg.family = make_family("dirichlet", D=-4)
    ctx = cfg.ctx
    if which == "chi4_gamma":
        ns = ns or [10, 100, 1000]
        _check_long(cfg, ns)
        rows = []
        for n in ns:
            rec = gamma_range(cfg.family, n, n, ctx, cfg.cache, cfg.workers)[0]
            gh = gamma_hat(cfg.family, n, ctx=ctx)
            ratio = rec.value / gh
            paper = fixtures.CHI4_GAMMA.get(n)
            row = [n, _num(rec.value, 11), _num(gh, 11), _num(ratio, 10)]
            if paper:
                ph, pg, pr = (mpf(x) for x in paper)
                row += [paper[1], _reldiff(rec.value, pg), paper[0], _reldiff(gh, ph), paper[2], _reldiff(ratio, pr)]
            else:
                row += ["-"] * 6
            rows.append(row)
        header = ["n", "gamma", "gamma_hat", "ratio", "paper_gamma", "rel_diff", "paper_gamma_hat", "rel_diff_hat",
                  "paper_ratio", "rel_diff_ratio"]
        _emit(cfg, header, rows)
        return EXIT_OK
    ns = ns or [100, 1000]
    ds = ds or [2, 3]
    _check_long(cfg, ns)
    rows = []
    for n in ns:
        recs = {r.n: r for r in gamma_range(cfg.family, n, n + max(ds), ctx, cfg.cache, cfg.workers)}
        A, delta = hj_normalizers(cfg.family, n, ctx)
        for d in ds:
            with ctx.workprec():
                P = normalized_jensen(jensen_polynomial(recs, d, n), A, delta)
            coeffs = [mpmath.nstr(c, 6) for c in reversed(P.midpoints())]
            paper = fixtures.CHI4_JENSEN.get(n, {}).get(d)
            diff = "-"
            if paper:
                diff = sci(max(abs(mpf(p) - c) for p, c in zip(paper, reversed(P.midpoints()))), 3)
            rows.append([n, d, " ".join(coeffs), " ".join(paper) if paper else "-", diff,
                         sci(hermite_deviation(P, d), 4)])
    _emit(cfg, ["n", "d", "coefficients", "paper", "max_abs_diff", "hermite_deviation"], rows)
    return EXIT_OK


def cmd_scan(cfg: RunConfig, ns: list[int], ds: list[int], out: Optional[Path], threshold: float) -> int:
    report = hyperbolicity_scan(cfg.family, ds, ns, cfg.ctx, cfg.cache, cfg.workers)
    text = report.to_csv() if report.rows else ""
    if out is not None:
        out.write_text(text)
    else:
        sys.stdout.write(text)
    if report.exceptions:
        print(f"certified exceptions: {report.exceptions}", file=sys.stderr)
        return EXIT_NOT_HYPERBOLIC
    if report.rows and len(report.unknowns) / len(report.rows) > threshold:
        print(f"undecided: {report.unknowns}", file=sys.stderr)
        return EXIT_UNKNOWN
    return EXIT_OK


def cmd_asympt(cfg: RunConfig, n: int, order: int) -> int:
    if n < 1:
        raise InvalidParams("--n must be >= 1")
    if order < 2:
        raise InvalidParams("--order must be >= 2")
    fam, ctx = cfg.family, cfg.ctx
    m = fam.m_map(n)
    if m < 1:
        raise InvalidParams(f"n = {n} maps to derivative order {m} < 1")
    d = min(cfg.digits, 30)
    sp = saddle_point(fam, m, ctx)
    with ctx.workprec():
        orders = sorted({order, 3})
        corr = correction_terms(log_expansion(fam, sp, 2 * max(orders)), max(orders))
    doc = {
        "family": fam.name,
        "family_hash": family_hash(fam),
        "n": n,
        "m": m,
        "saddle": {"L": _num(sp.L, d), "a": _num(sp.a, d), "C": _num(sp.C, d), "eps_var": _num(sp.eps_var, d)},
        "corrections": {f"A{i}": _num(v, d) for i, v in corr.A.items()},
        "b1": {"family": _num(b1(sp.L, "family"), d), "general": _num(b1(sp.L, "general"), d)},
        "Fhat": _num(two_term_Fhat(fam, m, ctx=ctx), d),
        "gamma_hat": _num(gamma_hat(fam, n, ctx=ctx), d) if n >= 2 else None,
    }
    try:
        A, delta = hj_normalizers(fam, n, ctx)
        doc["hj"] = {"A": _num(A, d), "delta": _num(delta, d)}
    except LJensenError as exc:
        doc["hj"] = {"error": str(exc)}
    asym = {r: asymptotic_F(fam, m, r, ctx) for r in orders}
    doc["asymptotic_F"] = {str(r): _num(v, d) for r, v in asym.items()}
    if m <= EXACT_F_LIMIT or cfg.allow_long:
        F, bound = central_F(fam, m, ctx)
        doc["F"] = _num(F, d)
        doc["ratio_asymptotic_F"] = {str(r): _num(v / F, d) for r, v in asym.items()}
        doc["ratio_Fhat"] = _num(two_term_Fhat(fam, m, ctx=ctx) / F, d)
        if n >= 2:
            g = gamma_range(fam, n, n, ctx, cfg.cache, 1)[0]
            doc["ratio"] = _num(g.value / gamma_hat(fam, n, ctx=ctx), d)
    if cfg.fmt == "json" or cfg.fmt == "pretty":
        json.dump(doc, sys.stdout, indent=1)
        sys.stdout.write("\n")
    else:
        flat = []

        def walk(prefix, obj):
            if isinstance(obj, dict) and "decimal" in obj:
                flat.append((prefix, obj["decimal"]))
            elif isinstance(obj, dict):
                for k, v in obj.items():
                    walk(f"{prefix}.{k}" if prefix else k, v)
            else:
                flat.append((prefix, "" if obj is None else str(obj)))

        walk("", doc)
        sys.stdout.write("key,value\n" + "".join(f"{k},{v}\n" for k, v in flat))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = make_config(args)
        if args.command == "gamma":
            return cmd_gamma(cfg, args.n)
        if args.command == "table":
            ns = sorted({n for r in args.n for n in r}) if args.n else None
            return cmd_table(cfg, args.which, ns, args.d)
        if args.command == "scan":
            return cmd_scan(cfg, args.n, args.d, args.out, args.unknown_threshold)
        return cmd_asympt(cfg, args.n, args.order)
    except (InvalidParams, NoDecayProof) as exc:
        print(f"ljensen: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PrecisionInsufficient, NoConvergence) as exc:
        print(f"ljensen: precision failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except LJensenError as exc:
        print(f"ljensen: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
