"""Jensen polynomials, Hermite limits, and certified real-root counting.

Coefficients are midpoint/radius pairs.  When every radius is zero the
polynomial is exact (mpf values are dyadic rationals) and root counting runs
in :class:`fractions.Fraction` arithmetic; otherwise Sturm chains are built in
``mpmath.iv`` interval arithmetic and undecidable signs yield ``None``.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import mpmath
from mpmath import iv, mp, mpf

from .errors import DegreeMismatch, InvalidParams, LeadingIntervalContainsZero, MissingRecord
from .numerics import PrecisionContext, to_mpf


@contextmanager
def _ivprec(prec: int):
    saved = iv.prec
    iv.prec = prec
    try:
        yield
    finally:
        iv.prec = saved


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    x = mpf(x)
    sign, man, exp, _ = x._mpf_
    if not man:
        return Fraction(0)
    val = Fraction(man) * (Fraction(2) ** exp)
    return -val if sign else val


class RealPolynomial:
    """``sum coeffs[i] X^i`` with per-coefficient error radii (low degree first)."""

    def __init__(self, coeffs: Sequence, radii: Optional[Sequence] = None):
        coeffs = list(coeffs)
        if not coeffs:
            raise InvalidParams("empty coefficient list")
        radii = [mpf(0)] * len(coeffs) if radii is None else [mpf(r) for r in radii]
        if len(radii) != len(coeffs):
            raise InvalidParams("coeffs and radii differ in length")
        if any(r < 0 for r in radii):
            raise InvalidParams("negative radius")
        if abs(to_mpf(coeffs[-1])) <= radii[-1] or (radii[-1] == 0 and _to_fraction(coeffs[-1]) == 0):
            raise LeadingIntervalContainsZero("leading coefficient interval contains 0")
        self.coeffs = coeffs
        self.radii = radii

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def exact(self) -> bool:
        return all(r == 0 for r in self.radii)

    def fractions(self) -> list[Fraction]:
        return [_to_fraction(c) for c in self.coeffs]

    def midpoints(self) -> list[mpf]:
        return [to_mpf(c) for c in self.coeffs]

    def intervals(self) -> list:
        out = []
        for c, r in zip(self.coeffs, self.radii):
            m = iv.mpf(_interval_exact(c))
            out.append(m + iv.mpf([-r, r]) if r else m)
        return out

    def evaluate(self, x):
        """Interval enclosure of ``p(x)``."""
        with _ivprec(mp.prec + 32):
            acc = iv.mpf(0)
            xi = iv.mpf(x)
            for c in reversed(self.intervals()):
                acc = acc * xi + c
            return acc

    def __repr__(self):
        terms = ", ".join(mpmath.nstr(to_mpf(c), 8) for c in self.coeffs)
        return f"RealPolynomial([{terms}])"


def _interval_exact(c):
    if isinstance(c, Fraction):
        return iv.mpf(c.numerator) / c.denominator
    return iv.mpf(c)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def _record_value(rec):
    if hasattr(rec, "value"):
        return rec.value, rec.error_bound
    return rec, mpf(0)


def jensen_polynomial(gammas, d: int, n: int) -> RealPolynomial:
    """``J^{d,n}(X) = sum_j C(d, j) a(n+j) X^j``.

    ``gammas`` maps indices to :class:`GammaRecord` objects or to plain numbers
    (a list indexed from 0 also works).
    """
    if d < 0 or n < 0:
        raise InvalidParams("d and n must be nonnegative")
    coeffs, radii = [], []
    for j in range(d + 1):
        k = n + j
        try:
            rec = gammas[k]
        except (KeyError, IndexError):
            raise MissingRecord(f"no gamma record for n = {k}") from None
        value, bound = _record_value(rec)
        b = math.comb(d, j)
        if isinstance(value, (int, Fraction)):
            coeffs.append(b * Fraction(value))
            radii.append(b * mpf(bound))
        else:
            # b * value is rounded once; widen by one ulp
            coeffs.append(b * value)
            radii.append(b * mpf(bound) + abs(b * value) * mpf(2) ** (1 - mp.prec))
    return RealPolynomial(coeffs, radii)


def hermite(d: int) -> RealPolynomial:
    """``H_d`` with generating function ``exp(Xt - t^2)``: ``H_2 = X^2 - 2``."""
    if d < 0:
        raise InvalidParams("d must be nonnegative")
    prev, cur = [1], [0, 1]
    if d == 0:
        return RealPolynomial([Fraction(1)])
    for k in range(1, d):
        nxt = [0] + cur
        for i, c in enumerate(prev):
            nxt[i] -= 2 * k * c
        prev, cur = cur, nxt
    return RealPolynomial([Fraction(c) for c in cur])


def normalized_jensen(J: RealPolynomial, A, delta) -> RealPolynomial:
    """Monic form of ``J((delta X - 1) / e^A)``."""
    A, delta = mpf(A), mpf(delta)
    if delta <= 0:
        raise InvalidParams("delta must be positive")
    d = J.degree
    with _ivprec(mp.prec + 32):
        E = iv.exp(iv.mpf(A))
        dl = iv.mpf(delta)
        cs = J.intervals()
        lead = cs[d] * dl**d / E**d
        if 0 in lead:
            raise LeadingIntervalContainsZero("normalized leading coefficient interval contains 0")
        out_mid, out_rad = [], []
        for i in range(d + 1):
            acc = iv.mpf(0)
            for j in range(i, d + 1):
                acc += cs[j] * math.comb(j, i) * (-1) ** (j - i) * dl**i / E**j
            val = acc / lead
            # endpoints are read exactly and the radius rounded up, so the
            # midpoint's rounding never shrinks the enclosure
            lo, hi = mp.make_mpf(val._mpi_[0]), mp.make_mpf(val._mpi_[1])
            mid = mpf(val.mid)
            out_mid.append(mid)
            out_rad.append(max(mpmath.fsub(hi, mid, rounding="u"), mpmath.fsub(mid, lo, rounding="u")))
    out_mid[-1], out_rad[-1] = mpf(1), mpf(0)
    return RealPolynomial(out_mid, out_rad)


def hermite_deviation(p: RealPolynomial, d: int) -> mpf:
    """``max_j |coeff_j(p) - coeff_j(H_d)|`` for a monic ``p`` of degree ``d``."""
    if p.degree != d:
        raise DegreeMismatch(f"polynomial has degree {p.degree}, expected {d}")
    if to_mpf(p.coeffs[-1]) != 1:
        raise DegreeMismatch("polynomial is not monic")
    H = hermite(d).midpoints()
    return max(abs(a - b) for a, b in zip(p.midpoints(), H))


# ---------------------------------------------------------------------------
# exact Sturm machinery
# ---------------------------------------------------------------------------


def _trim(p: list[Fraction]) -> list[Fraction]:
    while len(p) > 1 and p[-1] == 0:
        p = p[:-1]
    return p


def _rem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a = list(a)
    db, lb = len(b) - 1, b[-1]
    while len(a) - 1 >= db and any(a):
        if a[-1] == 0:
            a.pop()
            continue
        f = a[-1] / lb
        shift = len(a) - 1 - db
        for i, c in enumerate(b):
            a[shift + i] -= f * c
        a.pop()
    return _trim(a or [Fraction(0)])


def _quo(a, b):
    a = list(a)
    db = len(b) - 1
    q = [Fraction(0)] * max(len(a) - db, 1)
    while len(a) - 1 >= db and any(a):
        f = a[-1] / b[-1]
        shift = len(a) - 1 - db
        q[shift] = f
        for i, c in enumerate(b):
            a[shift + i] -= f * c
        a.pop()
    return _trim(q)


def _deriv(p):
    return _trim([i * c for i, c in enumerate(p)][1:] or [Fraction(0)])


def _gcd(a, b):
    while any(b):
        a, b = b, _rem(a, b)
    return [c / a[-1] for c in a]


def _eval_sign(p, x) -> int:
    v = Fraction(0)
    for c in reversed(p):
        v = v * x + c
    return (v > 0) - (v < 0)


def _sign_changes(signs) -> int:
    s = [x for x in signs if x]
    return sum(1 for u, v in zip(s, s[1:]) if u != v)


def _sturm_exact(p: list[Fraction], interval) -> int:
    """Distinct real roots of ``p`` in ``(lo, hi]`` (or on the whole line)."""
    chain = [p, _deriv(p)]
    while len(chain[-1]) > 1:
        r = _rem(chain[-2], chain[-1])
        if not any(r):
            break
        chain.append([-c for c in r])

    def at_inf(sign):
        return _sign_changes(
            [(1 if q[-1] > 0 else -1) * (sign ** (len(q) - 1)) for q in chain if any(q)]
        )

    if interval is None:
        return at_inf(-1) - at_inf(1)
    lo, hi = (Fraction(x) if not isinstance(x, mpf) else _to_fraction(x) for x in interval)
    return _sign_changes([_eval_sign(q, lo) for q in chain]) - _sign_changes([_eval_sign(q, hi) for q in chain])


def _squarefree_factors(p: list[Fraction]) -> list[tuple[int, list[Fraction]]]:
    """Yun's algorithm: ``p = c * prod f_i^i`` with squarefree coprime ``f_i``."""
    def sub(x, y):
        n = max(len(x), len(y))
        return _trim([(x[k] if k < len(x) else 0) - (y[k] if k < len(y) else 0) for k in range(n)])

    dp = _deriv(p)
    if not any(dp):
        return []
    a = _gcd(p, dp)
    b = _quo(p, a)
    dcoef = sub(_quo(dp, a), _deriv(b))
    out = []
    i = 1
    while len(b) > 1:
        a = _gcd(b, dcoef) if any(dcoef) else [c / b[-1] for c in b]
        b = _quo(b, a)
        if len(a) > 1:
            out.append((i, a))
        dcoef = sub(_quo(dcoef, a), _deriv(b))
        i += 1
    return out


# ---------------------------------------------------------------------------
# interval Sturm
# ---------------------------------------------------------------------------


def _sturm_interval(p: RealPolynomial, interval, prec: int) -> Optional[int]:
    with _ivprec(prec):
        P = p.intervals()
        d = p.degree
        dP = [P[i] * i for i in range(1, d + 1)]
        chain = [P, dP]
        while len(chain[-1]) > 1:
            a, b = chain[-2], chain[-1]
            if 0 in b[-1]:
                return None
            a = list(a)
            db = len(b) - 1
            while len(a) - 1 >= db:
                f = a[-1] / b[-1]
                shift = len(a) - 1 - db
                for i, c in enumerate(b):
                    a[shift + i] = a[shift + i] - f * c
                a.pop()
            # the remainder must have full degree db-1 for a certified chain
            if not a or 0 in a[-1]:
                return None
            chain.append([-c for c in a])
        if 0 in chain[-1][0]:
            return None

        def sign(x):
            if x.a > 0:
                return 1
            if x.b < 0:
                return -1
            return None

        def changes_at(xs):
            s = []
            for q in chain:
                if xs is None or isinstance(xs, int):
                    # +/- infinity: leading sign times parity
                    lead = sign(q[-1])
                    if lead is None:
                        return None
                    s.append(lead * (xs ** (len(q) - 1) if xs == -1 else 1))
                else:
                    acc = iv.mpf(0)
                    for c in reversed(q):
                        acc = acc * xs + c
                    sg = sign(acc)
                    if sg is None:
                        return None
                    s.append(sg)
            return _sign_changes(s)

        if interval is None:
            lo_c, hi_c = changes_at(-1), changes_at(1)
        else:
            lo_c, hi_c = changes_at(iv.mpf(interval[0])), changes_at(iv.mpf(interval[1]))
        if lo_c is None or hi_c is None:
            return None
        return lo_c - hi_c


def sturm_real_root_count(p: RealPolynomial, interval=None, prec: Optional[int] = None) -> Optional[int]:
    """Number of distinct real roots (in ``(lo, hi]`` if given), or ``None`` when undecided."""
    if p.exact:
        return _sturm_exact(_trim(p.fractions()), interval)
    return _sturm_interval(p, interval, prec or mp.prec + 32)


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------


class Status(str, enum.Enum):
    CERTIFIED_HYPERBOLIC = "CertifiedHyperbolic"
    CERTIFIED_NOT_HYPERBOLIC = "CertifiedNotHyperbolic"
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class HyperbolicityVerdict:
    status: Status
    real_root_count: Optional[int]
    precision_used: int


def _exact_real_roots_with_multiplicity(p: list[Fraction]) -> int:
    if len(p) <= 1:
        return 0
    return sum(i * _sturm_exact(f, None) for i, f in _squarefree_factors(p))


def certify_hyperbolic(
    p: RealPolynomial,
    ctx: PrecisionContext = PrecisionContext(),
    recompute: Optional[Callable[[PrecisionContext], RealPolynomial]] = None,
) -> HyperbolicityVerdict:
    """Certify that every root of ``p`` is real.

    An undecided interval Sturm chain triggers ``recompute`` (which should rebuild
    ``p`` from upstream data at the escalated precision) up to
    ``ctx.max_escalations`` times before the verdict is ``Unknown``.
    """
    while True:
        bits = ctx.working_bits
        if p.exact:
            count = _exact_real_roots_with_multiplicity(_trim(p.fractions()))
            status = Status.CERTIFIED_HYPERBOLIC if count == p.degree else Status.CERTIFIED_NOT_HYPERBOLIC
            return HyperbolicityVerdict(status, count, bits)
        count = _sturm_interval(p, None, ctx.internal_bits + 32)
        if count is not None:
            # a full interval chain certifies squarefreeness, so distinct = with multiplicity
            status = Status.CERTIFIED_HYPERBOLIC if count == p.degree else Status.CERTIFIED_NOT_HYPERBOLIC
            return HyperbolicityVerdict(status, count, bits)
        if ctx.max_escalations <= 0:
            return HyperbolicityVerdict(Status.UNKNOWN, None, bits)
        ctx = ctx.escalate()
        if recompute is not None:
            p = recompute(ctx)


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------


@dataclass
class ScanReport:
    family: str
    rows: list = field(default_factory=list)  # (d, n, verdict)

    @property
    def exceptions(self) -> list[tuple[int, int]]:
        return [(d, n) for d, n, v in self.rows if v.status == Status.CERTIFIED_NOT_HYPERBOLIC]

    @property
    def unknowns(self) -> list[tuple[int, int]]:
        return [(d, n) for d, n, v in self.rows if v.status == Status.UNKNOWN]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["family", "d", "n", "status", "root_count", "bits"])
        for d, n, v in self.rows:
            w.writerow([self.family, d, n, v.status.value, "" if v.real_root_count is None else v.real_root_count, v.precision_used])
        return buf.getvalue()


def hyperbolicity_scan(
    family,
    d_set: Sequence[int],
    n_range: Sequence[int],
    ctx: PrecisionContext,
    cache=None,
    workers: int = 1,
) -> ScanReport:
    """Certify ``J^{d,n}`` for every ``d`` in ``d_set`` and ``n`` in ``n_range``."""
    from .lfunction import gamma_range

    report = ScanReport(family.name)
    ns = sorted(set(n_range))
    ds = sorted(set(d_set))
    if not ns or not ds:
        return report
    lo, hi = ns[0], ns[-1] + ds[-1]
    records = {r.n: r for r in gamma_range(family, lo, hi, ctx, cache, workers)}

    for d in ds:
        for n in ns:
            def rebuild(c, d=d, n=n):
                recs = {r.n: r for r in gamma_range(family, n, n + d, c, cache, 1)}
                with c.workprec():
                    return jensen_polynomial(recs, d, n)

            with ctx.workprec():
                J = jensen_polynomial(records, d, n)
            report.rows.append((d, n, certify_hyperbolic(J, ctx, rebuild)))
    return report
