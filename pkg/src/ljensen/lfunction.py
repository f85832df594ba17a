"""Completed L-function families and their exact central-derivative data.

For a family with constants ``(Q, mu, c0, scale, eps)`` and theta stream ``f``

    F(n) = c0 scale^n (1 + (-1)^n eps) int_{t0}^inf (f(t) - alpha0) t^(mu-1) (log Q + 2 log t)^n dt

with ``t0 = Q^(-1/2)``.  Everything else (``Lambda^(n)``, ``Xi^(n)(0)``, ``gamma(n)``)
is an exact linear combination of these integrals plus the pole record.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import mpmath
from mpmath import mp, mpf

from .errors import (
    CacheCorrupt,
    Inconclusive,
    InvalidEpsF,
    InvalidParams,
    OddWeight,
)
from .numerics import (
    Decay,
    PrecisionContext,
    factorial_ratio,
    quadrature_decaying,
    solve_saddle_equation,
    to_mpf,
)
from .theta import (
    DirichletCharacterSpec,
    ThetaTermStream,
    dirichlet_stream,
    modular_stream,
    quad_ideal_stream,
    reduced_forms,
    riemann_stream,
    unit_count,
)

# quadrature counter; lets callers (and tests) observe cache hits
STATS = {"quadratures": 0}


@dataclass(frozen=True)
class Pole:
    """Pole contribution ``P n! ((-1)^(n+1) - eps) rho^(n+1)`` to ``Lambda^(n)`` at the center."""

    P: Fraction
    rho: Fraction


@dataclass(frozen=True)
class LFamily:
    name: str
    Q: Fraction
    mu: Fraction
    c0_base: Fraction
    c0_exp: Fraction
    scale: Fraction
    eps: int
    streams: tuple[ThetaTermStream, ...]
    pole: Optional[Pole]
    k_center: Fraction
    params: tuple = field(default=())

    def __post_init__(self):
        if self.eps not in (-1, 1):
            raise InvalidParams(f"eps must be +1 or -1, got {self.eps}")
        if len({s.j for s in self.streams}) != 1:
            raise InvalidParams("all streams of a family must share the root exponent j")

    @property
    def j(self) -> int:
        return self.streams[0].j

    @property
    def c0(self) -> mpf:
        return to_mpf(self.c0_base) ** to_mpf(self.c0_exp)

    @property
    def t0(self) -> mpf:
        return 1 / mpmath.sqrt(to_mpf(self.Q))

    @property
    def alpha0(self) -> Fraction:
        return sum((s.alpha0 for s in self.streams), Fraction(0))

    @property
    def c_min(self) -> mpf:
        return min(s.c_min for s in self.streams)

    @property
    def alpha_min(self) -> Fraction:
        """Total coefficient at the smallest exponent ``c_min``."""
        cm = self.c_min
        return sum((s.alpha_min for s in self.streams if s.c_min == cm), Fraction(0))

    def m_map(self, n: int) -> int:
        if self.pole is not None:
            return 2 * n - 2 if self.eps == 1 else 2 * n - 1
        return 2 * n if self.eps == 1 else 2 * n + 1

    def saddle_constants(self) -> tuple[mpf, mpf, int]:
        """``(A, B, j')`` with the saddle equation ``m = (A e^(L/j') + B) L``."""
        j = self.j
        A = mpmath.pi * self.c_min / (2 * j) * to_mpf(self.Q) ** (-mpf(1) / (2 * j))
        B = (1 - to_mpf(self.mu)) / 2
        return A, B, 2 * j

    def canonical(self) -> dict:
        return {
            "name": self.name,
            "params": [str(p) for p in self.params],
            "Q": str(self.Q),
            "mu": str(self.mu),
            "c0": [str(self.c0_base), str(self.c0_exp)],
            "scale": str(self.scale),
            "eps": self.eps,
            "pole": None if self.pole is None else [str(self.pole.P), str(self.pole.rho)],
            "k_center": str(self.k_center),
            "streams": [s.content(64) for s in self.streams],
        }


def family_hash(family: LFamily) -> str:
    blob = json.dumps(family.canonical(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:32]


def make_family(kind: str, **params) -> LFamily:
    """Build one of ``zeta``, ``dirichlet(D)``, ``modular(N, w, coeffs, eps_f)``, ``dedekind(D)``.

    >>> make_family("dirichlet", D=-4).mu
    Fraction(3, 4)
    """
    if kind == "zeta":
        return LFamily(
            "zeta", Fraction(1), Fraction(1, 4), Fraction(1), Fraction(1), Fraction(1, 4), 1,
            (riemann_stream(),), Pole(Fraction(1), Fraction(2)), Fraction(1),
        )
    if kind == "dirichlet":
        spec = DirichletCharacterSpec(int(params["D"]))
        nu = spec.nu
        return LFamily(
            "dirichlet", Fraction(spec.D**2), Fraction(1 + 2 * nu, 4), Fraction(spec.modulus),
            Fraction(1 + 2 * nu, 4), Fraction(1, 4), 1, (dirichlet_stream(spec),), None,
            Fraction(1), (spec.D,),
        )
    if kind == "modular":
        N, w = int(params["N"]), int(params["w"])
        coeffs = params["coeffs"]
        eps_f = params.get("eps_f", "auto")
        if w % 2:
            raise OddWeight(f"weight {w} is odd; i^w eps_f is not real")
        if N < 1 or w < 2:
            raise InvalidParams("need level N >= 1 and weight w >= 2")
        if eps_f == "auto":
            eps_f = detect_functional_sign(coeffs, N, w, PrecisionContext())
        if eps_f not in (1, -1):
            raise InvalidEpsF(f"eps_f must be +1 or -1, got {eps_f!r}")
        stream = modular_stream(coeffs, weight=w)
        eps = (-1) ** (w // 2) * eps_f
        return LFamily(
            "modular", Fraction(N), Fraction(w, 2), Fraction(N), Fraction(w, 4), Fraction(1, 2), eps,
            (stream,), None, Fraction(w), (N, w, eps_f),
        )
    if kind == "dedekind":
        D = int(params["D"])
        forms = reduced_forms(D)
        streams = tuple(quad_ideal_stream(D, f) for f in forms)
        h, w = len(forms), unit_count(D)
        return LFamily(
            "dedekind", Fraction(1), Fraction(1, 4), Fraction(1), Fraction(1), Fraction(1, 4), 1,
            streams, Pole(Fraction(2 * h, w), Fraction(2)), Fraction(1), (D,),
        )
    raise InvalidParams(f"unknown family kind {kind!r}")


# ---------------------------------------------------------------------------
# theta evaluation with pointwise truncation
# ---------------------------------------------------------------------------


class _ThetaEvaluator:
    """``f(t) - alpha0`` summed over the family's streams.

    At each point the sum stops at the first index whose growth-majorant tail is
    below ``rel * |partial sum|``, so the truncation error is relative.
    """

    def __init__(self, family: LFamily, rel: mpf):
        self.family = family
        self.rel = rel
        self.terms = []
        self.covered = []
        for s in family.streams:
            qb = s._initial_bound()
            self.terms.append((s, [(q, to_mpf(a)) for q, a in s.raw_terms(qb)]))
            self.covered.append(qb)

    def _cutoff(self, stream: ThetaTermStream, u, thr) -> int:
        g = stream.growth
        K, gexp, p = float(g.K), float(g.g), g.power
        rate = float(mpmath.pi * stream.c_unit * u)
        logthr = float(mpmath.log(thr))
        k = 1.0
        for _ in range(4):
            k = max(1.0, ((math.log(K) - logthr + gexp * math.log(k + 1)) / rate) ** (1.0 / p))
        k0 = int(k)
        while stream.majorant_tail(k0, u) > thr:
            k0 += 1 + k0 // 8
        return k0

    def __call__(self, t) -> mpf:
        j = self.family.j
        u = t if j == 1 else mpmath.root(t, j)
        total = mpf(0)
        lead = None
        for idx, (stream, terms) in enumerate(self.terms):
            if lead is None:
                q, a = terms[0]
                lead = abs(a) * mpmath.exp(-mpmath.pi * stream.c_of(q) * u)
            k0 = self._cutoff(stream, u, lead * self.rel / (4 * len(self.terms)))
            qmax = k0**stream.growth.power
            if self.covered[idx] < qmax:
                qnew = max(qmax, 2 * self.covered[idx])
                terms = [(q, to_mpf(a)) for q, a in stream.raw_terms(qnew)]
                self.terms[idx] = (stream, terms)
                self.covered[idx] = qnew
            cu = stream.c_unit
            for q, a in terms:
                if q > qmax:
                    break
                total += a * mpmath.exp(-mpmath.pi * cu * q * u)
        if abs(total) < lead / 2:
            # the leading term no longer dominates; rerun against the actual sum
            return self._strict(u)
        return total

    def _strict(self, u) -> mpf:
        total = mpf(0)
        for stream, _ in self.terms:
            qmax = stream.raw_terms(16)[-1][0] * 2
            while stream.majorant_tail(int(mpmath.root(qmax, stream.growth.power)), u) > abs(total) * self.rel / 4:
                qmax *= 2
                if qmax > 10**7:
                    break
            total_s = sum(
                (to_mpf(a) * mpmath.exp(-mpmath.pi * stream.c_of(q) * u) for q, a in stream.raw_terms(qmax)),
                mpf(0),
            )
            total += total_s
        return total

    def decay(self, n: int, u0) -> Decay:
        """Majorant ``K e^(-pi c_min u) t^(mu-1) |log Q + 2 log t|^n`` valid for ``u >= u0``."""
        fam = self.family
        cmin = fam.c_min
        K = mpf(0)
        for stream in fam.streams:
            k0 = self._cutoff(stream, u0, mpf(2) ** (-mp.prec) * mpmath.exp(-mpmath.pi * cmin * u0))
            for q, a in stream.raw_terms(k0**stream.growth.power):
                K += abs(to_mpf(a)) * mpmath.exp(-mpmath.pi * (stream.c_of(q) - cmin) * u0)
            K += stream.majorant_tail(k0, u0) * mpmath.exp(mpmath.pi * cmin * u0)
        return Decay(K, cmin, fam.j, to_mpf(fam.mu) - 1, to_mpf(fam.Q), n)


def peak_hint(family: LFamily, n: int, ctx: PrecisionContext) -> mpf:
    """Maximizer of ``g(t) = (f - alpha0) t^(mu-1) (log Q + 2 log t)^n`` to leading order."""
    if n == 0:
        return family.t0
    A, B, jp = family.saddle_constants()
    L = solve_saddle_equation(A, B, jp, n, ctx)
    return mpmath.exp((L - mpmath.log(to_mpf(family.Q))) / 2)


def central_F(family: LFamily, n: int, ctx: PrecisionContext) -> tuple[mpf, mpf]:
    """``F(n)`` and a bound on its absolute error."""
    if n < 0:
        raise InvalidParams("n must be nonnegative")
    if n % 2 and family.eps == 1 or n % 2 == 0 and family.eps == -1:
        return mpf(0), mpf(0)
    wp = ctx.internal_bits
    with mp.workprec(wp):
        rel_eval = mpf(2) ** (-wp)
        evaluator = _ThetaEvaluator(family, rel_eval)
        logQ = mpmath.log(to_mpf(family.Q))
        mu1 = to_mpf(family.mu) - 1

        def integrand(t):
            ell = logQ + 2 * mpmath.log(t)
            return evaluator(t) * t**mu1 * ell**n

        t0 = family.t0
        u0 = t0 if family.j == 1 else mpmath.root(t0, family.j)
        decay = evaluator.decay(n, u0)
        STATS["quadratures"] += 1
        value, bound = quadrature_decaying(
            integrand,
            t0,
            max(peak_hint(family, n, ctx), t0),
            mpf(2) ** (-(ctx.working_bits - 8)),
            ctx,
            decay=decay,
            eval_rel_err=(2 * n + 16) * rel_eval,
        )
        pref = 2 * family.c0 * to_mpf(family.scale) ** n
        result = pref * value
        # internal arithmetic plus the final rounding to working precision
        err = pref * bound + abs(result) * (mpf(2) ** (-(wp - 4)) + mpf(2) ** (-ctx.working_bits))
    with mp.workprec(ctx.working_bits):
        return +result, mpmath.fmul(err, 1, rounding="u")


def pole_term(family: LFamily, n: int) -> mpf:
    if family.pole is None:
        return mpf(0)
    P, rho = family.pole.P, family.pole.rho
    exact = P * math.factorial(n) * ((-1) ** (n + 1) - family.eps) * rho ** (n + 1)
    return to_mpf(exact)


def lambda_central_derivative(family: LFamily, n: int, ctx: PrecisionContext) -> mpf:
    """``Lambda^(n)(k/2)``: pole contribution plus ``F(n)``."""
    value, _ = central_F(family, n, ctx)
    with mp.workprec(ctx.working_bits):
        return pole_term(family, n) + value


def _xi_real(family: LFamily, n: int, F) -> tuple[mpf, mpf]:
    """``(X, bound)`` with ``Xi^(n)(0) = (-i)^n X``; ``F(k)`` returns ``(value, bound)``."""
    if family.pole is None:
        return F(n)
    k2 = to_mpf(family.k_center) ** 2
    fn, bn = F(n)
    X, B = -k2 * fn / 4, k2 * bn / 4
    size = abs(X)
    if n >= 2:
        c = 2 * math.comb(n, 2)
        fm, bm = F(n - 2)
        X += c * fm
        B += c * bm
        size += abs(c * fm)
    if n == 0:
        pole = to_mpf(family.pole.P * family.k_center)
        X += pole
        size += abs(pole)
    # rounding in the sum is relative to the summands, which may cancel
    return X, B + size * mpf(2) ** (2 - mp.prec)


def xi_derivative_at_zero(family: LFamily, n: int, ctx: PrecisionContext) -> mpf:
    """Real representative of ``Xi^(n)(0)``.

    For even ``n`` this is the value itself; for odd ``n`` it is the coefficient
    of ``i`` (the real part vanishes by parity).
    """
    if n < 0:
        raise InvalidParams("n must be nonnegative")
    X, _ = _xi_real(family, n, lambda k: central_F(family, k, ctx))
    with mp.workprec(ctx.working_bits):
        if n % 2 == 0:
            return (-1) ** (n // 2) * X
        return -((-1) ** ((n - 1) // 2)) * X


# ---------------------------------------------------------------------------
# gamma records and cache
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaRecord:
    n: int
    value: mpf
    error_bound: mpf
    family_hash: str
    bits: int


def gamma_F_indices(family: LFamily, n: int) -> list[int]:
    """Indices ``k`` whose ``F(k)`` enter ``gamma(n)``."""
    m = 2 * n if family.eps == 1 else 2 * n + 1
    if family.pole is not None and m >= 2:
        return [m - 2, m]
    return [m]


def _gamma_from_F(family: LFamily, n: int, F, ctx: PrecisionContext) -> tuple[mpf, mpf]:
    with mp.workprec(ctx.internal_bits):
        if family.eps == 1:
            X, B = _xi_real(family, 2 * n, F)
            ratio = factorial_ratio(n, 2 * n)
        else:
            X, B = _xi_real(family, 2 * n + 1, F)
            ratio = factorial_ratio(n, 2 * n + 1)
        value = ratio * X
        bound = ratio * B + abs(value) * (mpf(2) ** (-(ctx.internal_bits - 4)) + mpf(2) ** (-ctx.working_bits))
    with mp.workprec(ctx.working_bits):
        return +value, mpmath.fmul(bound, 1, rounding="u")


def taylor_gamma(family: LFamily, n: int, ctx: PrecisionContext) -> GammaRecord:
    """``gamma(n)``: Taylor coefficient of ``Xi`` in the squared variable, divided by ``n!``."""
    if n < 0:
        raise InvalidParams("n must be nonnegative")
    value, bound = _gamma_from_F(family, n, lambda k: central_F(family, k, ctx), ctx)
    return GammaRecord(n, value, bound, family_hash(family), ctx.working_bits)


def mpf_to_hex(x: mpf) -> str:
    sign, man, exp, _ = x._mpf_
    if not man:
        if x != 0:
            raise InvalidParams(f"cannot encode {x}")
        return "0x0p0"
    return f"{'-' if sign else ''}0x{man:x}p{exp}"


def mpf_from_hex(s: str) -> mpf:
    neg = s.startswith("-")
    body = s[1:] if neg else s
    if not body.startswith("0x") or "p" not in body:
        raise ValueError(f"bad hex float {s!r}")
    man_s, exp_s = body[2:].split("p")
    man, exp = int(man_s, 16), int(exp_s)
    with mp.workprec(max(man.bit_length(), 53)):
        v = mpmath.ldexp(mpf(man), exp)
    return -v if neg else v


class GammaCache:
    """One JSON document per family hash under ``directory``.

    Writes are serialized with a file lock and published by atomic rename, so
    concurrent readers only ever see complete documents.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def path(self, fhash: str) -> Path:
        return self.directory / f"{fhash}.json"

    @staticmethod
    def _checksum(entries: list) -> str:
        blob = json.dumps(entries, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def load(self, fhash: str) -> dict[tuple[int, int], GammaRecord]:
        path = self.path(fhash)
        if not path.exists():
            return {}
        try:
            doc = json.loads(path.read_text())
            entries = doc["entries"]
            if doc.get("family_hash") != fhash or doc.get("checksum") != self._checksum(entries):
                raise CacheCorrupt(f"checksum mismatch in {path}")
            out = {}
            for e in entries:
                rec = GammaRecord(
                    int(e["n"]), mpf_from_hex(e["value"]), mpf_from_hex(e["error_bound"]), fhash, int(e["bits"])
                )
                out[(rec.n, rec.bits)] = rec
            return out
        except CacheCorrupt:
            raise
        except (ValueError, KeyError, TypeError) as exc:
            raise CacheCorrupt(f"unreadable cache file {path}: {exc}") from None

    def store(self, fhash: str, records: Sequence[GammaRecord]) -> None:
        from filelock import FileLock

        path = self.path(fhash)
        with FileLock(str(path) + ".lock"):
            try:
                current = self.load(fhash)
            except CacheCorrupt:
                current = {}
            for r in records:
                current[(r.n, r.bits)] = r
            entries = [
                {"n": r.n, "value": mpf_to_hex(r.value), "error_bound": mpf_to_hex(r.error_bound), "bits": r.bits}
                for _, r in sorted(current.items())
            ]
            doc = {"family_hash": fhash, "entries": entries, "checksum": self._checksum(entries)}
            fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=".tmp-", suffix=".json")
            with os.fdopen(fd, "w") as fh:
                json.dump(doc, fh, indent=1)
            os.replace(tmp, path)


def _F_task(args):
    family, k, ctx = args
    value, bound = central_F(family, k, ctx)
    return k, value, bound, STATS["quadratures"]


def gamma_range(
    family: LFamily,
    n_lo: int,
    n_hi: int,
    ctx: PrecisionContext,
    cache: Optional[GammaCache] = None,
    workers: int = 1,
) -> list[GammaRecord]:
    """``gamma(n)`` for ``n_lo <= n <= n_hi``; cached entries are reused only at equal ``bits``."""
    if n_lo > n_hi:
        raise InvalidParams(f"empty range {n_lo}..{n_hi}")
    if n_lo < 0:
        raise InvalidParams("n must be nonnegative")
    fhash = family_hash(family)
    known: dict[tuple[int, int], GammaRecord] = {}
    if cache is not None:
        try:
            known = cache.load(fhash)
        except CacheCorrupt as exc:
            warnings.warn(f"{exc}; recomputing", RuntimeWarning, stacklevel=2)
    bits = ctx.working_bits
    missing = [n for n in range(n_lo, n_hi + 1) if (n, bits) not in known]
    if missing:
        needed = sorted({k for n in missing for k in gamma_F_indices(family, n)})
        Fvals: dict[int, tuple[mpf, mpf]] = {}
        if workers > 1 and len(needed) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for k, v, b, _ in pool.map(_F_task, [(family, k, ctx) for k in needed]):
                    Fvals[k] = (v, b)
            STATS["quadratures"] += len(needed)
        else:
            for k in needed:
                Fvals[k] = central_F(family, k, ctx)
        fresh = []
        for n in missing:
            v, b = _gamma_from_F(family, n, lambda k: Fvals[k], ctx)
            rec = GammaRecord(n, v, b, fhash, bits)
            known[(n, bits)] = rec
            fresh.append(rec)
        if cache is not None:
            cache.store(fhash, fresh)
    return [known[(n, bits)] for n in range(n_lo, n_hi + 1)]


# ---------------------------------------------------------------------------
# modular forms: functional sign and completed L-function
# ---------------------------------------------------------------------------


def _fiy(coeffs, y, weight) -> tuple[mpf, mpf]:
    """``sum a(n) e^(-2 pi n y)`` over the given coefficients plus a tail bound.

    The tail uses ``|a(n)| <= 2 n^(w/2)`` past the supplied list.
    """
    q = mpmath.exp(-2 * mpmath.pi * y)
    total = mpf(0)
    qn = mpf(1)
    for a in coeffs:
        qn *= q
        total += to_mpf(Fraction(a)) * qn
    M = len(coeffs)
    g = mpf(weight) / 2
    first = 2 * mpf(M + 1) ** g * q ** (M + 1)
    ratio = (mpf(M + 2) / (M + 1)) ** g * q
    tail = first / (1 - ratio) if ratio < 1 else mpmath.inf
    return total, tail + abs(total) * mpf(2) ** (-(mp.prec - 8))


def detect_functional_sign(coeffs, N: int, w: int, ctx: PrecisionContext) -> int:
    """The Atkin-Lehner sign ``eps_f`` with ``f(i/(Ny)) = i^w eps_f N^(w/2) y^w f(iy)``.

    Both sides are compared at ``y = 1/sqrt(N)`` and ``y = 2/sqrt(N)``.
    """
    if w % 2:
        raise OddWeight(f"weight {w} is odd")
    fits = []
    with ctx.workprec():
        sqN = mpmath.sqrt(N)
        iw = (-1) ** (w // 2)
        for eps_f in (1, -1):
            ok = True
            for y in (1 / sqN, 2 / sqN):
                lhs, el = _fiy(coeffs, 1 / (N * y), w)
                rhs0, er = _fiy(coeffs, y, w)
                fac = N ** (mpf(w) / 2) * y**w
                rhs = iw * eps_f * fac * rhs0
                if abs(lhs - rhs) > el + fac * er:
                    ok = False
                    break
            if ok:
                fits.append(eps_f)
    if len(fits) != 1:
        raise Inconclusive(
            "no sign fits the transformation law" if not fits else "both signs fit within the truncation bound"
        )
    return fits[0]


def modular_lambda(coeffs, N: int, w: int, eps_f: int, s, split=None) -> mpf:
    """``Lambda(f, s) = N^(s/2) (2 pi)^(-s) Gamma(s) L(f, s)`` at real ``s``.

    Integrates ``f(iy) y^(s-1)`` on ``[y1, inf)`` and folds ``[0, y1]`` through the
    transformation law.  A split ``y1`` away from the fixed point ``1/sqrt(N)``
    makes the functional equation a nontrivial check on ``eps_f``.
    """
    s = mpf(s)
    y1 = mpf(split) if split is not None else mpf(13) / 10 / mpmath.sqrt(N)
    cs = [to_mpf(Fraction(a)) for a in coeffs]

    def f(y):
        q = mpmath.exp(-2 * mpmath.pi * y)
        return mpmath.fsum(a * q ** (n + 1) for n, a in enumerate(cs))

    def part(lo, power):
        pts = [lo, lo + 1, lo + 4, lo + 12, mpmath.inf]
        return mpmath.quad(lambda y: f(y) * y ** (power - 1), pts)

    iw = (-1) ** (w // 2)
    upper = part(y1, s)
    lower = iw * eps_f * N ** (mpf(w) / 2 - s) * part(1 / (N * y1), w - s)
    return N ** (s / 2) * (upper + lower)
