"""Exponential term streams ``f(t) = alpha0 + sum alpha_m exp(-pi c_m t^(1/j))``.

Each stream stores exact terms ``(q, alpha)`` with ``c = q * sqrt(c_unit_sq)``;
``q`` is an integer (``m^2`` for theta series, ``n`` for q-expansions, the form
value for ideal lattices), so streams are canonical and hashable.
"""

from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

import mpmath
from mpmath import mp, mpf

from .errors import (
    CoefficientFileError,
    CoefficientOverflow,
    EmptyBound,
    EmptyStream,
    InsufficientTerms,
    InvalidParams,
    NoDecayProof,
    NotFundamental,
    NotNormalized,
    NotReduced,
    WrongDiscriminant,
)

# ---------------------------------------------------------------------------
# characters
# ---------------------------------------------------------------------------


def _squarefree(m: int) -> bool:
    m = abs(m)
    p = 2
    while p * p <= m:
        if m % (p * p) == 0:
            return False
        p += 1
    return True


def is_fundamental(D: int) -> bool:
    if D in (0,):
        return False
    if D % 4 == 1:
        return _squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


def _jacobi(a: int, n: int) -> int:
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker_symbol(D: int, n: int) -> int:
    """Kronecker symbol ``(D/n)`` for a fundamental discriminant ``D`` and ``n >= 0``."""
    if not is_fundamental(D):
        raise NotFundamental(f"{D} is not a fundamental discriminant")
    if n < 0:
        raise InvalidParams("n must be nonnegative")
    if n == 0:
        return 1 if abs(D) == 1 else 0
    result = 1
    while n % 2 == 0:
        if D % 2 == 0:
            return 0
        n //= 2
        if D % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    return result * _jacobi(D, n)


@dataclass(frozen=True)
class DirichletCharacterSpec:
    D: int

    def __post_init__(self):
        if abs(self.D) <= 1 or not is_fundamental(self.D):
            raise NotFundamental(f"{self.D} is not a fundamental discriminant with |D| > 1")

    @property
    def nu(self) -> int:
        return 0 if self.D > 0 else 1

    @property
    def modulus(self) -> int:
        return abs(self.D)

    def __call__(self, n: int) -> int:
        return kronecker_symbol(self.D, n)


# ---------------------------------------------------------------------------
# binary quadratic forms
# ---------------------------------------------------------------------------


def is_reduced(form: tuple[int, int, int]) -> bool:
    a, b, c = form
    if a <= 0 or not abs(b) <= a <= c:
        return False
    if (abs(b) == a or a == c) and b < 0:
        return False
    return True


def reduced_forms(D: int) -> list[tuple[int, int, int]]:
    """Primitive reduced positive definite forms of discriminant ``D < 0``; one per class."""
    if D >= 0 or D % 4 not in (0, 1):
        raise WrongDiscriminant(f"{D} is not a negative discriminant")
    forms = []
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a or math.gcd(math.gcd(a, b), c) != 1:
                continue
            if is_reduced((a, b, c)):
                forms.append((a, b, c))
        a += 1
    return forms


def unit_count(D: int) -> int:
    """``w_K`` for the imaginary quadratic field of discriminant ``D``."""
    return {-4: 4, -3: 6}.get(D, 2)


def form_representations(form: tuple[int, int, int], qmax: int) -> dict[int, int]:
    """Map ``q -> #{(x, y) != 0 : Q(x, y) = q}`` for ``q <= qmax``."""
    a, b, c = form
    D = b * b - 4 * a * c
    counts: dict[int, int] = {}
    # 4a Q = (2ax + by)^2 - D y^2  =>  y^2 <= 4 a qmax / |D|
    ymax = math.isqrt(4 * a * qmax // (-D)) + 1
    for y in range(-ymax, ymax + 1):
        rest = 4 * a * qmax + D * y * y
        if rest < 0:
            continue
        r = math.isqrt(rest) + 1
        xlo = (-b * y - r) // (2 * a) - 1
        xhi = (-b * y + r) // (2 * a) + 1
        for x in range(xlo, xhi + 1):
            if x == 0 and y == 0:
                continue
            q = a * x * x + b * x * y + c * y * y
            if q <= qmax:
                counts[q] = counts.get(q, 0) + 1
    return counts


# ---------------------------------------------------------------------------
# streams
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Growth:
    """Index ``k`` with ``q = k**power`` carries ``|alpha| <= K * k**g``."""

    K: Fraction
    g: Fraction
    power: int


class ThetaTermStream:
    """Lazily extendable, canonical list of exponential terms.

    Extension is serialized by a lock and always replaces the memo by a longer
    list with the old one as prefix, so readers see a consistent prefix.
    """

    def __init__(
        self,
        kind: str,
        params: tuple,
        j: int,
        alpha0: Fraction,
        c_unit_sq: Fraction,
        growth: Optional[Growth],
        finite: Optional[int] = None,
    ):
        self.kind = kind
        self.params = params
        self.j = j
        self.alpha0 = Fraction(alpha0)
        self.c_unit_sq = Fraction(c_unit_sq)
        self.growth = growth
        self.finite = finite
        self._lock = threading.Lock()
        self._terms: tuple[tuple[int, Fraction], ...] = ()
        self._covered = 0
        first = self.raw_terms(self._initial_bound())
        if not first:
            raise EmptyStream(f"{kind} stream has no nonzero terms")
        if first[0][1] == 0:
            raise EmptyStream("leading alpha vanishes")

    def __getstate__(self):
        state = self.__dict__.copy()
        del state["_lock"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()

    def __repr__(self):
        return f"ThetaTermStream({self.kind}, {self.params!r}, j={self.j})"

    def _initial_bound(self) -> int:
        if self.kind == "ideal":
            return max(self.params[1][2], 4)
        return 4

    def _generate(self, qmax: int) -> list[tuple[int, Fraction]]:
        kind = self.kind
        out: dict[int, Fraction] = {}
        if kind == "riemann":
            for m in range(1, math.isqrt(qmax) + 1):
                out[m * m] = Fraction(1)
        elif kind == "dirichlet":
            (D,) = self.params
            nu = 0 if D > 0 else 1
            for m in range(1, math.isqrt(qmax) + 1):
                chi = kronecker_symbol(D, m)
                if chi:
                    out[m * m] = Fraction(chi * m**nu)
        elif kind == "modular":
            coeffs, _weight = self.params
            for n in range(1, min(qmax, len(coeffs)) + 1):
                if coeffs[n - 1]:
                    out[n] = Fraction(coeffs[n - 1])
        elif kind == "ideal":
            D, form = self.params
            w = unit_count(D)
            for q, cnt in form_representations(form, qmax).items():
                out[q] = Fraction(cnt, w)
        else:  # pragma: no cover - constructor controls kinds
            raise InvalidParams(kind)
        return sorted((q, a) for q, a in out.items() if a != 0)

    def raw_terms(self, qmax: int) -> tuple[tuple[int, Fraction], ...]:
        """All terms with ``q <= qmax`` (exact)."""
        if qmax > self._covered:
            with self._lock:
                if qmax > self._covered:
                    target = max(qmax, 2 * self._covered)
                    if self.finite is not None:
                        target = min(max(target, qmax), max(self.finite, qmax))
                    self._terms = tuple(self._generate(target))
                    self._covered = target
        terms = self._terms
        if qmax >= self._covered:
            return terms
        return tuple(t for t in terms if t[0] <= qmax)

    @property
    def c_unit(self) -> mpf:
        return mpmath.sqrt(mpf(self.c_unit_sq.numerator) / self.c_unit_sq.denominator)

    def c_of(self, q: int) -> mpf:
        return q * self.c_unit

    @property
    def first(self) -> tuple[int, Fraction]:
        return self.raw_terms(self._initial_bound())[0]

    @property
    def c_min(self) -> mpf:
        return self.c_of(self.first[0])

    @property
    def alpha_min(self) -> Fraction:
        return self.first[1]

    def terms_upto(self, C) -> list[tuple[mpf, Fraction]]:
        """Every term with ``c <= C`` as ``(c, alpha)`` pairs (completeness contract)."""
        C = mpf(C)
        qmax = int(mpmath.floor(C / self.c_unit)) if C > 0 else 0
        if self.finite is not None and qmax > self.finite:
            raise InsufficientTerms(f"stream only knows terms up to q = {self.finite}")
        return [(self.c_of(q), a) for q, a in self.raw_terms(qmax) if self.c_of(q) <= C]

    def majorant_tail(self, k0: int, u) -> mpf:
        """Bound for ``sum_{k > k0} K k^g exp(-pi c_unit k^p u)`` by a geometric ratio test."""
        if self.growth is None:
            raise NoDecayProof(f"{self.kind} stream has no coefficient growth bound")
        K = mpf(self.growth.K.numerator) / self.growth.K.denominator
        g = mpf(self.growth.g.numerator) / self.growth.g.denominator
        p = self.growth.power
        k1 = k0 + 1
        rate = mpmath.pi * self.c_unit * u
        first = K * mpf(k1) ** g * mpmath.exp(-rate * mpf(k1) ** p)
        ratio = (mpf(k1 + 1) / k1) ** g * mpmath.exp(-rate * (mpf(k1 + 1) ** p - mpf(k1) ** p))
        if ratio >= 1:
            return mpmath.inf
        # widen by a few ulps so rounding cannot push the bound below the true sum
        return first / (1 - ratio) * (1 + mpf(2) ** (4 - mp.prec))

    def content(self, count: int = 64) -> dict:
        """Canonical serialization used for content hashing."""
        terms = []
        qmax = 16
        while True:
            raw = self.raw_terms(qmax)
            if len(raw) >= count or (self.finite is not None and qmax >= self.finite) or qmax > 10**7:
                break
            qmax *= 2
        for q, a in raw[:count]:
            terms.append([q, str(a)])
        return {
            "kind": self.kind,
            "j": self.j,
            "alpha0": str(self.alpha0),
            "c_unit_sq": str(self.c_unit_sq),
            "terms": terms,
        }


def riemann_stream() -> ThetaTermStream:
    """``sum_{m>=1} exp(-pi m^2 t)``."""
    return ThetaTermStream("riemann", (), 1, Fraction(0), Fraction(1), Growth(Fraction(1), Fraction(0), 2))


def dirichlet_stream(spec: DirichletCharacterSpec) -> ThetaTermStream:
    """Half of the twisted theta function: terms ``(n^2, chi(n) n^nu)``."""
    return ThetaTermStream(
        "dirichlet",
        (spec.D,),
        1,
        Fraction(0),
        Fraction(1),
        Growth(Fraction(1), Fraction(spec.nu), 2),
    )


def modular_stream(coefficients: Sequence, count: Optional[int] = None, weight: int = 2) -> ThetaTermStream:
    """``f(it) = sum a(n) exp(-2 pi n t)`` from the first ``count`` q-expansion coefficients."""
    coeffs = list(coefficients if count is None else coefficients[:count])
    if count == 0 or not coeffs:
        raise EmptyStream("no coefficients supplied")
    coeffs = [Fraction(a) for a in coeffs]
    if coeffs[0] != 1:
        raise NotNormalized(f"a(1) must be 1, got {coeffs[0]}")
    # |a(n)| <= d(n) n^((w-1)/2) <= 2 n^(w/2)
    growth = Growth(Fraction(2), Fraction(weight, 2), 1)
    return ThetaTermStream("modular", (tuple(coeffs), weight), 1, Fraction(0), Fraction(4), growth, finite=len(coeffs))


def quad_ideal_stream(D: int, form: tuple[int, int, int], bound=None) -> ThetaTermStream:
    """Ideal-class theta stream of an imaginary quadratic field.

    ``c = 2 Q(x, y) / sqrt(|D|)`` for nonzero lattice points, ``alpha = count / w_K``
    and ``alpha0 = 1 / w_K``.  ``bound`` (in units of ``c``) is only a hint for the
    initial enumeration; the stream extends itself on demand.
    """
    a, b, c = form
    if b * b - 4 * a * c != D:
        raise WrongDiscriminant(f"form {form} has discriminant {b*b - 4*a*c}, not {D}")
    if D >= 0 or not is_fundamental(D):
        raise NotFundamental(f"{D} is not a negative fundamental discriminant")
    if not is_reduced(form):
        raise NotReduced(f"form {form} is not reduced")
    if bound is not None:
        qb = mpf(bound) * mpmath.sqrt(-D) / 2
        if qb < a:
            raise EmptyBound(f"bound {bound} excludes every nonzero lattice point")
    w = unit_count(D)
    stream = ThetaTermStream(
        "ideal",
        (D, tuple(form)),
        2,
        Fraction(1, w),
        Fraction(4, -D),
        Growth(Fraction(2), Fraction(1, 2), 1),
    )
    if bound is not None:
        stream.terms_upto(bound)
    return stream


def truncation_index(stream: ThetaTermStream, t0, threshold) -> tuple[int, mpf]:
    """Smallest prefix length ``M`` whose omitted terms sum to at most ``threshold`` at ``t0``.

    The omitted sum is bounded by the stream's growth majorant, which bounds every
    term past the cutoff index, known or not.
    """
    threshold = mpf(threshold)
    if threshold <= 0:
        raise InvalidParams("threshold must be positive")
    if stream.growth is None:
        raise NoDecayProof(f"{stream.kind} stream has no coefficient growth bound")
    u = mpf(t0) ** (mpf(1) / stream.j)
    k0 = 0
    while True:
        tail = stream.majorant_tail(k0, u)
        if tail <= threshold:
            break
        k0 += 1
        if k0 > 10**6:
            raise NoDecayProof("truncation index search exceeded 10^6 terms")
    qcut = k0**stream.growth.power
    if stream.finite is not None and qcut > stream.finite:
        raise InsufficientTerms(f"need coefficients up to n = {qcut}, only {stream.finite} supplied")
    return len(stream.raw_terms(qcut)), tail


# ---------------------------------------------------------------------------
# q-expansions
# ---------------------------------------------------------------------------


def eta_product(factors: Iterable[tuple[int, int]], count: int, max_digits: int = 10000) -> list[int]:
    """Coefficients ``a(1..count)`` of ``prod (prod_n (1 - q^(d n)))^e`` shifted so ``a(1) = 1``."""
    if count < 1:
        raise InvalidParams("count must be >= 1")
    series = [0] * count
    series[0] = 1
    limit = 10**max_digits
    for d, e in factors:
        if d <= 0 or e <= 0:
            raise InvalidParams(f"eta factor ({d}, {e}) must have positive entries")
        for n in range(1, (count - 1) // d + 1):
            step = d * n
            for _ in range(e):
                for i in range(count - 1, step - 1, -1):
                    series[i] -= series[i - step]
        if any(abs(x) >= limit for x in series):
            raise CoefficientOverflow(f"coefficients exceed {max_digits} digits")
    return series


def load_coefficients_csv(path) -> list[Fraction]:
    """Read ``n,a_n`` rows (1-indexed, no gaps or duplicates) as exact rationals."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CoefficientFileError(f"{path}: empty file") from None
        if header != ["n", "a_n"]:
            raise CoefficientFileError(f"{path}: header must be 'n,a_n', got {','.join(header)}")
        values: dict[int, Fraction] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not x.strip() for x in row):
                continue
            if len(row) != 2:
                raise CoefficientFileError(f"{path}:{lineno}: expected 2 fields")
            try:
                n = int(row[0])
                a = Fraction(row[1].strip())
            except ValueError as exc:
                raise CoefficientFileError(f"{path}:{lineno}: {exc}") from None
            if n in values:
                raise CoefficientFileError(f"{path}:{lineno}: duplicate index {n}")
            values[n] = a
    if not values:
        raise CoefficientFileError(f"{path}: no coefficients")
    if sorted(values) != list(range(1, len(values) + 1)):
        raise CoefficientFileError(f"{path}: indices must be exactly 1..{len(values)}")
    return [values[n] for n in range(1, len(values) + 1)]


def write_coefficients_csv(path, coefficients: Sequence) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "a_n"])
        for n, a in enumerate(coefficients, start=1):
            w.writerow([n, str(a)])
