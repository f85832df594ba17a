"""Precision contract, saddle-equation solver and certified quadrature.

All arbitrary-precision values are :class:`mpmath.mpf`.  mpf exponents are
unbounded, so magnitudes such as ``1e-384416`` never underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import mpmath
from mpmath import mp, mpf

from .errors import BadBracket, InvalidParams, NoConvergence, PrecisionInsufficient

BigReal = mpf


@dataclass(frozen=True)
class PrecisionContext:
    working_bits: int = 216
    guard_bits: int = 16
    max_escalations: int = 2

    def __post_init__(self):
        if self.working_bits < 64:
            raise InvalidParams(f"working_bits must be >= 64, got {self.working_bits}")
        if self.guard_bits < 16:
            raise InvalidParams(f"guard_bits must be >= 16, got {self.guard_bits}")
        if self.max_escalations < 0:
            raise InvalidParams("max_escalations must be >= 0")

    @classmethod
    def from_digits(cls, digits: int, guard_bits: int = 16, max_escalations: int = 2):
        if digits < 10:
            raise InvalidParams(f"digits must be >= 10, got {digits}")
        bits = math.ceil(digits * 3.33) + guard_bits
        return cls(working_bits=bits, guard_bits=guard_bits, max_escalations=max_escalations)

    @property
    def internal_bits(self) -> int:
        return self.working_bits + self.guard_bits

    def escalate(self) -> "PrecisionContext":
        """Return a context with doubled working precision and one fewer escalation."""
        return replace(
            self,
            working_bits=2 * self.working_bits,
            max_escalations=max(self.max_escalations - 1, 0),
        )

    def workprec(self, extra: int = 0):
        return mp.workprec(self.working_bits + extra)

    def eps(self) -> mpf:
        """Unit roundoff at working precision, ``2**-working_bits``."""
        return mpf(2) ** (-self.working_bits)


def to_mpf(x) -> mpf:
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    return mpf(x)


def exact_ratio(num: int, den: int) -> mpf:
    """Correctly rounded ``num/den`` for (possibly huge) exact integers."""
    return mpmath.fdiv(num, den)


def factorial_ratio(n: int, m: int) -> mpf:
    """``n!/m!`` formed over exact integers, rounded once at the end."""
    if n >= m:
        return mpf(math.prod(range(m + 1, n + 1)))
    return exact_ratio(1, math.prod(range(n + 1, m + 1)))


# ---------------------------------------------------------------------------
# saddle equation  n = (A e^{L/j} + B) L
# ---------------------------------------------------------------------------


def lambert_guess(A, j, n) -> mpf:
    """Leading Lambert-W asymptotics of the root of ``A e^{L/j} L = n``."""
    x = n / (A * j)
    if x > mpmath.e:
        lx = mpmath.log(x)
        return j * mpmath.log(x / lx) if x / lx > 1 else j * lx / 2
    return mpf(1)


def solve_saddle_equation(A, B, j, n, ctx: PrecisionContext, max_iter: int = 400) -> mpf:
    """Positive root ``L`` of ``n = (A*exp(L/j) + B)*L``.

    The residual is convex in ``L`` and negative at ``L = 0``, so the positive
    root is unique.  Newton steps start from the Lambert-W guess and fall back to
    bisection whenever they leave the current bracket.
    """
    j = to_mpf(j) if isinstance(j, Fraction) else j
    with mp.workprec(ctx.internal_bits + 16):
        A, B, j, n = to_mpf(A), to_mpf(B), to_mpf(j), to_mpf(n)
        if A <= 0 or j <= 0 or n <= 0:
            raise InvalidParams(f"need A > 0, j > 0, n > 0 (got A={A}, j={j}, n={n})")

        def phi(L):
            return (A * mpmath.exp(L / j) + B) * L - n

        def dphi(L):
            e = A * mpmath.exp(L / j)
            return e * (1 + L / j) + B

        lo = mpf(0)
        hi = max(lambert_guess(A, j, n), mpf(1))
        for _ in range(4000):
            if phi(hi) > 0:
                break
            lo = hi
            hi *= 2
        else:
            raise NoConvergence("could not bracket the saddle root")

        tol = n * mpf(2) ** (-(ctx.working_bits + 4))
        L = min(max(lambert_guess(A, j, n), lo), hi)
        if not lo < L < hi:
            L = (lo + hi) / 2
        for _ in range(max_iter):
            f = phi(L)
            if abs(f) <= tol:
                break
            if f < 0:
                lo = L
            else:
                hi = L
            d = dphi(L)
            step = L - f / d if d > 0 else lo - 1
            L = step if lo < step < hi else (lo + hi) / 2
        else:
            raise NoConvergence(f"saddle solver did not converge for n={n}")
    with mp.workprec(ctx.working_bits):
        return +L


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def gauss_legendre(order: int, prec: int) -> tuple[tuple[mpf, ...], tuple[mpf, ...]]:
    """Nodes and weights on [-1, 1], computed by Newton iteration on P_order."""
    with mp.workprec(prec + 20):
        nodes, weights = [], []
        for i in range(1, order + 1):
            x = mpmath.cos(mpmath.pi * (i - mpf(1) / 4) / (order + mpf(1) / 2))
            for _ in range(100):
                p0, p1 = mpf(1), x
                for k in range(2, order + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = order * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < mpf(2) ** (-(prec + 10)):
                    break
            p0, p1 = mpf(1), x
            for k in range(2, order + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = order * (x * p1 - p0) / (x * x - 1)
            nodes.append(x)
            weights.append(2 / ((1 - x * x) * dp * dp))
    with mp.workprec(prec):
        return tuple(+x for x in nodes), tuple(+w for w in weights)


@dataclass(frozen=True)
class Decay:
    """Majorant ``|g(t)| <= K exp(-pi c t^(1/j)) t^power (log Q + 2 log t)^n``.

    Valid for ``t`` beyond the integration window; used for the analytic tail.
    """

    amplitude: mpf
    rate: mpf
    root: int = 1
    power: mpf = mpf(0)
    log_base: mpf = mpf(1)
    log_power: int = 0

    def tail(self, T) -> mpf:
        """Upper bound for the majorant's integral over ``[T, inf)``.

        Substituting ``u = t^(1/j)`` and using ``u^s <= U^s (u/U)^max(s,0)`` and
        ``log(ell(u)/ell(U)) <= 2 j log(u/U) / ell(U)`` reduces the tail to a pure
        exponential once ``(u/U)^sigma <= exp(sigma (u - U)/U)``.
        """
        j = self.root
        U = mpf(T) ** (mpf(1) / j)
        s = j * self.power + j - 1
        sigma = max(s, mpf(0))
        factor = mpf(1)
        if self.log_power:
            ell = mpmath.log(self.log_base) + 2 * mpmath.log(T)
            if ell <= 0:
                return mpmath.inf
            sigma += 2 * j * self.log_power / ell
            factor = ell ** self.log_power
        rate = mpmath.pi * self.rate - sigma / U
        if rate <= 0:
            return mpmath.inf
        return self.amplitude * j * U ** s * factor * mpmath.exp(-mpmath.pi * self.rate * U) / rate


GL_ORDER = 24
MAX_REFINEMENTS = 7


def _panel_sum(G, lo, hi, panels, nodes, weights):
    h = (hi - lo) / panels
    half = h / 2
    total = mpf(0)
    abs_total = mpf(0)
    for p in range(panels):
        mid = lo + (p + mpf(1) / 2) * h
        for x, w in zip(nodes, weights):
            val = G(mid + half * x)
            total += w * val
            abs_total += w * abs(val)
    return total * half, abs_total * half


def quadrature_decaying(
    integrand: Callable[[mpf], mpf],
    t0,
    peak_hint,
    rel_err,
    ctx: PrecisionContext,
    decay: Optional[Decay] = None,
    tail_bound: Optional[Callable[[mpf], mpf]] = None,
    eval_rel_err=None,
) -> tuple[mpf, mpf]:
    """Integrate a smooth single-peaked, exponentially decaying function on ``[t0, inf)``.

    The substitution ``t = a e^v`` (``a = peak_hint``) is integrated with a
    composite Gauss-Legendre rule on a window that is widened until the
    integrand drops below ``2**-bits`` of its peak.  The error bound is the sum of
    the two-mesh difference, the analytic tail beyond the window (from ``decay``
    or ``tail_bound``), the unimodal bound for any skipped left piece, and the
    relative evaluation error ``eval_rel_err`` times ``int |g|``.

    Returns ``(value, bound)`` with ``bound <= rel_err * |value|``.
    """
    if decay is None and tail_bound is None:
        raise InvalidParams("a decay majorant or tail_bound callable is required")
    tail = tail_bound if tail_bound is not None else decay.tail
    wp = ctx.internal_bits
    with mp.workprec(wp):
        t0 = to_mpf(t0)
        a = to_mpf(peak_hint)
        rel_err = to_mpf(rel_err)
        if t0 <= 0:
            raise InvalidParams("t0 must be positive")
        if a < t0:
            raise BadBracket(f"peak hint {a} lies below the lower limit {t0}")
        if rel_err < mpf(2) ** (-(ctx.working_bits - 4)):
            raise PrecisionInsufficient(
                f"rel_err {mpmath.nstr(rel_err, 3)} is below what {ctx.working_bits} bits support"
            )
        eval_err = to_mpf(eval_rel_err) if eval_rel_err is not None else mpf(2) ** (-ctx.working_bits)

        def G(v):
            t = a * mpmath.exp(v)
            return t * integrand(t)

        g0 = G(mpf(0))
        if g0 == 0:
            raise BadBracket("integrand vanishes at the peak hint")
        cutoff = abs(g0) * mpf(2) ** (-wp)
        vmin = mpmath.log(t0 / a)

        v_hi = mpf(1) / 4
        for _ in range(200):
            if abs(G(v_hi)) <= cutoff and tail(a * mpmath.exp(v_hi)) <= cutoff / 16:
                break
            v_hi *= mpf(5) / 4
        else:
            raise PrecisionInsufficient("could not find a right cutoff with a finite tail bound")
        right_tail = tail(a * mpmath.exp(v_hi))

        left_bound = mpf(0)
        v_lo = vmin
        if vmin < 0:
            v = -mpf(1) / 4
            while v > vmin and abs(G(v)) > cutoff:
                v *= mpf(5) / 4
            if v > vmin:
                v_lo = v
                left_bound = (v_lo - vmin) * abs(G(v_lo))

        d = mpf(1) / 64
        lg0 = mpmath.log(abs(g0))
        lp = mpmath.log(abs(G(d)) or cutoff)
        if -d >= vmin:
            lm = mpmath.log(abs(G(-d)) or cutoff)
            curv = abs(lp - 2 * lg0 + lm) / (d * d)
            slope = abs(lp - lm) / (2 * d)
        else:
            slope = abs(lp - lg0) / d
            curv = mpf(0)
        scale = max(curv, slope * slope, mpf(1))
        h0 = min(mpf(1) / 2, 2 / mpmath.sqrt(scale))
        panels = max(1, int(mpmath.ceil((v_hi - v_lo) / h0)))

        nodes, weights = gauss_legendre(GL_ORDER, wp)
        q1, _ = _panel_sum(G, v_lo, v_hi, panels, nodes, weights)
        q2, abs2 = _panel_sum(G, v_lo, v_hi, 2 * panels, nodes, weights)
        diff = abs(q2 - q1)
        for _ in range(MAX_REFINEMENTS):
            if diff <= rel_err * abs(q2) / 8:
                break
            panels *= 2
            q1 = q2
            q2, abs2 = _panel_sum(G, v_lo, v_hi, 2 * panels, nodes, weights)
            diff = abs(q2 - q1)
        rounding = abs2 * mpf(2) ** (-(wp - int(math.log2(2 * panels * GL_ORDER + 1)) - 5))
        bound = diff + right_tail + left_bound + eval_err * abs2 + rounding
        if bound > rel_err * abs(q2):
            raise PrecisionInsufficient(
                f"quadrature bound {mpmath.nstr(bound / abs(q2), 3)} exceeds rel_err "
                f"{mpmath.nstr(rel_err, 3)}"
            )
    with mp.workprec(ctx.working_bits):
        return +q2, +bound
