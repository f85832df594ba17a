"""Saddle-point asymptotics of ``F(n)``, ``gamma(n)`` and the Hermite-Jensen normalizers.

Conventions: for derivative order ``m`` the integrand
``g(t) = t^(mu-1) (log Q + 2 log t)^m exp(-pi c t^(1/j))`` peaks at ``t = a`` with
``L = log Q + 2 log a``.  ``C`` is the curvature of ``log g(a(1+lambda))`` at
``lambda = 0``, so ``g(a(1+lambda))/g(a) = exp(-C lambda^2/2)(1 + A_3 lambda^3 + ...)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
from mpmath import mp, mpf

from .errors import InvalidParams, NegativeRadicand, NonpositiveCurvature, ShiftTooLarge
from .lfunction import LFamily
from .numerics import PrecisionContext, factorial_ratio, solve_saddle_equation, to_mpf

_DEFAULT_CTX = PrecisionContext()


@dataclass(frozen=True)
class SaddlePoint:
    m: int
    L: mpf
    a: mpf
    C: mpf
    eps_var: mpf
    decay_term: mpf  # pi c_min a^(1/j)


@dataclass(frozen=True)
class CorrectionSeries:
    A: dict
    C: mpf
    order: int
    factor: mpf


def saddle_point(family: LFamily, m: int, ctx: PrecisionContext = _DEFAULT_CTX) -> SaddlePoint:
    if m < 1:
        raise InvalidParams("saddle point needs m >= 1")
    with mp.workprec(ctx.internal_bits):
        A, B, jp = family.saddle_constants()
        L = solve_saddle_equation(A, B, jp, m, ctx)
        j = family.j
        a = mpmath.exp((L - mpmath.log(to_mpf(family.Q))) / 2)
        w = mpmath.pi * family.c_min * (a if j == 1 else mpmath.root(a, j))
        eps = 1 / L
        mu1 = to_mpf(family.mu) - 1
        # h_2 = -m(eps + 2 eps^2) - (mu-1)/2 - w binom(1/j, 2)
        h2 = -m * (eps + 2 * eps**2) - mu1 / 2 - w * (mpf(1) / j) * (mpf(1) / j - 1) / 2
        C = -2 * h2
    with mp.workprec(ctx.working_bits):
        return SaddlePoint(m, +L, +a, +C, +eps, +w)


# truncated power series in lambda, coefficient lists starting at lambda^0


def _mul(x, y, R):
    out = [mpf(0)] * (R + 1)
    for i, xi in enumerate(x):
        if xi == 0:
            continue
        for k in range(0, R + 1 - i):
            out[i + k] += xi * y[k]
    return out


def _log1p_series(x, R):
    """``log(1 + x)`` for a series with ``x[0] = 0``."""
    out = [mpf(0)] * (R + 1)
    power = [mpf(1)] + [mpf(0)] * R
    for k in range(1, R + 1):
        power = _mul(power, x, R)
        sign = 1 if k % 2 else -1
        for i in range(R + 1):
            out[i] += sign * power[i] / k
    return out


def _exp_series(x, R):
    """``exp(x)`` for a series with ``x[0] = 0``."""
    out = [mpf(1)] + [mpf(0)] * R
    for k in range(1, R + 1):
        out[k] = mpmath.fsum(i * x[i] * out[k - i] for i in range(1, k + 1)) / k
    return out


def log_expansion(family: LFamily, sp: SaddlePoint, order: int) -> list[mpf]:
    """Coefficients ``h_0..h_order`` of ``log g(a(1+lambda)) - log g(a)``.

    ``h_1`` vanishes at the saddle and ``h_2 = -C/2``.
    """
    if order < 2:
        raise InvalidParams("order must be >= 2")
    R = order
    j = family.j
    ell = [mpf(0)] + [mpf((-1) ** (i + 1)) / i for i in range(1, R + 1)]
    x = [2 * sp.eps_var * c for c in ell]
    h = [sp.m * c for c in _log1p_series(x, R)]
    mu1 = to_mpf(family.mu) - 1
    for i in range(1, R + 1):
        h[i] += mu1 * ell[i] - sp.decay_term * mpmath.binomial(mpf(1) / j, i)
    h[0] = mpf(0)
    return h


def correction_terms(logcoeffs, order: int) -> CorrectionSeries:
    """Exponentiate the cubic-and-higher part and resum ``1 + sum (2i-1)!! A_2i / C^i``."""
    R = 2 * order
    if len(logcoeffs) < R + 1:
        raise InvalidParams(f"need log coefficients through lambda^{R}")
    C = -2 * logcoeffs[2]
    x = [mpf(0)] * 3 + [mpf(c) for c in logcoeffs[3 : R + 1]]
    E = _exp_series(x, R)
    A = {i: E[i] for i in range(3, R + 1)}
    factor = mpf(1)
    for i in range(2, order + 1):
        factor += mpf(math.prod(range(1, 2 * i, 2))) * A[2 * i] / C**i
    return CorrectionSeries(A, C, order, factor)


def printed_A(m, eps, k) -> dict:
    """Closed forms of ``A_3..A_6`` as printed in the source derivation (j = 1 families)."""
    m, e, k = mpf(m), mpf(eps), mpf(k)
    A3 = 2 * m * (e / 3 + e**2 + 4 * e**3 / 3) + k / 6 - mpf(1) / 3
    A4 = -m * (e / 2 + 11 * e**2 / 6 + 4 * e**3 + 4 * e**4) - k / 8 + mpf(1) / 4
    A5 = m * (2 * e / 5 + 5 * e**2 / 3 + 14 * e**3 / 3 + 8 * e**4 + 32 * e**5 / 5) + k / 10 - mpf(1) / 5
    A6 = (
        m**2 * (2 * e**2 / 9 + 4 * e**3 / 3 + 34 * e**4 / 9 + 16 * e**5 / 3 + 32 * e**6 / 9)
        + (k**2 - 7 * k + 10) / 36
        + m
        * (
            (10 * k - 50) * e / 90
            + (30 * k - 197) * e**2 / 90
            + (40 * k - 530) * e**3 / 90
            - 34 * e**4 / 3
            - 16 * e**5
            - 32 * e**6 / 3
        )
    )
    return {3: A3, 4: A4, 5: A5, 6: A6}


def corrected_A6(m, eps, k) -> mpf:
    """``A_6`` from ``A_3^2/2 + B_6`` with the exact sixth log coefficient (j = 1)."""
    m, e, k = mpf(m), mpf(eps), mpf(k)
    A3 = 2 * m * (e / 3 + e**2 + 4 * e**3 / 3) + k / 6 - mpf(1) / 3
    # sixth coefficient of m log(1 + 2e log(1+x)) + (k/2 - 1) log(1+x)
    B6 = m * (-e / 3 - 137 * e**2 / 90 - 5 * e**3 - 34 * e**4 / 3 - 16 * e**5 - 32 * e**6 / 3) - (k / 2 - 1) / 6
    return A3**2 / 2 + B6


def _prefactor_log(family: LFamily, sp: SaddlePoint, n: int) -> mpf:
    """``log`` of ``alpha c0 scale^n (1 + (-1)^n eps) a^mu e^(-pi c a^(1/j)) L^n sqrt(2 pi / C)``."""
    parity = 1 + (-1) ** n * family.eps
    return (
        mpmath.log(abs(to_mpf(family.alpha_min)) * family.c0 * parity)
        + n * mpmath.log(to_mpf(family.scale))
        + to_mpf(family.mu) * mpmath.log(sp.a)
        - sp.decay_term
        + n * mpmath.log(sp.L)
        + mpmath.log(2 * mpmath.pi / sp.C) / 2
    )


def _parity_zero(family: LFamily, n: int) -> bool:
    return 1 + (-1) ** n * family.eps == 0


def asymptotic_F(family: LFamily, n: int, order: int = 2, ctx: PrecisionContext = _DEFAULT_CTX) -> mpf:
    """Saddle-point value ``a g(a) sqrt(2 pi/C) (1 + 3A_4/C^2 + ...)`` truncated at ``A_2r``."""
    if n < 1:
        raise InvalidParams("n must be >= 1")
    if _parity_zero(family, n):
        return mpf(0)
    sp = saddle_point(family, n, ctx)
    if sp.C <= 0:
        raise NonpositiveCurvature(f"C = {mpmath.nstr(sp.C, 5)} <= 0 at n = {n}")
    with mp.workprec(ctx.internal_bits):
        corr = correction_terms(log_expansion(family, sp, 2 * order), order)
        sign = 1 if family.alpha_min > 0 else -1
        value = sign * mpmath.exp(_prefactor_log(family, sp, n)) * corr.factor
    with mp.workprec(ctx.working_bits):
        return +value


def b1(L, variant: str = "family") -> mpf:
    """First correction coefficient; ``family`` is the variant that reproduces the numeric tables."""
    L = mpf(L)
    if variant == "family":
        return (L**4 + 9 * L**3 + 32 * L**2 + 24 * L + 16) / (24 * (L + 2) ** 3)
    if variant == "general":
        return 2 * (31 * L**4 + 189 * L**3 + 542 * L**2 + 744 * L + 496) / (3 * (L + 2) ** 3)
    raise InvalidParams(f"unknown b1 variant {variant!r}")


def two_term_Fhat(
    family: LFamily, n: int, variant: str = "family", ctx: PrecisionContext = _DEFAULT_CTX
) -> mpf:
    """Leading saddle term times ``(1 + b_1/n)``."""
    if n < 1:
        raise InvalidParams("n must be >= 1")
    if _parity_zero(family, n):
        return mpf(0)
    sp = saddle_point(family, n, ctx)
    if sp.C <= 0:
        raise NonpositiveCurvature(f"C = {mpmath.nstr(sp.C, 5)} <= 0 at n = {n}")
    with mp.workprec(ctx.internal_bits):
        sign = 1 if family.alpha_min > 0 else -1
        value = sign * mpmath.exp(_prefactor_log(family, sp, n)) * (1 + b1(sp.L, variant) / n)
    with mp.workprec(ctx.working_bits):
        return +value


def gamma_hat(family: LFamily, n: int, variant: str = "family", ctx: PrecisionContext = _DEFAULT_CTX) -> mpf:
    """``(n!/m!) Fhat(m)`` with ``m = m_map(n)``."""
    if n < 2:
        raise InvalidParams("n must be >= 2")
    m = family.m_map(n)
    Fh = two_term_Fhat(family, m, variant, ctx)
    with mp.workprec(ctx.internal_bits):
        value = factorial_ratio(n, m) * Fh
    with mp.workprec(ctx.working_bits):
        return +value


def hj_normalizers(family: LFamily, n: int, ctx: PrecisionContext = _DEFAULT_CTX) -> tuple[mpf, mpf]:
    """``(A(n), delta(n))`` so that ``log(gamma(n+j)/gamma(n)) ~ A j - delta^2 j^2``."""
    m = family.m_map(n)
    if m < 1:
        raise InvalidParams(f"n = {n} gives derivative order {m} < 1")
    sp = saddle_point(family, m, ctx)
    with mp.workprec(ctx.internal_bits):
        L, C = sp.L, sp.C
        A = (
            mpmath.log(n * L**2 / (4 * mpf(m) ** 2))
            + 2 * mpmath.log(2 * to_mpf(family.scale))
            + 2 * (L - 2) / (C * L**2)
            + 8 * m * (L + 4) / (C**2 * L**4)
        )
        rad = mpf(2) / m - mpf(1) / (2 * n) - 8 / (C * L**2)
        if rad <= 0:
            raise NegativeRadicand(f"delta^2 = {mpmath.nstr(rad, 5)} <= 0 at n = {n}")
        delta = mpmath.sqrt(rad)
    with mp.workprec(ctx.working_bits):
        return +A, +delta


@dataclass(frozen=True)
class RatioDiagnostics:
    ell1: mpf
    ell2: mpf
    c1: mpf
    g1: mpf
    g2: mpf
    g2_printed: mpf
    R_gamma: mpf
    L: mpf
    C: mpf

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def ratio_diagnostics(
    family: LFamily, n: int, jshift: int, variant: str = "family", ctx: PrecisionContext = _DEFAULT_CTX
) -> RatioDiagnostics:
    """Closed-form ratio coefficients and the product ``R_gamma(j; m) = gammahat(n+j)/gammahat(n)``.

    The printed forms use the quarter-scale curvature ``Cq = C/4``.
    """
    m = family.m_map(n)
    if not 1 <= jshift < m / 2:
        raise ShiftTooLarge(f"need 1 <= j < m/2 = {m / 2}, got j = {jshift}")
    sp = saddle_point(family, m, ctx)
    sp2 = saddle_point(family, m + 2 * jshift, ctx)
    with mp.workprec(ctx.internal_bits):
        L, Cq = sp.L, sp.C / 4
        k = 2 * to_mpf(family.mu)
        s2 = 2 * to_mpf(family.scale)
        ell1 = 2 / (Cq * L**2)
        ell2 = -(L / 2 + 2) * (m + k * L / 4 - L / 2) / (Cq**3 * L**5)
        c1 = (L + 2) / (Cq * L**2) - m * (L + 4) / (Cq**2 * L**4)
        g1 = (
            mpmath.log(n * L**2 / (4 * mpf(m) ** 2))
            + 2 * mpmath.log(s2)
            + (L - 2) / (2 * Cq * L**2)
            + m * (L + 4) / (2 * Cq**2 * L**4)
        )
        g2 = -mpf(2) / m + mpf(1) / (2 * n) + 2 / (Cq * L**2)
        g2_printed = -mpf(2) / m + 4 / (Cq * L**2)

        j, nn, mm = jshift, mpf(n), mpf(m)
        calL = sp2.L / L
        calC = sp2.C / sp.C
        calB = (1 + b1(sp2.L, variant) / (mm + 2 * j)) / (1 + b1(L, variant) / mm)
        jr = family.j
        R = (
            mpmath.e**j * nn**j * L ** (2 * j) * s2 ** (2 * j) / (2 ** (2 * j) * mm ** (2 * j))
            * ((nn + j) / nn) ** (nn + j + mpf(1) / 2)
            / ((mm + 2 * j) / mm) ** (mm + 2 * j + mpf(1) / 2)
            * (1 + 1 / (12 * (nn + j))) * (1 + 1 / (12 * mm))
            / ((1 + 1 / (12 * nn)) * (1 + 1 / (12 * (mm + 2 * j))))
            * calL ** (mm + 2 * j) / mpmath.sqrt(calC)
            * mpmath.exp(k * L / 4 * (calL - 1) - 2 * jr * (mm + 2 * j) / (calL * L) + 2 * jr * mm / L)
            * calB
        )
    with mp.workprec(ctx.working_bits):
        return RatioDiagnostics(+ell1, +ell2, +c1, +g1, +g2, +g2_printed, +R, +L, +sp.C)
