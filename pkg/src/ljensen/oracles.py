"""Independent reference computations used to cross-check the main pipeline.

None of these share code paths with the quadrature: ``F(n)`` is rebuilt term
by term from incomplete-gamma series, and the constants come from classical
series and AGM identities.
"""

from __future__ import annotations

import math

import mpmath
from mpmath import mp, mpf

from .lfunction import LFamily
from .numerics import to_mpf


def _gamma_derivatives(s, n: int) -> list[mpf]:
    """``Gamma^(i)(s)`` for ``i <= n`` from ``Gamma' = Gamma psi``."""
    psi = [mpmath.polygamma(k, s) for k in range(n)]
    G = [mpmath.gamma(s)]
    for i in range(n):
        G.append(mpmath.fsum(math.comb(i, l) * G[l] * psi[i - l] for l in range(i + 1)))
    return G


def _term_integral(c, s, j: int, w0, n: int, G) -> mpf:
    """``int_{t0}^inf e^(-pi c t^(1/j)) t^(mu-1) (2 log(t/t0))^n dt`` via ``w = pi c t^(1/j)``."""
    lw0 = mpmath.log(w0)
    full = mpmath.fsum(math.comb(n, i) * (-lw0) ** (n - i) * G[i] for i in range(n + 1))
    # int_0^{w0} w^(s-1) e^(-w) log(w/w0)^n dw as a power series in w0
    sign = (-1) ** n * math.factorial(n)
    head = mpf(0)
    term = mpf(1)
    k = 0
    tol = mpf(2) ** (-mp.prec - 10)
    while True:
        piece = term * sign / (s + k) ** (n + 1)
        head += piece
        if k > w0 and abs(piece) < tol * abs(head):
            break
        k += 1
        term *= -w0 / k
    K = full - w0**s * head
    return j * (mpmath.pi * c) ** (-s) * (2 * j) ** n * K


def termwise_F(family: LFamily, n: int, prec: int = 256) -> mpf:
    """``F(n)`` summed over stream terms, each integrated in closed form."""
    parity = 1 + (-1) ** n * family.eps
    if parity == 0:
        return mpf(0)
    with mp.workprec(prec):
        j = family.j
        s = j * to_mpf(family.mu)
        u0 = family.t0 ** (mpf(1) / j)
        total = mpf(0)
        for stream in family.streams:
            qmax = 64
            while True:
                # stop once exp(-pi c u0) falls below 2^-prec relative to the first term
                cut = stream.c_of(qmax) - stream.c_min
                if mpmath.pi * cut * u0 > prec * math.log(2) + 40 or (
                    stream.finite is not None and qmax >= stream.finite
                ):
                    break
                qmax *= 2
            terms = stream.raw_terms(qmax)
            w0max = mpmath.pi * stream.c_of(terms[-1][0]) * u0
            G = None
            with mp.workprec(prec + int(1.45 * float(w0max)) + 32):
                G = _gamma_derivatives(s, n)
                for q, a in terms:
                    c = stream.c_of(q)
                    w0 = mpmath.pi * c * u0
                    total += to_mpf(a) * _term_integral(c, s, j, w0, n, G)
        return family.c0 * to_mpf(family.scale) ** n * parity * total


def zeta_half(prec: int = 256) -> mpf:
    """``zeta(1/2)`` from the alternating eta series with Cohen-Villegas-Zagier acceleration."""
    with mp.workprec(prec + 20):
        n = int(prec * 0.45) + 10
        d = (3 + mpmath.sqrt(8)) ** n
        d = (d + 1 / d) / 2
        b, c = mpf(-1), -d
        total = mpf(0)
        for k in range(n):
            c = b - c
            total += c / mpmath.sqrt(k + 1)
            b = b * (k + n) * (k - n) / ((k + mpf(1) / 2) * (k + 1))
        eta = total / d
        return eta / (1 - mpmath.sqrt(2))


def gamma_quarter(prec: int = 256) -> mpf:
    """``Gamma(1/4) = sqrt(2 varpi sqrt(2 pi))`` with ``varpi = pi / agm(1, sqrt 2)``."""
    with mp.workprec(prec + 20):
        varpi = mpmath.pi / mpmath.agm(1, mpmath.sqrt(2))
        return mpmath.sqrt(2 * varpi * mpmath.sqrt(2 * mpmath.pi))


def lambda_zeta_half(prec: int = 256) -> mpf:
    """``pi^(-1/4) Gamma(1/4) zeta(1/2)``."""
    with mp.workprec(prec + 20):
        return mpmath.pi ** (-mpf(1) / 4) * gamma_quarter(prec) * zeta_half(prec)
