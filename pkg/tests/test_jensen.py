import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from ljensen import (
    PrecisionContext,
    RealPolynomial,
    certify_hyperbolic,
    gamma_range,
    hermite,
    hermite_deviation,
    hj_normalizers,
    hyperbolicity_scan,
    jensen_polynomial,
    normalized_jensen,
    sturm_real_root_count,
)
from ljensen.errors import DegreeMismatch, LeadingIntervalContainsZero, MissingRecord
from ljensen.jensen import Status

H = Status.CERTIFIED_HYPERBOLIC
NOT_H = Status.CERTIFIED_NOT_HYPERBOLIC


def P(*coeffs):
    """Exact polynomial, constant term first."""
    return RealPolynomial([Fraction(c) for c in coeffs])


def mul(*factors):
    out = [Fraction(1)]
    for f in factors:
        out = [sum(out[i] * f[k - i] for i in range(len(out)) if 0 <= k - i < len(f)) for k in range(len(out) + len(f) - 1)]
    return RealPolynomial(out)


# construction


def test_jensen_of_constant_sequence():
    assert jensen_polynomial([1, 1, 1], 2, 0).fractions() == [1, 2, 1]


@given(st.lists(st.integers(-50, 50).filter(bool), min_size=2, max_size=6), st.integers(0, 3))
def test_degree_one_is_hyperbolic(seq, n):
    if n + 1 >= len(seq):
        return
    J = jensen_polynomial(seq, 1, n)
    assert J.fractions() == [seq[n], seq[n + 1]]
    assert certify_hyperbolic(J).status == H


def test_missing_record():
    with pytest.raises(MissingRecord):
        jensen_polynomial({0: 1, 1: 1}, 2, 0)


def test_leading_interval_with_zero():
    with pytest.raises(LeadingIntervalContainsZero):
        RealPolynomial([mpf(1), mpf(0), mpf("1e-10")], [0, 0, mpf("1e-9")])


def test_hermite_polynomials():
    assert hermite(0).fractions() == [1]
    assert hermite(1).fractions() == [0, 1]
    assert hermite(2).fractions() == [-2, 0, 1]
    assert hermite(3).fractions() == [0, -6, 0, 1]
    assert hermite(4).fractions() == [12, 0, -12, 0, 1]


def test_hermite_deviation():
    assert hermite_deviation(hermite(3), 3) == 0
    with pytest.raises(DegreeMismatch):
        hermite_deviation(hermite(3), 2)


def test_identity_normalization_is_a_shift():
    # A = 0, delta = 1 maps X to X - 1
    J = P(3, -5, 1, 1)
    with mp.workprec(100):
        N = normalized_jensen(J, 0, 1)
        shifted = [mpf(0)] * 4
        for k, c in enumerate(J.fractions()):
            for i in range(k + 1):
                shifted[i] += int(c) * mpmath.binomial(k, i) * (-1) ** (k - i)
        assert all(abs(a - b) <= r + mpf(10) ** -25 for a, b, r in zip(N.coeffs, shifted, N.radii))


# Sturm counts


def test_sturm_small_cases():
    assert sturm_real_root_count(P(1, 0, 1)) == 0
    assert sturm_real_root_count(P(-2, 0, 1)) == 2
    # (X - 1)^2 (X + 3): two distinct roots
    assert sturm_real_root_count(mul([-1, 1], [-1, 1], [3, 1])) == 2
    assert sturm_real_root_count(P(-2, 0, 1), (0, 2)) == 1


def test_sturm_interval_coefficients():
    p = RealPolynomial([mpf(-2), mpf(0), mpf(1)], [mpf("1e-20")] * 3)
    with mp.workprec(100):
        assert sturm_real_root_count(p) == 2


# certification


def test_certify_double_root():
    v = certify_hyperbolic(P(1, 2, 1))
    assert v.status == H and v.real_root_count == 2


def test_certify_tiny_gap_is_never_hyperbolic():
    ctx = PrecisionContext(working_bits=64, max_escalations=0)
    p = RealPolynomial([mpf("1e-30"), mpf(0), mpf(1)], [mpf("1e-19"), 0, 0])
    assert certify_hyperbolic(p, ctx).status != H
    exact = RealPolynomial([Fraction(1, 10**30), Fraction(0), Fraction(1)])
    assert certify_hyperbolic(exact).status == NOT_H


def test_unknown_only_after_escalation():
    seen = []

    def rebuild(c):
        seen.append(c.working_bits)
        return RealPolynomial([mpf(0), mpf(0), mpf(1)], [mpf("1e-5"), mpf("1e-5"), 0])

    p = RealPolynomial([mpf(0), mpf(0), mpf(1)], [mpf("1e-5"), mpf("1e-5"), 0])
    v = certify_hyperbolic(p, PrecisionContext(working_bits=64, max_escalations=2), rebuild)
    assert v.status == Status.UNKNOWN and v.real_root_count is None
    assert seen == [128, 256]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-10, 10), min_size=4, max_size=5).filter(lambda c: c[-1] != 0))
def test_certified_verdicts_agree_with_dense_roots(coeffs):
    p = RealPolynomial([Fraction(c) for c in coeffs])
    v = certify_hyperbolic(p)
    with mp.workprec(200):
        roots = mpmath.polyroots(list(reversed(coeffs)), maxsteps=2000, extraprec=600)
        real = sum(1 for r in roots if abs(mpmath.im(r)) < mpf(10) ** -20)
    assert (v.status == H) == (real == len(coeffs) - 1)


def test_affine_invariance_of_normalization():
    rng = random.Random(7)
    for _ in range(100):
        roots = [Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(rng.randint(2, 4))]
        factors = [[-r, Fraction(1)] for r in roots]
        if rng.random() < 0.5:
            factors.append([Fraction(rng.randint(1, 9)), Fraction(0), Fraction(1)])
        J = mul(*factors)
        A = mpf(rng.uniform(-5, 5))
        delta = mpf(rng.uniform(0.05, 3))
        with mp.workprec(150):
            N = normalized_jensen(J, A, delta)
        exact = certify_hyperbolic(J).status
        moved = certify_hyperbolic(N, PrecisionContext(working_bits=150)).status
        if len(set(roots)) == len(roots):
            assert moved == exact
        else:
            # a repeated root cannot be certified from interval data, but must not be contradicted
            assert moved in (exact, Status.UNKNOWN)


# table data


def normalized_row(family, ctx, cache, n, d):
    rows = {r.n: r for r in gamma_range(family, n, n + d, ctx, cache)}
    A, delta = hj_normalizers(family, n, ctx)
    with ctx.workprec():
        return normalized_jensen(jensen_polynomial(rows, d, n), A, delta)


def test_chi4_table_rows(chi4, ctx, gamma_cache):
    P2 = normalized_row(chi4, ctx, gamma_cache, 100, 2)
    assert [float(c) for c in P2.coeffs] == pytest.approx([-1.9985, 0.3332, 1], abs=5e-4)
    P3 = normalized_row(chi4, ctx, gamma_cache, 1000, 3)
    assert [float(c) for c in P3.coeffs] == pytest.approx([-0.4414, -5.9847, 0.2839, 1], abs=5e-4)
    assert float(hermite_deviation(P2, 2)) == pytest.approx(0.3332, abs=5e-4)


def test_family_offset_is_needed_for_hermite_limit(chi4, ctx, gamma_cache):
    # dropping the 2 log(2 scale) offset from A(n) spoils convergence to H_d
    devs = {}
    for n in (100, 1000):
        rows = {r.n: r for r in gamma_range(chi4, n, n + 2, ctx, gamma_cache)}
        A, delta = hj_normalizers(chi4, n, ctx)
        with ctx.workprec():
            off = A - 2 * mpmath.log(2 * mpf(chi4.scale.numerator) / chi4.scale.denominator)
            J = jensen_polynomial(rows, 2, n)
            devs[n] = (hermite_deviation(normalized_jensen(J, A, delta), 2), hermite_deviation(normalized_jensen(J, off, delta), 2))
    assert devs[1000][0] < devs[100][0] < 1
    assert devs[1000][1] > 1 and devs[100][1] > 1


def test_chi4_n50_quadratic_is_hyperbolic(chi4, ctx, gamma_cache):
    g = {r.n: r for r in gamma_range(chi4, 50, 52, ctx, gamma_cache)}
    J = jensen_polynomial(g, 2, 50)
    assert certify_hyperbolic(J, ctx).status == H
    with ctx.workprec():
        assert g[51].value ** 2 - g[50].value * g[52].value > 0


# scans


def test_zeta_scan_small(zeta, fast_ctx, gamma_cache):
    report = hyperbolicity_scan(zeta, [2, 3], range(0, 51), fast_ctx, gamma_cache)
    assert len(report.rows) == 102
    assert not report.exceptions and not report.unknowns


def test_chi4_scan_degree_two(chi4, fast_ctx, gamma_cache):
    report = hyperbolicity_scan(chi4, [2], range(0, 101), fast_ctx, gamma_cache)
    assert not report.exceptions and not report.unknowns


def test_empty_scan(zeta, fast_ctx):
    report = hyperbolicity_scan(zeta, [2], [], fast_ctx)
    assert report.rows == []
    assert report.to_csv() == "family,d,n,status,root_count,bits\n"
