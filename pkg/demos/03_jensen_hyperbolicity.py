"""
Jensen polynomials and hyperbolicity
====================================

Build Jensen polynomials from gamma(n), certify that all their roots are
real, and watch the normalized versions approach Hermite polynomials.
"""

from mpmath import nstr

from ljensen import (
    PrecisionContext,
    certify_hyperbolic,
    gamma_range,
    hermite_deviation,
    hj_normalizers,
    hyperbolicity_scan,
    jensen_polynomial,
    make_family,
    normalized_jensen,
)

ctx = PrecisionContext.from_digits(40)
chi4 = make_family("dirichlet", D=-4)

# a single degree-3 polynomial at shift n = 20
rows = {r.n: r for r in gamma_range(chi4, 20, 23, ctx)}
J = jensen_polynomial(rows, 3, 20)
print("verdict:", certify_hyperbolic(J, ctx).status)

# after the affine change X -> delta X - A the shape tends to H_d
for n in (100, 1000):
    rows = {r.n: r for r in gamma_range(chi4, n, n + 2, ctx)}
    A, delta = hj_normalizers(chi4, n, ctx)
    with ctx.workprec():
        P = normalized_jensen(jensen_polynomial(rows, 2, n), A, delta)
    print(f"n={n:5d}  coefficients {[nstr(c, 5) for c in P.midpoints()]}  deviation {nstr(hermite_deviation(P, 2), 4)}")

# a small scan; every verdict should be certified hyperbolic
report = hyperbolicity_scan(make_family("zeta"), [2, 3], range(0, 31), PrecisionContext.from_digits(20))
print(len(report.rows), "polynomials checked,", len(report.exceptions), "exceptions,", len(report.unknowns), "undecided")
