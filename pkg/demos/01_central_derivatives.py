"""
Central derivatives and Taylor coefficients
===========================================

Compute F(n), the n-th derivative of a completed L-function at the centre,
and the Taylor coefficients gamma(n) of its Riemann-Xi style companion.
"""

from mpmath import nstr

from ljensen import PrecisionContext, central_F, gamma_range, make_family

# 40 decimal digits is plenty for moderate n
ctx = PrecisionContext.from_digits(40)

# the Dirichlet L-function of the character mod 4
chi4 = make_family("dirichlet", D=-4)

# odd derivatives vanish by the functional equation
for n in range(6):
    value, bound = central_F(chi4, n, ctx)
    print(f"F({n}) = {nstr(value, 20):>28}   error <= {nstr(bound, 3)}")

# gamma(n) comes with a rigorous error bound
for rec in gamma_range(chi4, 8, 12, ctx):
    print(rec.n, nstr(rec.value, 15), nstr(rec.error_bound, 3))

# the zeta function has a pole, which the theta integral handles separately
zeta = make_family("zeta")
print("zeta gamma(1..4):", [nstr(r.value, 12) for r in gamma_range(zeta, 1, 4, ctx)])
