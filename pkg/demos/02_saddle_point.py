"""
Saddle-point asymptotics
========================

Compare the exact central derivative with its saddle-point approximation
as the derivative order m grows.
"""

from mpmath import nstr

from ljensen import PrecisionContext, asymptotic_F, central_F, gamma_hat, gamma_range, make_family, saddle_point

ctx = PrecisionContext.from_digits(40)
chi4 = make_family("dirichlet", D=-4)

# the saddle L solves the stationarity equation; C is the curvature there
for m in (20, 200, 2000):
    sp = saddle_point(chi4, m, ctx)
    print(f"m={m:5d}  L={nstr(sp.L, 12)}  C={nstr(sp.C, 12)}")

# relative error of the order-2 and order-3 expansions
for m in (20, 200, 2000):
    F = central_F(chi4, m, ctx)[0]
    errs = [abs(asymptotic_F(chi4, m, r, ctx) / F - 1) for r in (2, 3)]
    print(f"m={m:5d}  order 2: {nstr(errs[0], 3):>10}  order 3: {nstr(errs[1], 3):>10}")

# gamma_hat tracks gamma(n) ever more closely
for n in (10, 100, 1000):
    g = gamma_range(chi4, n, n, ctx)[0].value
    print(f"n={n:5d}  gamma/gamma_hat = {nstr(g / gamma_hat(chi4, n, ctx=ctx), 15)}")
