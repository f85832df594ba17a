"""Central derivatives of L-functions, their saddle-point asymptotics, and Jensen hyperbolicity."""

from .asymptotics import (
    asymptotic_F,
    correction_terms,
    gamma_hat,
    hj_normalizers,
    log_expansion,
    ratio_diagnostics,
    saddle_point,
    two_term_Fhat,
)
from .jensen import (
    RealPolynomial,
    certify_hyperbolic,
    hermite,
    hermite_deviation,
    hyperbolicity_scan,
    jensen_polynomial,
    normalized_jensen,
    sturm_real_root_count,
)
from .lfunction import (
    GammaCache,
    GammaRecord,
    LFamily,
    central_F,
    detect_functional_sign,
    gamma_range,
    lambda_central_derivative,
    make_family,
    taylor_gamma,
    xi_derivative_at_zero,
)
from .numerics import PrecisionContext

__all__ = [
    "GammaCache",
    "GammaRecord",
    "LFamily",
    "PrecisionContext",
    "RealPolynomial",
    "asymptotic_F",
    "central_F",
    "certify_hyperbolic",
    "correction_terms",
    "detect_functional_sign",
    "gamma_hat",
    "gamma_range",
    "hermite",
    "hermite_deviation",
    "hj_normalizers",
    "hyperbolicity_scan",
    "jensen_polynomial",
    "lambda_central_derivative",
    "log_expansion",
    "make_family",
    "normalized_jensen",
    "ratio_diagnostics",
    "saddle_point",
    "sturm_real_root_count",
    "taylor_gamma",
    "two_term_Fhat",
    "xi_derivative_at_zero",
]

__version__ = "0.1.0"
