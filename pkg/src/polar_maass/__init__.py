"""Numerical elliptic Poincare series on the modular curve.

Evaluates the weight-2k meromorphic elliptic Poincare series and its
weight-(2-2k) polar harmonic counterpart, extracts elliptic-expansion
coefficients by circle quadrature, applies the connecting differential
operators numerically and in closed form, and machine-checks the
identities relating the two families, including the coefficient duality
between them.
"""

from .expansions import EllipticExpansion, ExtractionParams, elliptic_eval, extract_expansion
from .geometry import UnimodularMatrix, enumerate_sl2, reduce_to_fundamental_domain
from .numeric import (
    ConvergenceError,
    DivergenceError,
    GammaPoleError,
    IllConditionedError,
    NumericError,
    PoleCollisionError,
)
from .operators import FieldSample, StencilParams
from .series import (
    EvalResult,
    SeriesKind,
    SeriesSpec,
    TruncationParams,
    eval_p,
    eval_psi,
    phi_summand,
    psi_summand,
)
from .verify import (
    CheckReport,
    check_duality,
    check_identity_suite,
    check_operator_theorem,
    convergence_study,
    duality_suite,
)

__version__ = "0.1.0"

__all__ = [
    "EllipticExpansion",
    "ExtractionParams",
    "elliptic_eval",
    "extract_expansion",
    "UnimodularMatrix",
    "enumerate_sl2",
    "reduce_to_fundamental_domain",
    "NumericError",
    "DivergenceError",
    "GammaPoleError",
    "ConvergenceError",
    "PoleCollisionError",
    "IllConditionedError",
    "FieldSample",
    "StencilParams",
    "SeriesKind",
    "SeriesSpec",
    "TruncationParams",
    "EvalResult",
    "eval_psi",
    "eval_p",
    "psi_summand",
    "phi_summand",
    "CheckReport",
    "check_identity_suite",
    "check_operator_theorem",
    "check_duality",
    "duality_suite",
    "convergence_study",
    "__version__",
]
