"""Ladder transform of the cumulative Hardy Z^2 integral.

The package computes the Riemann-Siegel phase and Hardy's Z, maintains a
persistent cache of the cumulative integral of Z^2, solves the transcendental
ladder equation and its inverse/iterates, lifts orthogonal systems along the
ladder orbit, and verifies the resulting change-of-variable identities and
moment scalings by adaptive quadrature.
"""

from .errors import (AccuracyError, BelowThresholdError, CacheExhaustedError,
                     CacheFormatError, ConsistencyError, ConvergenceError,
                     DomainError, EvaluationError, SingularPointError,
                     StorageError, ZetaLadderError)
from .zeta import ZValue, hardy_z, theta, theta_array, z_array
from .quadrature import QuadResult, integrate
from .cache import (CumulativeCache, build_cache, hl_integral,
                    hl_integral_array, load_cache, save_cache)
from .ladder import (DEFAULT_CONFIG, GapReport, IterSeq, LadderConfig,
                     LadderPoint, forward_iterate, gap_stats, hl_asymptotic,
                     hl_asymptotic_prime, omega, omega_array, phi1,
                     phi1_array, phi1_inverse, phi1_prime, phi1_prime_array,
                     reverse_iterate)
from .ortho import (BesselSystem, CustomSystem, FourierSystem, JacobiSystem,
                    LiftedSystem, base_eval, base_norm, bessel_j, bessel_zero,
                    jacobi_p, lift_system, lifted_eval, lifted_weight,
                    make_system, validate_orthogonality)
from .verify import (GramReport, MomentReport, MomentZetaReport,
                     PrescribedMomentReport, SubstitutionReport, gram_matrix,
                     moment_exact, moment_prescribed, moment_zeta,
                     verify_substitution)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "BelowThresholdError", "CacheExhaustedError",
    "CacheFormatError", "ConsistencyError", "ConvergenceError", "DomainError",
    "EvaluationError", "SingularPointError", "StorageError", "ZetaLadderError",
    "ZValue", "hardy_z", "theta", "theta_array", "z_array",
    "QuadResult", "integrate",
    "CumulativeCache", "build_cache", "hl_integral", "hl_integral_array",
    "load_cache", "save_cache",
    "DEFAULT_CONFIG", "GapReport", "IterSeq", "LadderConfig", "LadderPoint",
    "forward_iterate", "gap_stats", "hl_asymptotic", "hl_asymptotic_prime",
    "omega", "omega_array", "phi1", "phi1_array", "phi1_inverse",
    "phi1_prime", "phi1_prime_array", "reverse_iterate",
    "BesselSystem", "CustomSystem", "FourierSystem", "JacobiSystem",
    "LiftedSystem", "base_eval", "base_norm", "bessel_j", "bessel_zero",
    "jacobi_p", "lift_system", "lifted_eval", "lifted_weight", "make_system",
    "validate_orthogonality",
    "GramReport", "MomentReport", "MomentZetaReport",
    "PrescribedMomentReport", "SubstitutionReport", "gram_matrix",
    "moment_exact", "moment_prescribed", "moment_zeta",
    "verify_substitution",
    "__version__",
]
