"""Sub-additive pressure and affinity dimension of planar affine IFSs whose
linear parts strictly preserve a common cone, computed from the leading
eigenvalue of a weighted composition operator on a Hardy space."""

from .attractor import AttractorCloud, emit_attractor
from .cone_validate import (ConeResult, ContractionCertificate, GammaHull, OmegaReport,
                            check_irreducible, check_omega, estimate_jsr_upper,
                            find_invariant_cone, gamma_hull)
from .ifs_model import (IfsSystem, InvalidSystemError, Mat2, SingularPair,
                        conjugate_system, parse_system, phi_s, serialize_system,
                        singular_values, word_product)
from .pressure import (DimensionResult, PressureValue, SweepRow, ValidationError,
                       affinity_dimension, brute_force_pressure, complex_step_s_derivative,
                       complex_step_t_derivative, central_difference_s_derivative,
                       central_difference_t_derivative, derivative, perturbation_t_derivative,
                       prepare, pressure_s_derivative, spectral_pressure, sweep)
from .series import (PowerSeries, series_eval, series_exp, series_log, series_mul,
                     series_pow)
from .spectral import SpectralResult, adaptive_lambda1, dominant_eig, spectral_gap_estimate
from .transfer import (MobiusData, TruncatedOperator, assemble_operator,
                       assemble_operator_s_derivative, mobius_data, phi_series,
                       weight_series)

__version__ = "0.1.0"

__all__ = [
    "AttractorCloud",
    "emit_attractor",
    "ConeResult",
    "ContractionCertificate",
    "GammaHull",
    "OmegaReport",
    "check_irreducible",
    "check_omega",
    "estimate_jsr_upper",
    "find_invariant_cone",
    "gamma_hull",
    "IfsSystem",
    "InvalidSystemError",
    "Mat2",
    "SingularPair",
    "conjugate_system",
    "parse_system",
    "phi_s",
    "serialize_system",
    "singular_values",
    "word_product",
    "DimensionResult",
    "PressureValue",
    "SweepRow",
    "ValidationError",
    "affinity_dimension",
    "brute_force_pressure",
    "complex_step_s_derivative",
    "complex_step_t_derivative",
    "central_difference_s_derivative",
    "central_difference_t_derivative",
    "derivative",
    "perturbation_t_derivative",
    "prepare",
    "pressure_s_derivative",
    "spectral_pressure",
    "sweep",
    "PowerSeries",
    "series_eval",
    "series_exp",
    "series_log",
    "series_mul",
    "series_pow",
    "SpectralResult",
    "adaptive_lambda1",
    "dominant_eig",
    "spectral_gap_estimate",
    "MobiusData",
    "TruncatedOperator",
    "assemble_operator",
    "assemble_operator_s_derivative",
    "mobius_data",
    "phi_series",
    "weight_series",
]
