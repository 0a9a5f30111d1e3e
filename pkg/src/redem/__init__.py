"""Rate functions, limit formulas, and Monte Carlo checks for partition sums
over chains whose length is itself random."""

__version__ = "0.1.0"

from .distributions import (ENERGY_KINDS, LENGTH_KINDS, EnergyLaw, LengthLaw,
                            energy_cgf, energy_law, length_chi, length_law,
                            sample_energy, sample_length)
from .errors import (ConfigError, DomainError, NonConvergenceError,
                     OutOfRangeError, PreconditionError, RedemError)
from .limits import (LimitResult, critical_q, er_gamma, growth_rate,
                     interpolation_rate, rem_free_energy)
from .montecarlo import (ExperimentConfig, ExperimentReport, log_Z_hat,
                         exact_tail_probability, run_er_max, run_free_energy,
                         run_interpolation, run_tail_estimator, sample_R)
from .rates import (ConjugateResult, ConvolutionRate, EnergyConjugate,
                    LengthConjugate, NuResult, RateFunction, conjugate,
                    conjugate_detail, nu, nu_detail, psi, rate_inverse,
                    tail_rate)
from .rng import substream

__all__ = [
    "__version__",
    "ENERGY_KINDS", "LENGTH_KINDS", "EnergyLaw", "LengthLaw",
    "energy_cgf", "energy_law", "length_chi", "length_law",
    "sample_energy", "sample_length",
    "RedemError", "ConfigError", "DomainError", "NonConvergenceError",
    "OutOfRangeError", "PreconditionError",
    "LimitResult", "critical_q", "er_gamma", "growth_rate",
    "interpolation_rate", "rem_free_energy",
    "ExperimentConfig", "ExperimentReport", "log_Z_hat",
    "exact_tail_probability", "run_er_max", "run_free_energy",
    "run_interpolation", "run_tail_estimator", "sample_R",
    "ConjugateResult", "ConvolutionRate", "EnergyConjugate",
    "LengthConjugate", "NuResult", "RateFunction", "conjugate",
    "conjugate_detail", "nu", "nu_detail", "psi", "rate_inverse", "tail_rate",
    "substream",
]
