"""Random coding error exponents for spatially correlated block-fading
MIMO channels with Gaussian equal-power inputs.

Rates and exponents are in nats per symbol throughout.
"""

from .channel import ChannelSpec, db_to_linear, linear_to_db
from .errors import DomainError, IllConditionedWarning, NumericalError, ValidationError
from .exponent import cutoff_rate, d_e0_dbeta, d_e0_drho, e0_tilde, ergodic_capacity, log_zeta
from .linalg import HermitianPD
from .montecarlo import (
    McConfig,
    McEstimate,
    mc_capacity,
    mc_cutoff_rate,
    mc_e0,
    mc_e0_general_q,
    mc_zeta,
    sample_channel,
    verify_lemma1,
)
from .optimizer import (
    ExponentPoint,
    TradeoffCurve,
    beta_star,
    exponent_at_rate,
    operating_point,
    tradeoff_curve,
)
from .planner import CodewordPlan, length_table, required_length
from .spectra import EigenStructure, eigen_structure, exponential_correlation

__version__ = "0.1.0"

__all__ = [
    "ChannelSpec",
    "CodewordPlan",
    "DomainError",
    "EigenStructure",
    "ExponentPoint",
    "HermitianPD",
    "IllConditionedWarning",
    "McConfig",
    "McEstimate",
    "NumericalError",
    "TradeoffCurve",
    "ValidationError",
    "beta_star",
    "cutoff_rate",
    "d_e0_dbeta",
    "d_e0_drho",
    "db_to_linear",
    "e0_tilde",
    "eigen_structure",
    "ergodic_capacity",
    "exponent_at_rate",
    "exponential_correlation",
    "length_table",
    "linear_to_db",
    "log_zeta",
    "mc_capacity",
    "mc_cutoff_rate",
    "mc_e0",
    "mc_e0_general_q",
    "mc_zeta",
    "operating_point",
    "required_length",
    "sample_channel",
    "tradeoff_curve",
    "verify_lemma1",
]
