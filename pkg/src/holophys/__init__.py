"""Coherent-imaging physics engine and self-supervised phase retrieval.

Simulates in-line holograms of synthetic random objects, reconstructs
complex object fields by classical multi-height phase retrieval, direct
variational optimization of a physics-consistency loss, or a small
spectral network trained without ground truth, and evaluates the results
against wave-equation compatibility checks.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DataError,
    DegenerateField,
    DegenerateMean,
    HoloError,
    NumericError,
    ShapeMismatch,
    TapeError,
)
from .field import (
    ComplexField,
    HologramStack,
    OpticalGrid,
    complex_mean,
    energy,
    from_amp_phase,
    normalize_by_complex_mean,
)
from .loss import (
    DEFAULT_WEIGHTS,
    LossReport,
    LossWeights,
    fdmae,
    hann2d,
    loss_and_gradient,
    loss_gradient_wrt_field,
    mse,
    total_loss,
    tv_complex,
    tv_phase,
)
from .propagation import (
    TransferFunction,
    adjoint_propagate,
    band_limit,
    propagate,
    sigma_for_snr_db,
    simulate_hologram_stack,
    transfer_function,
)

__all__ = [
    "__version__",
    "ComplexField",
    "HologramStack",
    "OpticalGrid",
    "complex_mean",
    "energy",
    "from_amp_phase",
    "normalize_by_complex_mean",
    "TransferFunction",
    "transfer_function",
    "propagate",
    "adjoint_propagate",
    "band_limit",
    "simulate_hologram_stack",
    "sigma_for_snr_db",
    "LossWeights",
    "LossReport",
    "DEFAULT_WEIGHTS",
    "hann2d",
    "fdmae",
    "mse",
    "tv_complex",
    "tv_phase",
    "total_loss",
    "loss_gradient_wrt_field",
    "loss_and_gradient",
    "HoloError",
    "ShapeMismatch",
    "DegenerateMean",
    "DegenerateField",
    "ConfigError",
    "DataError",
    "NumericError",
    "TapeError",
]
