"""Gaussian-state model of two-stage parametric squeezing measurement.

Submodules: :mod:`.gaussian` (state engine), :mod:`.chain` (squeezer,
coupler, measurement amplifier, detector), :mod:`.spectral` (per-frequency
model), :mod:`.calibration` (trace synthesis and fits), :mod:`.cli`.
"""

from .calibration import (
    GainFitResult,
    LossFitResult,
    ZeroSpanTrace,
    extract_squeezing,
    fit_gain_curve,
    fit_loss_model,
    synthesize_traces,
)
from .chain import (
    ChainParams,
    SqueezingResult,
    detection_loss_tolerance,
    ideal_squeezing,
    lossy_squeezing_limit,
    required_measurement_gain,
    simulate_chain,
)
from .gaussian import GaussianState, SymplecticTransform
from .spectral import (
    CouplerTable,
    DispersionSpec,
    SpectralGrid,
    SpectralModelParams,
    bandwidth,
    gain_profile,
    phase_mismatch,
    squeezing_spectrum,
    temporal_cycles,
)
from .units import db_to_r, r_to_db

__version__ = "0.1.0"
