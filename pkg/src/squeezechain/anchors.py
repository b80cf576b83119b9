"""Reference device numbers and the calibration of the model's free parameters.

Measured quantities (lengths, efficiencies, spectral widths, squeezing levels)
are fixed constants.  Parameters the model needs but that were never measured
(detector floor, dispersion, coupler spectrum) are solved for here so that the
model reproduces those constants; :func:`calibrate` is what produced the
numbers stored in ``data/default_config.json``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from scipy import optimize

from .chain import ChainParams, detection_loss_tolerance
from .spectral import (
    CouplerTable,
    DispersionSpec,
    SpectralGrid,
    SpectralModelParams,
    beta2_for_half_power_width,
    calibrate_coupler_table,
    calibrate_measurement_beta2,
)
from .units import db_to_r

CENTER_WAVELENGTH = 2.09e-6
SQUEEZER_LENGTH = 2.5e-3
MEASUREMENT_LENGTH = 5.0e-3

ETA_COUPLER = 0.7
PUMP_LEAK = 0.2
ETA_OVERALL = 0.20

GENERATED_SQUEEZING_DB = 10.6
MEASUREMENT_GAIN_DB = 50.0
#: squeezer nonlinear strength, pJ^-1/2; gives 10.6 dB at 0.76 pJ
GAIN_STRENGTH = 1.4

MEASURED_SQUEEZING_DB = {1950.0: -3.8, 2090.0: -4.2, 2200.0: -4.9}
SQUEEZER_OPG_WIDTH_HZ = 36.4e12
MEASURED_SQUEEZING_WIDTH_HZ = 25.1e12
DETECTION_LOSS_TOLERANCE_DB = 7.0
TOLERANCE_DEGRADATION_DB = 0.1
OPTICAL_CYCLES = 4.0

# Output of calibrate(), frozen so that loading a config never re-solves them.
CALIBRATED_NOISE_FLOOR = 84.14466414440929
CALIBRATED_SQUEEZER_BETA2 = 8.513116813831141e-26
CALIBRATED_MEASUREMENT_BETA2 = 1.1826656317037683e-25
CALIBRATED_COUPLER_WAVELENGTH_NM = (1950.0, 2090.0, 2200.0)
CALIBRATED_COUPLER_ETA = (0.6766884856928622, 0.6812157718665094, 0.7471935651630093)

GRID_SPAN_HZ = 100e12
GRID_BINS = 801
BANDWIDTH_THRESHOLD_DB = 3.0


@dataclass(frozen=True)
class Calibration:
    noise_floor: float
    squeezer_beta2: float
    measurement_beta2: float
    coupler: CouplerTable


def default_chain(noise_floor: float = 0.0) -> ChainParams:
    return ChainParams(
        r1=db_to_r(GENERATED_SQUEEZING_DB),
        r2=db_to_r(MEASUREMENT_GAIN_DB),
        eta_coupler=ETA_COUPLER,
        pump_leak=PUMP_LEAK,
        noise_floor=noise_floor,
    )


def default_grid() -> SpectralGrid:
    return SpectralGrid.symmetric(CENTER_WAVELENGTH, GRID_SPAN_HZ, GRID_BINS)


def calibrate_noise_floor(target_db: float = DETECTION_LOSS_TOLERANCE_DB) -> float:
    """Detector floor (photons) for which the default chain tolerates ``target_db`` of loss."""

    def miss(log_floor):
        p = default_chain(10.0**log_floor)
        return detection_loss_tolerance(p, TOLERANCE_DEGRADATION_DB) - target_db

    return 10.0 ** optimize.brentq(miss, -3.0, 5.0, xtol=1e-10)


def calibrate(iterations: int = 4) -> Calibration:
    """Solve for floor, dispersion and coupler spectrum from the reference numbers.

    The coupler table and the measurement-section GVD depend on each other,
    so they are alternated until both settle.
    """
    floor = calibrate_noise_floor()
    beta2_sq = beta2_for_half_power_width(SQUEEZER_LENGTH, SQUEEZER_OPG_WIDTH_HZ)
    chain = default_chain(floor)
    params = SpectralModelParams(
        r1_peak=chain.r1,
        r2_peak=chain.r2,
        squeezer=DispersionSpec(SQUEEZER_LENGTH, beta2=beta2_sq),
        measurement=DispersionSpec(MEASUREMENT_LENGTH, beta2=beta2_sq),
        coupler=CouplerTable.flat(ETA_COUPLER),
        noise_floor=floor,
    )
    grid = default_grid()
    wavelengths = sorted(MEASURED_SQUEEZING_DB)
    targets = [MEASURED_SQUEEZING_DB[w] for w in wavelengths]
    for _ in range(iterations):
        coupler = calibrate_coupler_table(params, CENTER_WAVELENGTH, wavelengths, targets)
        params = replace(params, coupler=coupler)
        beta2_meas = calibrate_measurement_beta2(params, grid, MEASURED_SQUEEZING_WIDTH_HZ, BANDWIDTH_THRESHOLD_DB)
        params = replace(params, measurement=replace(params.measurement, beta2=beta2_meas))
    coupler = calibrate_coupler_table(params, CENTER_WAVELENGTH, wavelengths, targets)
    return Calibration(floor, beta2_sq, params.measurement.beta2, coupler)
