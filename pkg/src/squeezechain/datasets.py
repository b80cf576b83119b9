"""Synthetic datasets shipped with the package (regenerable, deterministic)."""

import numpy as np

from . import anchors
from .calibration import gain_curve_model, squeezer_gain_parameter
from .chain import lossy_squeezing_limit
from .tabular import GAIN_COLUMNS, LOSS_COLUMNS, format_csv

LOSS_ENERGIES_PJ = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.76)
GAIN_ENERGIES_PJ = tuple(np.round(np.linspace(0.25, 6.0, 24), 4))
GAIN_NOISE = 0.01
GAIN_SEED = 2090


def synthetic_loss_data():
    """Noiseless (s_plus_db, s_minus_db) pairs at the reference coupler efficiency."""
    rows = []
    for energy in LOSS_ENERGIES_PJ:
        r = squeezer_gain_parameter(energy, anchors.GAIN_STRENGTH)
        s_minus, s_plus = lossy_squeezing_limit(float(r), anchors.ETA_COUPLER)
        rows.append((s_plus, s_minus))
    return rows


def synthetic_gain_data(noise: float = GAIN_NOISE, seed: int = GAIN_SEED):
    """(energy_pJ, detected_photons) with multiplicative Gaussian noise."""
    energy = np.asarray(GAIN_ENERGIES_PJ)
    photons = gain_curve_model(energy, anchors.GAIN_STRENGTH, anchors.ETA_OVERALL)
    photons = photons * (1.0 + noise * np.random.default_rng(seed).standard_normal(energy.size))
    return list(zip(energy.tolist(), photons.tolist()))


def loss_csv() -> str:
    meta = {"model": "loss", "eta": anchors.ETA_COUPLER, "gain_strength": anchors.GAIN_STRENGTH}
    return format_csv(LOSS_COLUMNS, synthetic_loss_data(), meta)


def gain_csv() -> str:
    meta = {
        "model": "gain",
        "gain_strength": anchors.GAIN_STRENGTH,
        "eta_overall": anchors.ETA_OVERALL,
        "noise": GAIN_NOISE,
        "seed": GAIN_SEED,
    }
    return format_csv(GAIN_COLUMNS, synthetic_gain_data(), meta)


CONFIG_NOTES = {
    "chain.r1_gain_db": "10.6 dB generated squeezing inferred from the loss fit of the reference device",
    "chain.r2_gain_db": "measurement amplifier gain, well above the ~33 dB sufficiency level",
    "chain.eta_coupler": "adiabatic coupler efficiency 0.7 at 2090 nm (reference device)",
    "chain.pump_leak": "about 20% of the squeezer pump leaks into the measurement amplifier",
    "chain.noise_floor": "calibrated so 0.1 dB of degradation occurs after 7 dB of detection loss",
    "chain.sigma_phase": "0 by default; about 0.08 rad gives a turnover near 0.8 pJ",
    "spectral.center_wavelength_nm": "degenerate wavelength 2090 nm",
    "spectral.squeezer": "2.5 mm poled length; beta2 calibrated to a 36.4 THz half-power OPG width",
    "spectral.measurement": "5.0 mm poled length; beta2 calibrated to a 25.1 THz squeezing width",
    "spectral.coupler_table": "solved so that s_minus is -3.8/-4.2/-4.9 dB at 1950/2090/2200 nm",
    "sweep.gain_strength": "r = g*sqrt(E/pJ) with g = 1.4 gives 10.6 dB at 0.76 pJ",
    "traces.pump_ratio": "pump-1/pump-2 amplitude ratio at the chip; unmeasured, set to 0.05",
    "gain_synthetic.csv": "generated with overall detection efficiency 0.20 and g = 1.4",
}


def default_config_json() -> str:
    from .config import RunConfig, dump_config

    return dump_config(RunConfig(notes=dict(CONFIG_NOTES)))


BUNDLED = {
    "default_config.json": default_config_json,
    "loss_synthetic.csv": loss_csv,
    "gain_synthetic.csv": gain_csv,
}


def write_bundled():
    """Regenerate every file under ``data/``."""
    from .tabular import bundled_path, write_text

    for name, make in BUNDLED.items():
        write_text(bundled_path(name), make())
