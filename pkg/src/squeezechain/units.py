"""Conversions between gain parameters, power ratios and decibels.

Every module goes through these helpers so that the factor
``10 log10(e^2) = 8.6859 dB`` per unit of gain parameter lives in one place.
"""

import math

import numpy as np

#: dB of phase-sensitive power gain per unit of squeezing/gain parameter r.
DB_PER_NEPER = 20.0 * math.log10(math.e)

SPEED_OF_LIGHT = 299_792_458.0


def r_to_db(r):
    """Gain parameter r -> power gain e^{2r} in dB."""
    return DB_PER_NEPER * r


def db_to_r(gain_db):
    """Power gain in dB -> gain parameter r."""
    return gain_db / DB_PER_NEPER


def ratio_to_db(ratio):
    return 10.0 * np.log10(ratio)


def db_to_ratio(value_db):
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def loss_db_to_eta(loss_db):
    """Loss in dB (positive number) -> transmission efficiency."""
    return 10.0 ** (-float(loss_db) / 10.0)


def eta_to_loss_db(eta):
    return -10.0 * math.log10(eta)


def wavelength_to_frequency(wavelength_m):
    return SPEED_OF_LIGHT / np.asarray(wavelength_m, dtype=float)


def frequency_to_wavelength(frequency_hz):
    return SPEED_OF_LIGHT / np.asarray(frequency_hz, dtype=float)
