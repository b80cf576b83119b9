"""Run configuration: a JSON document mirroring the model parameters.

Every section is optional; missing keys take the reference defaults listed in
:mod:`squeezechain.anchors`.  Unknown keys are rejected with their dotted
path.  Gains are given in dB, lengths in meters, GVD in s^2/m, wavelengths in
nm and frequency spans in THz.
"""

from __future__ import annotations

import json
import math
from dataclasses import MISSING, asdict, dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from . import anchors
from .chain import ChainParams
from .spectral import CouplerTable, DispersionSpec, SpectralGrid, SpectralModelParams
from .units import db_to_r


class ConfigError(ValueError):
    """Invalid or unreadable run configuration."""


@dataclass
class Range:
    start: float
    stop: float
    num: int

    def validate(self, path):
        if not isinstance(self.num, int) or self.num < 1:
            raise ConfigError(f"{path}.num must be a positive integer, got {self.num!r}")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num)


@dataclass
class ChainConfig:
    r1_gain_db: float = anchors.GENERATED_SQUEEZING_DB
    r2_gain_db: float = anchors.MEASUREMENT_GAIN_DB
    phi_pump2: float = 0.0
    eta_coupler: float = anchors.ETA_COUPLER
    eta_det: float = 1.0
    pump_leak: float = anchors.PUMP_LEAK
    sigma_phase: float = 0.0
    noise_floor: float = anchors.CALIBRATED_NOISE_FLOOR

    def validate(self, path):
        for name in ("r1_gain_db", "r2_gain_db", "sigma_phase", "noise_floor"):
            _require(getattr(self, name) >= 0, f"{path}.{name} must be >= 0")
        for name in ("eta_coupler", "eta_det", "pump_leak"):
            _require(0 <= getattr(self, name) <= 1, f"{path}.{name} must lie in [0, 1]")

    def to_params(self) -> ChainParams:
        return ChainParams(
            r1=db_to_r(self.r1_gain_db),
            r2=db_to_r(self.r2_gain_db),
            phi_pump2=self.phi_pump2,
            eta_coupler=self.eta_coupler,
            eta_det=self.eta_det,
            pump_leak=self.pump_leak,
            sigma_phase=self.sigma_phase,
            noise_floor=self.noise_floor,
        )


@dataclass
class DispersionConfig:
    length_m: float
    delta_k0: float = 0.0
    beta2: float = 0.0
    beta4: float = 0.0

    def validate(self, path):
        _require(self.length_m > 0, f"{path}.length_m must be positive")

    def to_spec(self) -> DispersionSpec:
        return DispersionSpec(self.length_m, self.delta_k0, self.beta2, self.beta4)


@dataclass
class CouplerConfig:
    wavelength_nm: list = field(default_factory=lambda: list(anchors.CALIBRATED_COUPLER_WAVELENGTH_NM))
    eta: list = field(default_factory=lambda: list(anchors.CALIBRATED_COUPLER_ETA))

    def validate(self, path):
        try:
            self.to_table()
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{path}: {exc}") from None

    def to_table(self) -> CouplerTable:
        return CouplerTable(tuple(self.wavelength_nm), tuple(self.eta))


@dataclass
class SpectralConfig:
    REQUIRED = ("squeezer", "measurement")

    center_wavelength_nm: float = anchors.CENTER_WAVELENGTH * 1e9
    span_thz: float = anchors.GRID_SPAN_HZ / 1e12
    n_bins: int = anchors.GRID_BINS
    r1_peak_gain_db: float = anchors.GENERATED_SQUEEZING_DB
    r2_peak_gain_db: float = anchors.MEASUREMENT_GAIN_DB
    threshold_db: float = anchors.BANDWIDTH_THRESHOLD_DB
    noise_floor: float = anchors.CALIBRATED_NOISE_FLOOR
    sigma_phase: float = 0.0
    eta_det: float = 1.0
    squeezer: DispersionConfig = field(
        default_factory=lambda: DispersionConfig(anchors.SQUEEZER_LENGTH, beta2=anchors.CALIBRATED_SQUEEZER_BETA2)
    )
    measurement: DispersionConfig = field(
        default_factory=lambda: DispersionConfig(anchors.MEASUREMENT_LENGTH, beta2=anchors.CALIBRATED_MEASUREMENT_BETA2)
    )
    coupler_table: CouplerConfig = field(default_factory=CouplerConfig)

    def validate(self, path):
        _require(self.center_wavelength_nm > 0, f"{path}.center_wavelength_nm must be positive")
        _require(self.span_thz > 0, f"{path}.span_thz must be positive")
        _require(isinstance(self.n_bins, int) and self.n_bins >= 2, f"{path}.n_bins must be an integer >= 2")
        _require(self.threshold_db > 0, f"{path}.threshold_db must be positive")
        for name in ("r1_peak_gain_db", "r2_peak_gain_db", "noise_floor", "sigma_phase"):
            _require(getattr(self, name) >= 0, f"{path}.{name} must be >= 0")
        _require(0 <= self.eta_det <= 1, f"{path}.eta_det must lie in [0, 1]")

    def grid(self) -> SpectralGrid:
        return SpectralGrid.symmetric(self.center_wavelength_nm * 1e-9, self.span_thz * 1e12, self.n_bins)

    def to_params(self) -> SpectralModelParams:
        return SpectralModelParams(
            r1_peak=db_to_r(self.r1_peak_gain_db),
            r2_peak=db_to_r(self.r2_peak_gain_db),
            squeezer=self.squeezer.to_spec(),
            measurement=self.measurement.to_spec(),
            coupler=self.coupler_table.to_table(),
            noise_floor=self.noise_floor,
            sigma_phase=self.sigma_phase,
            eta_det=self.eta_det,
        )


@dataclass
class SweepConfig:
    gain_strength: float = anchors.GAIN_STRENGTH
    pump_energy: Range = field(default_factory=lambda: Range(0.05, 4.0, 80))
    coupler_eta: Range = field(default_factory=lambda: Range(0.0, 1.0, 21))
    detection_loss: Range = field(default_factory=lambda: Range(0.0, 20.0, 41))
    measurement_gain: Range = field(default_factory=lambda: Range(10.0, 60.0, 51))
    sigma_phase: Range = field(default_factory=lambda: Range(0.0, 0.3, 31))

    def validate(self, path):
        _require(self.gain_strength >= 0, f"{path}.gain_strength must be >= 0")
        _require(min(self.pump_energy.start, self.pump_energy.stop) >= 0, f"{path}.pump_energy must be >= 0")
        _require(
            0 <= min(self.coupler_eta.start, self.coupler_eta.stop) and max(self.coupler_eta.start, self.coupler_eta.stop) <= 1,
            f"{path}.coupler_eta must lie in [0, 1]",
        )
        _require(min(self.detection_loss.start, self.detection_loss.stop) >= 0, f"{path}.detection_loss must be >= 0 dB")
        _require(min(self.measurement_gain.start, self.measurement_gain.stop) > 0, f"{path}.measurement_gain must be > 0 dB")
        _require(min(self.sigma_phase.start, self.sigma_phase.stop) >= 0, f"{path}.sigma_phase must be >= 0")


@dataclass
class TraceConfig:
    n_samples: int = 10000
    rin: float = 0.0
    pump_ratio: float = 0.05
    ramp_span: float = 2 * math.pi
    window: int = 1

    def validate(self, path):
        _require(isinstance(self.n_samples, int) and self.n_samples >= 16, f"{path}.n_samples must be an integer >= 16")
        _require(self.rin >= 0, f"{path}.rin must be >= 0")
        _require(self.pump_ratio >= 0, f"{path}.pump_ratio must be >= 0")
        _require(self.ramp_span >= 2 * math.pi - 1e-12, f"{path}.ramp_span must cover at least 2*pi")
        _require(isinstance(self.window, int) and self.window >= 1, f"{path}.window must be an integer >= 1")

    def ramp(self) -> np.ndarray:
        return np.linspace(0.0, self.ramp_span, self.n_samples)


@dataclass
class RunConfig:
    seed: int = 0
    out_dir: str = "out"
    chain: ChainConfig = field(default_factory=ChainConfig)
    spectral: SpectralConfig = field(default_factory=SpectralConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    traces: TraceConfig = field(default_factory=TraceConfig)
    notes: Dict[str, str] = field(default_factory=dict)

    def validate(self, path="config"):
        _require(isinstance(self.seed, int) and self.seed >= 0, f"{path}.seed must be a non-negative integer")
        _require(isinstance(self.out_dir, str) and self.out_dir, f"{path}.out_dir must be a nonempty string")
        _require(all(isinstance(v, str) for v in self.notes.values()), f"{path}.notes values must be strings")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _require(ok, message):
    if not ok:
        raise ConfigError(message)


def _build(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must be an object, got {type(data).__name__}")
    for key in getattr(cls, "REQUIRED", ()):
        if key not in data:
            raise ConfigError(f"missing table {path}.{key}")
    names = {f.name: f for f in fields(cls)}
    for key in data:
        if key not in names:
            raise ConfigError(f"unknown key {path}.{key}")
    try:
        defaults = cls()
    except TypeError:
        defaults = None
    kwargs = {}
    for name, f in names.items():
        sub = f"{path}.{name}"
        has_default = f.default is not MISSING or f.default_factory is not MISSING
        if name not in data:
            if not has_default:
                raise ConfigError(f"missing key {sub}")
            continue
        value = data[name]
        template = getattr(defaults, name, None) if defaults is not None else None
        if template is None and f.default is not MISSING:
            template = f.default
        nested = _nested_type(cls, name, template)
        if nested is not None:
            value = _build(nested, value, sub)
        else:
            value = _check_scalar(value, template, sub)
        kwargs[name] = value
    obj = cls(**kwargs)
    for name in names:
        value = getattr(obj, name)
        if is_dataclass(value):
            value.validate(f"{path}.{name}")
    if hasattr(obj, "validate"):
        obj.validate(path)
    return obj


_NESTED = {
    (RunConfig, "chain"): ChainConfig,
    (RunConfig, "spectral"): SpectralConfig,
    (RunConfig, "sweep"): SweepConfig,
    (RunConfig, "traces"): TraceConfig,
    (SpectralConfig, "squeezer"): DispersionConfig,
    (SpectralConfig, "measurement"): DispersionConfig,
    (SpectralConfig, "coupler_table"): CouplerConfig,
}


def _nested_type(cls, name, template):
    if (cls, name) in _NESTED:
        return _NESTED[(cls, name)]
    if isinstance(template, Range) or (cls is SweepConfig and name != "gain_strength"):
        return Range
    return None


def _check_scalar(value, template, path):
    if isinstance(value, bool):
        raise ConfigError(f"{path} must not be a boolean")
    if isinstance(template, bool):
        return value
    if isinstance(template, int) and not isinstance(template, bool):
        if not isinstance(value, int):
            raise ConfigError(f"{path} must be an integer, got {value!r}")
        return value
    if isinstance(template, float):
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"{path} must be a finite number, got {value!r}")
        return float(value)
    if isinstance(template, str):
        if not isinstance(value, str):
            raise ConfigError(f"{path} must be a string, got {value!r}")
        return value
    if isinstance(template, list):
        if not isinstance(value, list):
            raise ConfigError(f"{path} must be a list, got {value!r}")
        return [_check_scalar(v, 0.0, f"{path}[{i}]") for i, v in enumerate(value)]
    if isinstance(template, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"{path} must be an object")
        return dict(value)
    if template is None and isinstance(value, (int, float)):
        return value
    if template is None:
        raise ConfigError(f"{path} has unsupported value {value!r}")
    return value


def config_from_dict(data: Dict[str, Any]) -> RunConfig:
    return _build(RunConfig, data, "config")


def load_config(path: Optional[str | Path] = None) -> RunConfig:
    """Read and validate a config file; ``None`` gives the reference defaults."""
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return config_from_dict(data)


def dump_config(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2) + "\n"


def default_config_path() -> Path:
    return Path(__file__).parent / "data" / "default_config.json"
