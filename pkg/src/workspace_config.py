"""Strict JSON workspace configuration.

Every section maps onto a frozen dataclass; unknown keys, missing keys and
wrong types raise ConfigError naming the dotted key path. Keys that are
absent fall back to the dataclass default.
"""

import dataclasses
import json
import logging
import os
import types
import typing
from dataclasses import dataclass, field
from enum import Enum

from dispersion.interface import FiberModel
from inference.interface import PredictedEfficiencyRange
from phasematch.interface import DEFAULT_N2, NonlinearParams, PumpSpec
from source_sim.interface import BackgroundMode, SourceConfig

logger = logging.getLogger("pairsource.config")

CONFIG_ENV = "PAIRSOURCE_CONFIG"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class FiberSection:
    core_diameter_um: float = 1.988
    cladding_index: float = 1.0
    dispersion_range_nm: tuple[float, float] = (650.0, 800.0)
    dispersion_points: int = 31


@dataclass(frozen=True)
class NonlinearSection:
    n2: float = DEFAULT_N2
    effective_area_m2: float | None = None  # None: geometric core area


@dataclass(frozen=True)
class PumpSection:
    center_wavelength_nm: float = 708.4
    fwhm_bandwidth_nm: float = 0.3
    peak_power_w: float = 1.7
    sweep_range_nm: tuple[float, float] = (680.0, 712.0)
    sweep_points: int = 33
    power_ladder_mw: tuple[float, ...] = (0.17, 0.245, 0.38, 0.54)


@dataclass(frozen=True)
class SourceSection:
    rep_rate_hz: float = 80e6
    pulse_fwhm_s: float = 4e-12
    pair_yield_coeff: float = 0.65
    signal_lumped_eff: float = 0.211
    idler_lumped_eff: float = 0.111
    background_mode: BackgroundMode = BackgroundMode.LINEAR
    signal_bg_rate_per_mw: float = 0.0
    idler_bg_rate_per_mw: float = 0.0
    signal_bg_fraction: float = 0.0
    idler_bg_fraction: float = 0.0
    detector_jitter_fwhm_s: float = 350e-12
    dead_time_s: float = 0.0
    stop_delay_periods: float = 3.5
    duration_s: float = 1.0


@dataclass(frozen=True)
class ProjectionSection:
    coefficient: float | None = 1.21e6  # None: use the fitted A
    power_mw: float = 2.0
    transmission_per_arm: float = 0.5
    spectral_fraction: float = 1.0 / 15.0


@dataclass(frozen=True)
class AnalysisSection:
    predicted_signal: tuple[float, float] = (0.211, 0.229)
    predicted_idler: tuple[float, float] = (0.110, 0.119)
    window_s: float = 2e-9
    satellites_per_side: int = 2
    bin_width_s: float = 50e-12
    pileup_correction: bool = True
    efficiency_decimals: int | None = 3
    projection: ProjectionSection = field(default_factory=ProjectionSection)


@dataclass(frozen=True)
class WorkspaceConfig:
    fiber: FiberSection = field(default_factory=FiberSection)
    nonlinear: NonlinearSection = field(default_factory=NonlinearSection)
    pump: PumpSection = field(default_factory=PumpSection)
    source: SourceSection = field(default_factory=SourceSection)
    analysis: AnalysisSection = field(default_factory=AnalysisSection)
    output_dir: str = "out"
    seed: int = 1

    @classmethod
    def default(cls) -> "WorkspaceConfig":
        return cls()

    def fiber_model(self) -> FiberModel:
        return FiberModel(
            core_diameter_um=self.fiber.core_diameter_um,
            cladding_index=self.fiber.cladding_index,
        )

    def nonlinear_params(self, pump_wavelength_nm: float | None = None) -> NonlinearParams:
        area = self.nonlinear.effective_area_m2 or self.fiber_model().core_area_m2
        return NonlinearParams(
            n2=self.nonlinear.n2,
            effective_area_m2=area,
            pump_wavelength_nm=pump_wavelength_nm or self.pump.center_wavelength_nm,
        )

    def pump_spec(self) -> PumpSpec:
        return PumpSpec(
            center_wavelength_nm=self.pump.center_wavelength_nm,
            fwhm_bandwidth_nm=self.pump.fwhm_bandwidth_nm,
            peak_power_w=self.pump.peak_power_w,
        )

    def source_config(self, pump_avg_power_mw: float, ladder_index: int = 0) -> SourceConfig:
        """Simulator config for one ladder entry; seeds are derived per index."""
        values = {f.name: getattr(self.source, f.name) for f in dataclasses.fields(SourceSection)}
        values.pop("duration_s")
        return SourceConfig(
            pump_avg_power_mw=pump_avg_power_mw,
            rng_seed=self.seed + ladder_index,
            **values,
        )

    def predicted_range(self) -> PredictedEfficiencyRange:
        return PredictedEfficiencyRange(
            signal_lo=self.analysis.predicted_signal[0],
            signal_hi=self.analysis.predicted_signal[1],
            idler_lo=self.analysis.predicted_idler[0],
            idler_hi=self.analysis.predicted_idler[1],
        )


def _type_name(tp) -> str:
    return getattr(tp, "__name__", str(tp))


def _convert(value, tp, path: str):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)

    if origin in (typing.Union, types.UnionType):
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _convert(value, inner[0], path)

    if dataclasses.is_dataclass(tp):
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected an object, got {type(value).__name__}")
        return _build(tp, value, path)

    if origin is tuple:
        if not isinstance(value, list):
            raise ConfigError(f"{path}: expected a list, got {type(value).__name__}")
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_convert(v, args[0], f"{path}[{i}]") for i, v in enumerate(value))
        if len(value) != len(args):
            raise ConfigError(f"{path}: expected {len(args)} values, got {len(value)}")
        return tuple(_convert(v, a, f"{path}[{i}]") for i, (v, a) in enumerate(zip(value, args)))

    if isinstance(tp, type) and issubclass(tp, Enum):
        try:
            return tp(value)
        except ValueError:
            allowed = ", ".join(str(m.value) for m in tp)
            raise ConfigError(f"{path}: {value!r} is not one of {allowed}") from None

    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected a boolean, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value

    raise ConfigError(f"{path}: unsupported type {_type_name(tp)}")


def _build(cls, data: dict, path: str = ""):
    hints = typing.get_type_hints(cls)
    known = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in known:
            where = f"{path}.{key}" if path else key
            raise ConfigError(f"{where}: unknown key")
    kwargs = {
        key: _convert(value, hints[key], f"{path}.{key}" if path else key)
        for key, value in data.items()
    }
    return cls(**kwargs)


def _validate(config: WorkspaceConfig) -> None:
    """Build every sub-model once so invalid values surface as ConfigError."""
    try:
        config.fiber_model()
        config.nonlinear_params()
        config.pump_spec()
        config.predicted_range()
        for idx, power in enumerate(config.pump.power_ladder_mw):
            config.source_config(power, idx)
    except ValueError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
    lo, hi = config.fiber.dispersion_range_nm
    if not lo < hi:
        raise ConfigError(f"fiber.dispersion_range_nm: range must be increasing, got ({lo}, {hi})")
    lo, hi = config.pump.sweep_range_nm
    if not lo < hi:
        raise ConfigError(f"pump.sweep_range_nm: range must be increasing, got ({lo}, {hi})")
    if not config.pump.power_ladder_mw:
        raise ConfigError("pump.power_ladder_mw: ladder is empty")
    if config.source.duration_s <= 0:
        raise ConfigError(f"source.duration_s: must be > 0, got {config.source.duration_s}")


def parse_config(data: dict) -> WorkspaceConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    config = _build(WorkspaceConfig, data)
    _validate(config)
    return config


def load_config(path: str | None = None) -> WorkspaceConfig:
    """Load `path`, else $PAIRSOURCE_CONFIG, else the built-in defaults."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        logger.debug("No config file given, using built-in defaults")
        return WorkspaceConfig.default()
    try:
        with open(path) as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such config file") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    config = parse_config(data)
    logger.debug(f"Loaded config from {path}")
    return config


def config_to_dict(config: WorkspaceConfig) -> dict:
    def encode(value):
        if isinstance(value, Enum):
            return value.value
        if isinstance(value, tuple):
            return [encode(v) for v in value]
        if isinstance(value, dict):
            return {k: encode(v) for k, v in value.items()}
        return value

    return encode(dataclasses.asdict(config))
