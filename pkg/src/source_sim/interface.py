from dataclasses import asdict, dataclass, field
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__
from typing import Protocol

import numpy as np


class SimulationError(Exception):
    """Base class for pair-source simulation failures."""


class SimulationArgumentError(SimulationError, ValueError):
    pass


class BackgroundMode(StrEnum):
    LINEAR = "linear"
    CONSTANT_FRACTION = "constant_fraction"


@dataclass(frozen=True)
class SourceConfig:
    rep_rate_hz: float = 80e6
    pump_avg_power_mw: float = 0.54
    pulse_fwhm_s: float = 4e-12
    pair_yield_coeff: float = 0.65  # pairs/pulse/mW²
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
    rng_seed: int = 1

    def __post_init__(self):
        if self.rep_rate_hz <= 0:
            raise SimulationArgumentError(f"rep_rate_hz must be > 0, got {self.rep_rate_hz}")
        if self.pulse_fwhm_s <= 0:
            raise SimulationArgumentError(f"pulse_fwhm_s must be > 0, got {self.pulse_fwhm_s}")
        if self.pump_avg_power_mw < 0 or self.pair_yield_coeff < 0:
            raise SimulationArgumentError("pump power and pair yield must be >= 0")
        for name in ("signal_lumped_eff", "idler_lumped_eff"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise SimulationArgumentError(f"{name} must be in [0, 1], got {value}")
        for name in ("signal_bg_fraction", "idler_bg_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise SimulationArgumentError(f"{name} must be in [0, 1), got {value}")
        if min(self.signal_bg_rate_per_mw, self.idler_bg_rate_per_mw) < 0:
            raise SimulationArgumentError("background rates must be >= 0")
        if self.detector_jitter_fwhm_s < 0 or self.dead_time_s < 0:
            raise SimulationArgumentError("jitter and dead time must be >= 0")
        if not 1.0 <= self.stop_delay_periods:
            raise SimulationArgumentError(
                f"stop_delay_periods must be >= 1, got {self.stop_delay_periods}"
            )

    @property
    def period_s(self) -> float:
        return 1.0 / self.rep_rate_hz

    @property
    def peak_power_w(self) -> float:
        return self.pump_avg_power_mw * 1e-3 / (self.rep_rate_hz * self.pulse_fwhm_s)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["background_mode"] = str(self.background_mode)
        return data


class BackgroundModel(Protocol):
    @property
    def mode(self) -> BackgroundMode: ...
    def rates(self, config: SourceConfig) -> tuple[float, float]: ...


@dataclass(frozen=True)
class RawCounts:
    signal: int
    idler: int
    central: int
    satellites: int
    satellite_peaks: int


@dataclass(frozen=True)
class TrueCounts:
    """Per-pulse ground truth tallied while simulating (before the TIA)."""

    pulses: int
    pairs: int
    coincident_pulses: int
    accidental_mean: float


@dataclass
class CountRecord:
    duration_s: float
    n_s: float
    n_i: float
    c_raw: float
    c_b: float
    raw_counts: RawCounts
    pump_power_mw: float | None = None
    config: dict | None = None
    true_counts: TrueCounts | None = None

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValueError(f"duration_s must be > 0, got {self.duration_s}")
        if min(self.n_s, self.n_i, self.c_raw, self.c_b) < 0:
            raise ValueError("CountRecord rates must be nonnegative")

    @property
    def net_coincidences(self) -> float:
        return self.c_raw - self.c_b

    def flags(self) -> list[str]:
        flags = []
        if self.c_raw > min(self.n_s, self.n_i):
            flags.append("coincidences exceed singles")
        if self.c_b > self.c_raw:
            flags.append("accidentals exceed raw coincidences")
        return flags


@dataclass
class TiaHistogram:
    bin_width_s: float
    origin_s: float
    counts: np.ndarray
    starts: int = 0
    duration_s: float = 0.0

    @property
    def bin_centers_s(self) -> np.ndarray:
        return self.origin_s + (np.arange(self.counts.size) + 0.5) * self.bin_width_s

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class DetectionEvents:
    signal_times_s: np.ndarray = field(default_factory=lambda: np.empty(0))
    idler_times_s: np.ndarray = field(default_factory=lambda: np.empty(0))
    duration_s: float = 0.0
