from dataclasses import dataclass, field, replace
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__

import numpy as np

DEFAULT_N2 = 2e-20  # m²/W, silica


class PhaseMatchError(Exception):
    """Base class for phase-matching failures."""


class RegimeError(PhaseMatchError):
    pass


class NoPhaseMatchError(PhaseMatchError):
    pass


class PhaseMatchDomainError(PhaseMatchError, ValueError):
    pass


class SidebandBranch(StrEnum):
    INNER = "inner"  # first root moving away from the pump
    OUTER = "outer"  # root farthest from the pump


def nonlinear_coefficient(n2: float, pump_wavelength_nm: float, effective_area_m2: float) -> float:
    """γ = 2π n₂ / (λ A_eff) in 1/(W·m)."""
    if n2 <= 0 or pump_wavelength_nm <= 0 or effective_area_m2 <= 0:
        raise ValueError(
            f"nonlinear_coefficient needs positive inputs, got "
            f"n2={n2}, wavelength={pump_wavelength_nm} nm, A_eff={effective_area_m2}"
        )
    return 2.0 * np.pi * n2 / (pump_wavelength_nm * 1e-9 * effective_area_m2)


@dataclass(frozen=True)
class NonlinearParams:
    n2: float
    effective_area_m2: float
    pump_wavelength_nm: float
    gamma: float = field(default=0.0)

    def __post_init__(self):
        expected = nonlinear_coefficient(self.n2, self.pump_wavelength_nm, self.effective_area_m2)
        if self.gamma == 0.0:
            object.__setattr__(self, "gamma", expected)
        elif abs(self.gamma - expected) > 1e-12 * expected:
            raise ValueError(f"gamma {self.gamma} does not match n2/A_eff ({expected})")

    def at_pump(self, pump_wavelength_nm: float) -> "NonlinearParams":
        return replace(self, pump_wavelength_nm=pump_wavelength_nm, gamma=0.0)


@dataclass(frozen=True)
class PumpSpec:
    center_wavelength_nm: float
    fwhm_bandwidth_nm: float
    peak_power_w: float

    def __post_init__(self):
        if self.center_wavelength_nm <= 0 or self.peak_power_w < 0 or self.fwhm_bandwidth_nm < 0:
            raise ValueError(f"PumpSpec values must be positive: {self}")
        if self.fwhm_bandwidth_nm >= self.center_wavelength_nm / 10:
            raise ValueError(
                f"Pump bandwidth {self.fwhm_bandwidth_nm} nm too wide for "
                f"{self.center_wavelength_nm} nm center"
            )


def idler_wavelength(pump_nm: float, signal_nm: float) -> float:
    """Energy-conjugate idler: 1/λi = 2/λp − 1/λs."""
    if signal_nm == pump_nm:
        return pump_nm
    inverse = 2.0 / pump_nm - 1.0 / signal_nm
    if inverse <= 0:
        raise PhaseMatchDomainError(
            f"Signal {signal_nm:g} nm has no energy-conjugate idler for pump {pump_nm:g} nm"
        )
    return 1.0 / inverse


@dataclass(frozen=True)
class PhaseMatchSolution:
    pump_wavelength_nm: float
    signal_wavelength_nm: float
    idler_wavelength_nm: float
    peak_power_w: float
    signal_fwhm_nm: float = 0.0
    idler_fwhm_nm: float = 0.0
    residual_rad_per_m: float = 0.0

    def energy_mismatch(self) -> float:
        """Relative violation of 1/λs + 1/λi = 2/λp."""
        lhs = 1.0 / self.signal_wavelength_nm + 1.0 / self.idler_wavelength_nm
        rhs = 2.0 / self.pump_wavelength_nm
        return abs(lhs - rhs) / rhs


@dataclass
class PhaseMatchCurve:
    solutions: list[PhaseMatchSolution] = field(default_factory=list)
    gaps_nm: list[float] = field(default_factory=list)
