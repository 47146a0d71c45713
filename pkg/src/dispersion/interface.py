from dataclasses import dataclass, field


class DispersionError(Exception):
    """Base class for dispersion-model failures."""


class WavelengthDomainError(DispersionError, ValueError):
    pass


class ModeCutoffError(DispersionError):
    pass


class BracketError(DispersionError, ValueError):
    pass


@dataclass(frozen=True)
class SellmeierTerm:
    strength: float
    resonance_wavelength_um: float


@dataclass(frozen=True)
class SellmeierModel:
    """Three-term (or n-term) Sellmeier material: n² = 1 + Σ Bλ²/(λ² − λᵣ²)."""

    terms: tuple[SellmeierTerm, ...]
    valid_range_um: tuple[float, float]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("SellmeierModel needs at least one term")
        for term in self.terms:
            if term.strength <= 0 or term.resonance_wavelength_um <= 0:
                raise ValueError(f"Sellmeier term must be positive: {term}")
        lo, hi = self.valid_range_um
        if not 0 < lo < hi:
            raise ValueError(f"Invalid Sellmeier range: {self.valid_range_um}")
        for term in self.terms:
            if lo <= term.resonance_wavelength_um <= hi:
                raise ValueError(
                    f"Resonance at {term.resonance_wavelength_um} um lies inside the valid range"
                )

    @property
    def valid_range_nm(self) -> tuple[float, float]:
        lo, hi = self.valid_range_um
        return lo * 1e3, hi * 1e3


# Malitson (1965) fused silica, 0.21-3.71 um at 20 C.
FUSED_SILICA = SellmeierModel(
    terms=(
        SellmeierTerm(0.6961663, 0.0684043),
        SellmeierTerm(0.4079426, 0.1162414),
        SellmeierTerm(0.8974794, 9.896161),
    ),
    valid_range_um=(0.21, 3.71),
)


@dataclass(frozen=True)
class FiberModel:
    """Circular silica strand of diameter `core_diameter_um` surrounded by `cladding_index`."""

    core_diameter_um: float = 1.988
    cladding_index: float = 1.0
    material: SellmeierModel = FUSED_SILICA

    def __post_init__(self):
        if self.core_diameter_um <= 0:
            raise ValueError(f"core_diameter_um must be > 0, got {self.core_diameter_um}")
        if self.cladding_index < 1.0:
            raise ValueError(f"cladding_index must be >= 1, got {self.cladding_index}")

    @property
    def radius_m(self) -> float:
        return self.core_diameter_um * 0.5e-6

    @property
    def core_area_m2(self) -> float:
        return 3.141592653589793 * self.radius_m**2


@dataclass(frozen=True)
class DispersionSample:
    wavelength_nm: float
    n_eff: float
    beta: float
    beta2: float


@dataclass
class DispersionCurve:
    samples: list[DispersionSample] = field(default_factory=list)
    zero_dispersion_wavelength_nm: float | None = None

    def __post_init__(self):
        wavelengths = [s.wavelength_nm for s in self.samples]
        if any(b <= a for a, b in zip(wavelengths, wavelengths[1:])):
            raise ValueError("DispersionCurve wavelengths must be strictly increasing")
