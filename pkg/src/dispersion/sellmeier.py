import numpy as np

from dispersion.interface import SellmeierModel, WavelengthDomainError


def _check_range(model: SellmeierModel, wavelength_nm: float) -> None:
    lo, hi = model.valid_range_nm
    if not lo <= wavelength_nm <= hi:
        raise WavelengthDomainError(
            f"Wavelength {wavelength_nm:g} nm outside Sellmeier range [{lo:g}, {hi:g}] nm"
        )


def material_index(model: SellmeierModel, wavelength_nm: float) -> float:
    """Refractive index n(λ) of the bulk material."""
    _check_range(model, wavelength_nm)
    x2 = (wavelength_nm * 1e-3) ** 2
    n2 = 1.0 + sum(
        t.strength * x2 / (x2 - t.resonance_wavelength_um**2) for t in model.terms
    )
    return float(np.sqrt(n2))
