"""Fundamental-mode dispersion of a silica strand in air.

The HE11 mode is found from the exact two-layer step-index characteristic
equation (no weak-guidance approximation; the air cladding gives a large
index step). Written in the normalized transverse wavenumbers

    u = a k0 sqrt(n1² − n_eff²),   w = a k0 sqrt(n_eff² − n2²),   V² = u² + w²

the HE branch of the vector eigenvalue equation for azimuthal order 1 reads

    J0(u)/(u J1(u)) + c·K1'(w)/(w K1(w)) − 1/u² + R = 0

with c = (n1² + n2²)/(2 n1²) and
R = sqrt(((n1² − n2²)/(2 n1²))² (K1'/(w K1))² + (n_eff/n1)² (1/u² + 1/w²)²).
HE11 is the only HE root with u below the first zero of J0.
"""

import logging
from functools import lru_cache

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.optimize import brentq
from scipy.special import j0, j1, k0e, k1e

from dispersion.interface import (
    BracketError,
    DispersionCurve,
    DispersionSample,
    FiberModel,
    ModeCutoffError,
    WavelengthDomainError,
)
from dispersion.sellmeier import material_index

logger = logging.getLogger("pairsource.dispersion")

J0_FIRST_ZERO = 2.404825557695773
SCAN_POINTS = 64
DEFAULT_GVD_STEP_NM = 0.25


def _he11_residual(u, v: float, n1: float, n2: float):
    u = np.asarray(u, dtype=float)
    w = np.sqrt(v * v - u * u)
    n1_sq, n2_sq = n1 * n1, n2 * n2
    n_eff_sq = n1_sq - u * u * (n1_sq - n2_sq) / (v * v)

    j_term = j0(u) / (u * j1(u))
    # K1'(w) = -K0(w) - K1(w)/w; exponentially scaled Bessels keep the ratio finite
    k_term = (-k0e(w) / k1e(w) - 1.0 / w) / w

    inv_sum = 1.0 / (u * u) + 1.0 / (w * w)
    c_plus = (n1_sq + n2_sq) / (2.0 * n1_sq)
    c_minus = (n1_sq - n2_sq) / (2.0 * n1_sq)
    r = np.sqrt((c_minus * k_term) ** 2 + (n_eff_sq / n1_sq) * inv_sum**2)
    return j_term + c_plus * k_term - 1.0 / (u * u) + r


@lru_cache(maxsize=65536)
def _solve_he11(fiber: FiberModel, wavelength_nm: float) -> float:
    n1 = material_index(fiber.material, wavelength_nm)
    n2 = fiber.cladding_index
    if n1 <= n2:
        raise ModeCutoffError(
            f"Core index {n1:.6f} not above cladding {n2:.6f} at {wavelength_nm:g} nm"
        )

    k0 = 2.0 * np.pi / (wavelength_nm * 1e-9)
    v = fiber.radius_m * k0 * np.sqrt(n1 * n1 - n2 * n2)
    u_hi = min(v, J0_FIRST_ZERO) * (1.0 - 1e-9)

    grid = np.linspace(u_hi * 1e-3, u_hi, SCAN_POINTS)
    values = _he11_residual(grid, v, n1, n2)
    crossings = np.nonzero((values[:-1] > 0) & (values[1:] <= 0))[0]
    if crossings.size == 0:
        raise ModeCutoffError(f"No guided HE11 root at {wavelength_nm:g} nm (V = {v:.4f})")

    i = int(crossings[0])
    u = brentq(lambda x: float(_he11_residual(x, v, n1, n2)), grid[i], grid[i + 1], xtol=1e-15)
    n_eff = float(np.sqrt(n1 * n1 - u * u * (n1 * n1 - n2 * n2) / (v * v)))

    if not n2 < n_eff < n1:
        raise ModeCutoffError(
            f"Root n_eff={n_eff:.8f} not between cladding {n2} and core {n1:.8f}"
        )
    return n_eff


def effective_index(fiber: FiberModel, wavelength_nm: float) -> float:
    """Effective index of the HE11 mode at `wavelength_nm`."""
    return _solve_he11(fiber, float(wavelength_nm))


def propagation_constant(fiber: FiberModel, wavelength_nm: float) -> float:
    """β = 2π n_eff / λ in rad/m."""
    return 2.0 * np.pi * effective_index(fiber, wavelength_nm) / (wavelength_nm * 1e-9)


def _beta_of_omega(fiber: FiberModel, omega: float) -> float:
    wavelength_nm = 2.0 * np.pi * SPEED_OF_LIGHT / omega * 1e9
    return effective_index(fiber, wavelength_nm) * omega / SPEED_OF_LIGHT


def _second_difference(fiber: FiberModel, omega: float, h: float) -> float:
    plus = _beta_of_omega(fiber, omega + h)
    minus = _beta_of_omega(fiber, omega - h)
    center = _beta_of_omega(fiber, omega)
    return (plus - 2.0 * center + minus) / (h * h)


def group_velocity_dispersion(
    fiber: FiberModel,
    wavelength_nm: float,
    step_nm: float = DEFAULT_GVD_STEP_NM,
    richardson: bool = True,
) -> float:
    """β₂ = d²β/dω² in s²/m by central differences in angular frequency.

    Positive is normal dispersion, negative anomalous.
    """
    if step_nm <= 0:
        raise ValueError(f"step_nm must be > 0, got {step_nm}")
    lo, hi = fiber.material.valid_range_nm
    if not lo + 2 * step_nm <= wavelength_nm <= hi - 2 * step_nm:
        raise WavelengthDomainError(
            f"{wavelength_nm:g} nm is within two steps of the range edge [{lo:g}, {hi:g}] nm"
        )

    omega = 2.0 * np.pi * SPEED_OF_LIGHT / (wavelength_nm * 1e-9)
    h = omega * step_nm / wavelength_nm

    coarse = _second_difference(fiber, omega, h)
    if not richardson:
        return coarse
    fine = _second_difference(fiber, omega, h / 2.0)
    return (4.0 * fine - coarse) / 3.0


def dispersion_parameter(beta2: float, wavelength_nm: float) -> float:
    """Convert β₂ [s²/m] to D [ps/(nm·km)]."""
    wavelength_m = wavelength_nm * 1e-9
    return -2.0 * np.pi * SPEED_OF_LIGHT * beta2 / wavelength_m**2 * 1e6


def find_zero_dispersion(
    fiber: FiberModel,
    bracket: tuple[float, float],
    tol_nm: float = 0.01,
) -> float:
    """Wavelength in `bracket` where β₂ changes sign."""
    lo, hi = bracket
    if not lo < hi:
        raise BracketError(f"Bracket must be increasing, got ({lo:g}, {hi:g})")

    beta2_lo = group_velocity_dispersion(fiber, lo)
    beta2_hi = group_velocity_dispersion(fiber, hi)
    if np.sign(beta2_lo) == np.sign(beta2_hi):
        raise BracketError(
            f"No sign change of beta2 in ({lo:g}, {hi:g}) nm: "
            f"{beta2_lo:.3e} and {beta2_hi:.3e} s^2/m"
        )

    root = brentq(lambda lam: group_velocity_dispersion(fiber, lam), lo, hi, xtol=tol_nm)
    logger.debug(f"Zero dispersion at {root:.3f} nm for d={fiber.core_diameter_um} um")
    return float(root)


def dispersion_curve(
    fiber: FiberModel,
    wavelength_range_nm: tuple[float, float],
    n_points: int,
) -> DispersionCurve:
    """Sample n_eff, β and β₂ on an even grid and locate λ₀ if β₂ crosses zero."""
    lo, hi = wavelength_range_nm
    if not lo < hi:
        raise BracketError(f"Wavelength range must be increasing, got ({lo:g}, {hi:g})")
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")

    samples = []
    for wavelength in np.linspace(lo, hi, n_points):
        wavelength = float(wavelength)
        samples.append(
            DispersionSample(
                wavelength_nm=wavelength,
                n_eff=effective_index(fiber, wavelength),
                beta=propagation_constant(fiber, wavelength),
                beta2=group_velocity_dispersion(fiber, wavelength),
            )
        )

    zero = None
    for left, right in zip(samples, samples[1:]):
        if np.sign(left.beta2) != np.sign(right.beta2):
            zero = find_zero_dispersion(fiber, (left.wavelength_nm, right.wavelength_nm))
            break

    logger.info(
        f"Dispersion curve: {n_points} samples over {lo:g}-{hi:g} nm, "
        f"zero dispersion at {zero if zero is None else f'{zero:.2f} nm'}"
    )
    return DispersionCurve(samples=samples, zero_dispersion_wavelength_nm=zero)
