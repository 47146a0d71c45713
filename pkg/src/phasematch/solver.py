import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np
from scipy.optimize import brentq

from dispersion.interface import DispersionError, FiberModel
from dispersion.strand import group_velocity_dispersion, propagation_constant
from phasematch.interface import (
    NoPhaseMatchError,
    NonlinearParams,
    PhaseMatchCurve,
    PhaseMatchDomainError,
    PhaseMatchSolution,
    PumpSpec,
    RegimeError,
    SidebandBranch,
    idler_wavelength,
    nonlinear_coefficient,
)

logger = logging.getLogger("pairsource.phasematch")

SCAN_STEP_NM = 0.5
DEGENERACY_GAP_NM = 1.0
ROOT_XTOL_NM = 1e-9
SLOPE_STEP_NM = 0.1
LINEWIDTH_FLOOR_NM = 0.1


def phase_mismatch(
    fiber: FiberModel,
    nl: NonlinearParams,
    pump_nm: float,
    signal_nm: float,
    peak_power_w: float,
) -> float:
    """Δk = k_i + k_s − 2k_p + 2γP in rad/m, idler fixed by energy conservation."""
    idler_nm = idler_wavelength(pump_nm, signal_nm)
    lo, hi = fiber.material.valid_range_nm
    if not (lo <= min(signal_nm, idler_nm) and max(signal_nm, idler_nm) <= hi):
        raise PhaseMatchDomainError(
            f"Signal {signal_nm:g} nm / idler {idler_nm:g} nm outside [{lo:g}, {hi:g}] nm"
        )
    try:
        k_s = propagation_constant(fiber, signal_nm)
        k_i = propagation_constant(fiber, idler_nm)
        k_p = propagation_constant(fiber, pump_nm)
    except DispersionError as e:
        raise PhaseMatchDomainError(str(e)) from e

    gamma = nonlinear_coefficient(nl.n2, pump_nm, nl.effective_area_m2)
    return k_i + k_s - 2.0 * k_p + 2.0 * gamma * peak_power_w


def _scan_grid(fiber: FiberModel, pump_nm: float, step_nm: float) -> np.ndarray:
    """Signal grid from just below the pump down to where the idler leaves the material range."""
    lo, hi = fiber.material.valid_range_nm
    lowest = max(lo, 1.0 / (2.0 / pump_nm - 1.0 / hi)) + step_nm
    top = math.floor((pump_nm - DEGENERACY_GAP_NM) / step_nm) * step_nm
    bottom = math.ceil(lowest / step_nm) * step_nm
    if top <= bottom:
        raise NoPhaseMatchError(f"Empty signal scan window for pump {pump_nm:g} nm")
    # Multiples of the step, walking away from the pump
    count = int(round((top - bottom) / step_nm)) + 1
    return top - step_nm * np.arange(count)


def solve_sidebands(
    fiber: FiberModel,
    nl: NonlinearParams,
    pump_nm: float,
    peak_power_w: float,
    branch: SidebandBranch = SidebandBranch.OUTER,
    step_nm: float = SCAN_STEP_NM,
) -> PhaseMatchSolution:
    """Nondegenerate phase-matched signal/idler pair for a pump in the normal regime.

    The scan walks away from the pump; OUTER keeps the root farthest from
    degeneracy, INNER stops at the first one.
    """
    try:
        beta2 = group_velocity_dispersion(fiber, pump_nm)
    except DispersionError as e:
        raise PhaseMatchDomainError(str(e)) from e
    if beta2 <= 0:
        raise RegimeError(
            f"Pump {pump_nm:g} nm is in the anomalous regime (beta2 = {beta2:.3e} s^2/m)"
        )

    def mismatch(signal_nm: float) -> float:
        return phase_mismatch(fiber, nl, pump_nm, signal_nm, peak_power_w)

    brackets: list[tuple[float, float]] = []
    prev_signal, prev_value = None, None
    for signal_nm in _scan_grid(fiber, pump_nm, step_nm):
        signal_nm = float(signal_nm)
        try:
            value = mismatch(signal_nm)
        except PhaseMatchDomainError:
            prev_signal, prev_value = None, None
            continue
        if prev_value is not None and np.sign(value) != np.sign(prev_value):
            brackets.append((signal_nm, prev_signal))
            if branch == SidebandBranch.INNER:
                break
        prev_signal, prev_value = signal_nm, value

    if not brackets:
        raise NoPhaseMatchError(
            f"No phase-matched sideband for pump {pump_nm:g} nm at {peak_power_w:g} W"
        )

    lo, hi = brackets[-1]
    signal_nm = float(brentq(mismatch, lo, hi, xtol=ROOT_XTOL_NM))
    solution = PhaseMatchSolution(
        pump_wavelength_nm=pump_nm,
        signal_wavelength_nm=signal_nm,
        idler_wavelength_nm=idler_wavelength(pump_nm, signal_nm),
        peak_power_w=peak_power_w,
        residual_rad_per_m=mismatch(signal_nm),
    )
    logger.debug(
        f"Pump {pump_nm:.3f} nm -> signal {solution.signal_wavelength_nm:.3f} nm, "
        f"idler {solution.idler_wavelength_nm:.3f} nm ({len(brackets)} root(s) seen)"
    )
    return solution


def phase_matching_curve(
    fiber: FiberModel,
    nl: NonlinearParams,
    pump_range_nm: tuple[float, float],
    peak_power_w: float,
    n_points: int,
    workers: int = 1,
    branch: SidebandBranch = SidebandBranch.OUTER,
) -> PhaseMatchCurve:
    """Sideband wavelengths across a pump sweep; pumps with no root are gaps."""
    lo, hi = pump_range_nm
    if n_points < 2 or not lo < hi:
        raise ValueError(f"Need n_points >= 2 and an increasing range, got {n_points}, {pump_range_nm}")

    pumps = [float(p) for p in np.linspace(lo, hi, n_points)]

    def solve(pump_nm: float) -> PhaseMatchSolution | None:
        try:
            return solve_sidebands(fiber, nl, pump_nm, peak_power_w, branch)
        except (NoPhaseMatchError, RegimeError) as e:
            logger.debug(f"Gap at pump {pump_nm:.3f} nm: {e}")
            return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(solve, pumps))
    else:
        results = [solve(p) for p in pumps]

    curve = PhaseMatchCurve()
    for pump_nm, solution in zip(pumps, results):
        if solution is None:
            curve.gaps_nm.append(pump_nm)
        else:
            curve.solutions.append(solution)

    logger.info(
        f"Phase-matching sweep {lo:g}-{hi:g} nm: {len(curve.solutions)} solved, "
        f"{len(curve.gaps_nm)} gap(s)"
    )
    return curve


def sideband_bandwidths(
    fiber: FiberModel,
    nl: NonlinearParams,
    solution: PhaseMatchSolution,
    pump: PumpSpec,
    step_nm: float = SLOPE_STEP_NM,
    floor_nm: float = LINEWIDTH_FLOOR_NM,
    branch: SidebandBranch = SidebandBranch.OUTER,
) -> tuple[float, float]:
    """FWHM of signal and idler: |dλ/dλp| along the curve times the pump FWHM, floored."""
    center = pump.center_wavelength_nm
    if abs(solution.pump_wavelength_nm - center) > 1e-9:
        raise ValueError(
            f"Solution pump {solution.pump_wavelength_nm} nm does not match requested pump {center} nm"
        )

    try:
        above = solve_sidebands(fiber, nl, center + step_nm, solution.peak_power_w, branch)
        below = solve_sidebands(fiber, nl, center - step_nm, solution.peak_power_w, branch)
    except (RegimeError, NoPhaseMatchError) as e:
        raise PhaseMatchDomainError(
            f"Slope step of {step_nm} nm around {center:g} nm left the phase-matched region: {e}"
        ) from e

    signal_slope = (above.signal_wavelength_nm - below.signal_wavelength_nm) / (2.0 * step_nm)
    idler_slope = (above.idler_wavelength_nm - below.idler_wavelength_nm) / (2.0 * step_nm)

    signal_fwhm = max(abs(signal_slope) * pump.fwhm_bandwidth_nm, floor_nm)
    idler_fwhm = max(abs(idler_slope) * pump.fwhm_bandwidth_nm, floor_nm)
    logger.debug(
        f"Slopes at {center:g} nm: signal {signal_slope:.3f}, idler {idler_slope:.3f} "
        f"-> FWHM {signal_fwhm:.3f} / {idler_fwhm:.3f} nm"
    )
    return signal_fwhm, idler_fwhm


def solve_with_bandwidths(
    fiber: FiberModel,
    nl: NonlinearParams,
    pump: PumpSpec,
    floor_nm: float = LINEWIDTH_FLOOR_NM,
    branch: SidebandBranch = SidebandBranch.OUTER,
) -> PhaseMatchSolution:
    solution = solve_sidebands(fiber, nl, pump.center_wavelength_nm, pump.peak_power_w, branch)
    signal_fwhm, idler_fwhm = sideband_bandwidths(
        fiber, nl, solution, pump, floor_nm=floor_nm, branch=branch
    )
    return replace(solution, signal_fwhm_nm=signal_fwhm, idler_fwhm_nm=idler_fwhm)


def fit_core_diameter(
    fiber: FiberModel,
    nl: NonlinearParams,
    pump_nm: float,
    peak_power_w: float,
    target_signal_nm: float,
    bracket_um: tuple[float, float] = (1.96, 2.02),
    xtol_um: float = 1e-5,
) -> float:
    """Strand diameter that puts the signal sideband at `target_signal_nm` for this pump.

    The effective area in `nl` is held fixed while the diameter moves.
    """
    lo, hi = bracket_um
    if not 0 < lo < hi:
        raise ValueError(f"Diameter bracket must be increasing and positive, got {bracket_um}")

    def offset(diameter_um: float) -> float:
        strand = replace(fiber, core_diameter_um=diameter_um)
        solution = solve_sidebands(strand, nl, pump_nm, peak_power_w)
        return solution.signal_wavelength_nm - target_signal_nm

    f_lo, f_hi = offset(lo), offset(hi)
    if np.sign(f_lo) == np.sign(f_hi):
        raise NoPhaseMatchError(
            f"Signal {target_signal_nm:g} nm not reachable for d in [{lo:g}, {hi:g}] um "
            f"(offsets {f_lo:+.2f}, {f_hi:+.2f} nm)"
        )
    diameter = float(brentq(offset, lo, hi, xtol=xtol_um))
    logger.info(f"Calibrated strand diameter {diameter:.5f} um for signal {target_signal_nm:g} nm")
    return diameter
