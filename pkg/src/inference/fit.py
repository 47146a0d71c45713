import logging
from collections.abc import Sequence

import numpy as np

from inference.interface import FilteredProjection, InferenceArgumentError, QuadraticFit

logger = logging.getLogger("pairsource.fit")


def fit_quadratic_rate(points: Sequence[tuple[float, float]]) -> QuadraticFit:
    """Least-squares C = A·P² with no linear or constant term."""
    if not points:
        raise InferenceArgumentError("Quadratic fit needs at least one (power, rate) point")
    powers = np.asarray([p for p, _ in points], dtype=float)
    rates = np.asarray([c for _, c in points], dtype=float)
    if not np.any(powers != 0):
        raise InferenceArgumentError("Quadratic fit needs at least one nonzero power")
    if np.unique(powers).size != powers.size:
        logger.warning("Quadratic fit has repeated powers")

    design = (powers**2)[:, np.newaxis]
    solution, *_ = np.linalg.lstsq(design, rates, rcond=None)
    coefficient = float(solution[0])
    residuals = rates - coefficient * powers**2

    logger.info(f"Quadratic fit over {powers.size} point(s): A = {coefficient:.4g} /s/mW²")
    return QuadraticFit(
        coefficient=coefficient,
        powers_mw=powers.tolist(),
        rates=rates.tolist(),
        residuals=residuals.tolist(),
    )


def project_filtered_source(
    coefficient: float,
    power_mw: float,
    transmission_per_arm: float = 0.5,
    spectral_fraction: float = 1.0 / 15.0,
    rep_rate_hz: float = 80e6,
) -> FilteredProjection:
    """Detected pair rate and four-fold rate behind narrowband filters.

    The transmission penalty applies once per arm, the spectral fraction
    once per pair. Four-fold events need two pairs in one pulse.
    """
    if power_mw <= 0:
        raise InferenceArgumentError(f"Pump power must be > 0, got {power_mw}")
    if rep_rate_hz <= 0:
        raise InferenceArgumentError(f"Repetition rate must be > 0, got {rep_rate_hz}")
    for name, value in (
        ("transmission_per_arm", transmission_per_arm),
        ("spectral_fraction", spectral_fraction),
    ):
        if not 0 < value <= 1:
            raise InferenceArgumentError(f"{name} must be in (0, 1], got {value}")

    pair_rate = coefficient * power_mw**2 * transmission_per_arm**2 * spectral_fraction
    fourfold = (pair_rate / rep_rate_hz) ** 2 * rep_rate_hz
    return FilteredProjection(
        pair_rate=pair_rate,
        fourfold_rate=fourfold,
        power_mw=power_mw,
        coefficient=coefficient,
        transmission_per_arm=transmission_per_arm,
        spectral_fraction=spectral_fraction,
        rep_rate_hz=rep_rate_hz,
    )
