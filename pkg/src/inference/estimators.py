"""Lumped efficiencies, pair rate and background bounds from singles and coincidences.

With C = C_raw − C_b, each arm's lumped efficiency is the fraction of the
other arm's detections that found a partner: η_s = C/N_i, η_i = C/N_s, and
the pair rate in the fiber is r = C/(η_s·η_i) = N_s·N_i/C.
"""

import logging
import math
from collections.abc import Sequence

import numpy as np

from inference.interface import (
    BackgroundBounds,
    DegenerateRecordError,
    EfficiencyEstimate,
    InferenceArgumentError,
    PredictedEfficiencyRange,
    WeightedEfficiency,
)
from source_sim.interface import CountRecord

logger = logging.getLogger("pairsource.estimators")


def _rate_variance(rate: float, duration_s: float, peaks: int = 1) -> float:
    """Poisson variance of a rate built from `rate·duration` counts, averaged over `peaks`."""
    return rate / (duration_s * max(peaks, 1))


def lumped_efficiencies(record: CountRecord) -> EfficiencyEstimate:
    if record.n_s <= 0 or record.n_i <= 0:
        raise InferenceArgumentError(
            f"Singles rates must be > 0, got N_s={record.n_s}, N_i={record.n_i}"
        )
    net = record.c_raw - record.c_b
    if net <= 0:
        raise DegenerateRecordError(
            f"No coincidences above accidentals (C_raw={record.c_raw}, C_b={record.c_b})"
        )

    eta_s = net / record.n_i
    eta_i = net / record.n_s
    pair_rate = record.n_s * record.n_i / net

    duration = record.duration_s
    var_net = _rate_variance(record.c_raw, duration) + _rate_variance(
        record.c_b, duration, record.raw_counts.satellite_peaks
    )
    rel_net = var_net / net**2
    rel_s = _rate_variance(record.n_s, duration) / record.n_s**2
    rel_i = _rate_variance(record.n_i, duration) / record.n_i**2

    estimate = EfficiencyEstimate(
        signal_lumped=eta_s,
        idler_lumped=eta_i,
        pair_rate=pair_rate,
        signal_sigma=eta_s * math.sqrt(rel_net + rel_i),
        idler_sigma=eta_i * math.sqrt(rel_net + rel_s),
        pair_rate_sigma=pair_rate * math.sqrt(rel_net + rel_s + rel_i),
    )
    logger.debug(
        f"η_s={eta_s:.4f}±{estimate.signal_sigma:.4f} η_i={eta_i:.4f}±{estimate.idler_sigma:.4f} "
        f"r={pair_rate:.4g}/s"
    )
    return estimate


def _fraction_interval(measured: float, lo: float, hi: float) -> tuple[float, float]:
    a = 1.0 - measured / lo
    b = 1.0 - measured / hi
    a, b = sorted((a, b))
    return min(max(a, 0.0), 1.0), min(max(b, 0.0), 1.0)


def background_bounds(
    estimate: EfficiencyEstimate, predicted: PredictedEfficiencyRange
) -> BackgroundBounds:
    """B/N intervals from measured vs predicted efficiencies, clamped to [0, 1].

    The signal-arm estimate is diluted by idler background (its denominator
    is N_i) and vice versa.
    """
    return BackgroundBounds(
        idler_fraction=_fraction_interval(
            estimate.signal_lumped, predicted.signal_lo, predicted.signal_hi
        ),
        signal_fraction=_fraction_interval(
            estimate.idler_lumped, predicted.idler_lo, predicted.idler_hi
        ),
    )


def weighted_mean(values: Sequence[float], sigmas: Sequence[float]) -> WeightedEfficiency:
    """Inverse-variance mean; plain mean with spread-based error if any sigma is zero."""
    if not values or len(values) != len(sigmas):
        raise InferenceArgumentError("weighted_mean needs equal-length, non-empty inputs")
    v = np.asarray(values, dtype=float)
    s = np.asarray(sigmas, dtype=float)
    if np.any(s <= 0):
        spread = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
        return WeightedEfficiency(value=float(v.mean()), sigma=spread)
    w = 1.0 / s**2
    return WeightedEfficiency(value=float(np.sum(w * v) / np.sum(w)), sigma=float(1.0 / math.sqrt(np.sum(w))))
