"""Start-stop time-interval analysis of signal/idler detections.

Signal clicks start the analyzer, idler clicks (delayed by a fixed stop
delay) stop it. Each start is paired with the first stop that follows it,
so peaks sit at `k / rep_rate` relative to the delay. A start-stop
analyzer under-counts later peaks (a start already stopped cannot count
again); `extract_rates` undoes this with the Coates correction applied
to each peak window as a whole.
"""

import logging
import math

import numpy as np
from scipy.stats import chi2 as chi2_distribution

from source_sim.interface import DetectionEvents, SimulationArgumentError, TiaHistogram

logger = logging.getLogger("pairsource.tia")

DEFAULT_BIN_WIDTH_S = 50e-12
DEFAULT_WINDOW_S = 2e-9
DEFAULT_SATELLITES_PER_SIDE = 2
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


def build_histogram(
    events: DetectionEvents,
    rep_rate_hz: float,
    bin_width_s: float = DEFAULT_BIN_WIDTH_S,
    stop_delay_s: float | None = None,
) -> TiaHistogram:
    """Histogram of (stop − start − delay) over ±stop_delay."""
    if rep_rate_hz <= 0:
        raise SimulationArgumentError(f"rep_rate_hz must be > 0, got {rep_rate_hz}")
    period = 1.0 / rep_rate_hz
    if not 0 < bin_width_s <= period / 10:
        raise SimulationArgumentError(
            f"bin width {bin_width_s:g} s must be in (0, {period / 10:g}] s"
        )
    delay = 3.5 * period if stop_delay_s is None else stop_delay_s

    n_bins = int(math.ceil(2.0 * delay / bin_width_s))
    counts = np.zeros(n_bins, dtype=np.int64)
    starts = np.sort(np.asarray(events.signal_times_s, dtype=float))
    stops = np.sort(np.asarray(events.idler_times_s, dtype=float)) + delay

    if starts.size and stops.size:
        nxt = np.searchsorted(stops, starts, side="right")
        paired = nxt < stops.size
        offsets = stops[nxt[paired]] - starts[paired] - delay
        offsets = offsets[offsets < delay]
        bins = np.floor((offsets + delay) / bin_width_s).astype(np.int64)
        bins = bins[(bins >= 0) & (bins < n_bins)]
        counts += np.bincount(bins, minlength=n_bins)

    hist = TiaHistogram(
        bin_width_s=bin_width_s,
        origin_s=-delay,
        counts=counts,
        starts=int(starts.size),
        duration_s=events.duration_s,
    )
    logger.debug(f"TIA histogram: {hist.total} intervals from {hist.starts} starts, {n_bins} bins")
    return hist


def pileup_corrected(hist: TiaHistogram, mask: np.ndarray) -> float:
    """Coates correction of one peak window: W · S / (S − counts before the window)."""
    window = float(hist.counts[mask].sum())
    if hist.starts <= 0 or window == 0:
        return window
    first = int(np.argmax(mask))
    earlier = float(hist.counts[:first].sum())
    remaining = max(hist.starts - earlier, 1.0)
    return window * hist.starts / remaining


def _peak_mask(hist: TiaHistogram, center_s: float, window_s: float) -> np.ndarray:
    centers = hist.bin_centers_s
    return (centers >= center_s - window_s / 2) & (centers < center_s + window_s / 2)


def _window_value(hist: TiaHistogram, mask: np.ndarray, pileup_correction: bool) -> float:
    if pileup_correction:
        return pileup_corrected(hist, mask)
    return float(hist.counts[mask].sum())


def _check_windows(hist: TiaHistogram, rep_rate_hz: float, window_s: float, satellites_per_side: int) -> float:
    period = 1.0 / rep_rate_hz
    if not 0 < window_s <= period / 2:
        raise SimulationArgumentError(
            f"Coincidence window {window_s:g} s must be in (0, {period / 2:g}] s"
        )
    if satellites_per_side < 1:
        raise SimulationArgumentError("Need at least one satellite peak per side")
    reach = satellites_per_side * period + window_s / 2
    span_lo = hist.origin_s
    span_hi = hist.origin_s + hist.counts.size * hist.bin_width_s
    if span_lo > -reach + 1e-15 or span_hi < reach - 1e-15:
        raise SimulationArgumentError(
            f"Histogram span [{span_lo:g}, {span_hi:g}] s does not cover "
            f"{satellites_per_side} satellite(s) per side"
        )
    return period


def window_counts(
    hist: TiaHistogram,
    rep_rate_hz: float,
    window_s: float = DEFAULT_WINDOW_S,
    satellites_per_side: int = DEFAULT_SATELLITES_PER_SIDE,
    pileup_correction: bool = True,
) -> tuple[int, int, float, float]:
    """(raw central, raw satellite total, corrected central, corrected satellite mean) counts."""
    period = _check_windows(hist, rep_rate_hz, window_s, satellites_per_side)

    central_mask = _peak_mask(hist, 0.0, window_s)
    raw_central = int(hist.counts[central_mask].sum())
    central = _window_value(hist, central_mask, pileup_correction)

    raw_satellites = 0
    satellite_values = []
    for k in range(1, satellites_per_side + 1):
        for sign in (-1, 1):
            mask = _peak_mask(hist, sign * k * period, window_s)
            raw_satellites += int(hist.counts[mask].sum())
            satellite_values.append(_window_value(hist, mask, pileup_correction))

    return raw_central, raw_satellites, central, float(np.mean(satellite_values))


def extract_rates(
    hist: TiaHistogram,
    rep_rate_hz: float,
    window_s: float = DEFAULT_WINDOW_S,
    satellites_per_side: int = DEFAULT_SATELLITES_PER_SIDE,
    pileup_correction: bool = True,
) -> tuple[float, float]:
    """Central-peak rate C_raw and mean satellite-peak rate C_b, in counts/s."""
    if hist.duration_s <= 0:
        raise SimulationArgumentError("Histogram has no acquisition duration")
    _, _, central, satellite_mean = window_counts(
        hist, rep_rate_hz, window_s, satellites_per_side, pileup_correction
    )
    return central / hist.duration_s, satellite_mean / hist.duration_s


def accidental_chi2(
    hist: TiaHistogram,
    rep_rate_hz: float,
    window_s: float = DEFAULT_WINDOW_S,
    satellites_per_side: int = 3,
) -> tuple[float, float]:
    """χ² homogeneity of the central peak and satellites; returns (χ², p-value)."""
    period = _check_windows(hist, rep_rate_hz, window_s, satellites_per_side)
    peaks = [
        pileup_corrected(hist, _peak_mask(hist, k * period, window_s))
        for k in range(-satellites_per_side, satellites_per_side + 1)
    ]
    mean = float(np.mean(peaks))
    if mean <= 0:
        return 0.0, 1.0
    statistic = float(sum((p - mean) ** 2 for p in peaks) / mean)
    p_value = float(chi2_distribution.sf(statistic, df=len(peaks) - 1))
    return statistic, p_value


def peak_positions(hist: TiaHistogram, rep_rate_hz: float) -> list[float]:
    """Count-weighted centroid of each peak fully covered by the histogram, in time order."""
    period = 1.0 / rep_rate_hz
    span_lo = hist.origin_s
    span_hi = hist.origin_s + hist.counts.size * hist.bin_width_s
    centers = hist.bin_centers_s
    positions = []
    k = math.ceil((span_lo + period / 2) / period)
    while k * period + period / 2 <= span_hi + 1e-15:
        mask = _peak_mask(hist, k * period, period / 2)
        weights = hist.counts[mask]
        if weights.sum() > 0:
            positions.append(float(np.average(centers[mask], weights=weights)))
        k += 1
    return positions


def peak_fwhm(hist: TiaHistogram, center_s: float = 0.0, window_s: float = DEFAULT_WINDOW_S) -> float:
    """FWHM of a peak from its second moment, assuming a Gaussian shape."""
    mask = _peak_mask(hist, center_s, window_s)
    weights = hist.counts[mask].astype(float)
    if weights.sum() <= 0:
        return 0.0
    times = hist.bin_centers_s[mask]
    mean = np.average(times, weights=weights)
    variance = np.average((times - mean) ** 2, weights=weights) - hist.bin_width_s**2 / 12.0
    return FWHM_PER_SIGMA * math.sqrt(max(variance, 0.0))
