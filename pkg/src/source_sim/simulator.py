"""Monte Carlo of a pulsed pair source and a two-detector counting chain.

Per pump pulse the number of pairs is Poisson(μ). Each photon of each pair
is detected independently with its arm's lumped efficiency, so a detector
clicks when at least one of its photons survives or a background count
lands in that pulse. Clicks are time-stamped at the pulse time plus
Gaussian detector jitter; an optional non-paralyzable dead time is applied
per detector before the time-interval analysis.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from source_sim.backgrounds import build_background_model
from source_sim.export import save_events
from source_sim.interface import (
    CountRecord,
    DetectionEvents,
    RawCounts,
    SimulationArgumentError,
    SourceConfig,
    TiaHistogram,
    TrueCounts,
)
from source_sim.tia import (
    DEFAULT_BIN_WIDTH_S,
    DEFAULT_SATELLITES_PER_SIDE,
    DEFAULT_WINDOW_S,
    FWHM_PER_SIGMA,
    build_histogram,
    window_counts,
)

logger = logging.getLogger("pairsource.simulator")

MIN_PULSES = 1000
CHUNK_PULSES = 1 << 22


def get_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def mean_pairs_per_pulse(config: SourceConfig) -> float:
    """μ = κ·P_avg²."""
    return config.pair_yield_coeff * config.pump_avg_power_mw**2


def duty_cycle_scaling(config: SourceConfig, new_pulse_fwhm_s: float) -> float:
    """Pairs per pulse after changing the pulse width at fixed average power."""
    if new_pulse_fwhm_s <= 0:
        raise SimulationArgumentError(f"Pulse width must be > 0, got {new_pulse_fwhm_s}")
    return mean_pairs_per_pulse(config) * config.pulse_fwhm_s / new_pulse_fwhm_s


def with_pulse_width(config: SourceConfig, new_pulse_fwhm_s: float) -> SourceConfig:
    """Same source with a new pulse width; backgrounds, which follow average power, stay put."""
    if new_pulse_fwhm_s <= 0:
        raise SimulationArgumentError(f"Pulse width must be > 0, got {new_pulse_fwhm_s}")
    return replace(
        config,
        pulse_fwhm_s=new_pulse_fwhm_s,
        pair_yield_coeff=config.pair_yield_coeff * config.pulse_fwhm_s / new_pulse_fwhm_s,
    )


def background_rates(config: SourceConfig) -> tuple[float, float]:
    return build_background_model(config.background_mode).rates(config)


@dataclass(frozen=True)
class ExpectedRates:
    n_s: float
    n_i: float
    c_raw: float
    c_b: float


def expected_rates(config: SourceConfig) -> ExpectedRates:
    """Closed-form detection rates for the Poisson pair / Bernoulli thinning model (no dead time)."""
    f = config.rep_rate_hz
    mu = mean_pairs_per_pulse(config)
    eta_s, eta_i = config.signal_lumped_eff, config.idler_lumped_eff
    bg_s, bg_i = background_rates(config)

    quiet_s = math.exp(-bg_s / f)
    quiet_i = math.exp(-bg_i / f)
    no_signal = quiet_s * math.exp(-mu * eta_s)
    no_idler = quiet_i * math.exp(-mu * eta_i)
    neither = quiet_s * quiet_i * math.exp(-mu * (eta_s + eta_i - eta_s * eta_i))

    p_s = 1.0 - no_signal
    p_i = 1.0 - no_idler
    p_both = 1.0 - no_signal - no_idler + neither
    return ExpectedRates(n_s=f * p_s, n_i=f * p_i, c_raw=f * p_both, c_b=f * p_s * p_i)


def apply_dead_time(times_s: np.ndarray, dead_time_s: float) -> np.ndarray:
    """Non-paralyzable dead time: drop clicks within `dead_time_s` of the last kept click."""
    if dead_time_s <= 0 or times_s.size == 0:
        return times_s
    kept = []
    i = 0
    while i < times_s.size:
        kept.append(i)
        i = int(np.searchsorted(times_s, times_s[i] + dead_time_s, side="left"))
    return times_s[np.asarray(kept, dtype=np.int64)]


def _cross_pulse_counts(signal: np.ndarray, idler: np.ndarray, offsets: list[int]) -> int:
    total = 0
    for k in offsets:
        if k > 0:
            total += int(np.count_nonzero(signal[:-k] & idler[k:]))
        else:
            total += int(np.count_nonzero(signal[-k:] & idler[:k]))
    return total


def simulate_events(
    config: SourceConfig,
    duration_s: float,
    satellites_per_side: int = DEFAULT_SATELLITES_PER_SIDE,
) -> tuple[DetectionEvents, TrueCounts]:
    """Detection time stamps for `duration_s` of pulses, plus per-pulse ground truth."""
    n_pulses = int(round(duration_s * config.rep_rate_hz))
    if n_pulses < MIN_PULSES:
        raise SimulationArgumentError(
            f"Duration {duration_s:g} s covers {n_pulses} pulses; need at least {MIN_PULSES}"
        )

    rng = get_rng(config.rng_seed)
    period = config.period_s
    mu = mean_pairs_per_pulse(config)
    if mu >= 1.0:
        logger.warning(f"Mean pairs per pulse {mu:.3f} >= 1: deep multi-pair regime")
    bg_s, bg_i = background_rates(config)
    p_bg_s = -math.expm1(-bg_s / config.rep_rate_hz)
    p_bg_i = -math.expm1(-bg_i / config.rep_rate_hz)
    sigma = config.detector_jitter_fwhm_s / FWHM_PER_SIGMA
    offsets = [k for k in range(-satellites_per_side, satellites_per_side + 1) if k != 0]

    signal_chunks, idler_chunks = [], []
    pairs_total = 0
    coincident = 0
    accidental = 0

    for first in range(0, n_pulses, CHUNK_PULSES):
        n = min(CHUNK_PULSES, n_pulses - first)
        pairs = rng.poisson(mu, n)
        emitting = np.nonzero(pairs)[0]
        pairs_total += int(pairs.sum())

        signal = np.zeros(n, dtype=bool)
        idler = np.zeros(n, dtype=bool)
        signal[emitting] = rng.binomial(pairs[emitting], config.signal_lumped_eff) > 0
        idler[emitting] = rng.binomial(pairs[emitting], config.idler_lumped_eff) > 0
        if p_bg_s > 0:
            signal |= rng.random(n) < p_bg_s
        if p_bg_i > 0:
            idler |= rng.random(n) < p_bg_i

        coincident += int(np.count_nonzero(signal & idler))
        accidental += _cross_pulse_counts(signal, idler, offsets)

        s_idx = np.nonzero(signal)[0] + first
        i_idx = np.nonzero(idler)[0] + first
        signal_chunks.append(s_idx * period + rng.normal(0.0, sigma, s_idx.size))
        idler_chunks.append(i_idx * period + rng.normal(0.0, sigma, i_idx.size))

    signal_times = apply_dead_time(np.sort(np.concatenate(signal_chunks)), config.dead_time_s)
    idler_times = apply_dead_time(np.sort(np.concatenate(idler_chunks)), config.dead_time_s)

    truth = TrueCounts(
        pulses=n_pulses,
        pairs=pairs_total,
        coincident_pulses=coincident,
        accidental_mean=accidental / len(offsets),
    )
    events = DetectionEvents(
        signal_times_s=signal_times,
        idler_times_s=idler_times,
        duration_s=n_pulses * period,
    )
    return events, truth


def simulate_run(
    config: SourceConfig,
    duration_s: float,
    window_s: float = DEFAULT_WINDOW_S,
    satellites_per_side: int = DEFAULT_SATELLITES_PER_SIDE,
    bin_width_s: float = DEFAULT_BIN_WIDTH_S,
    pileup_correction: bool = True,
    events_path: str | None = None,
) -> tuple[CountRecord, TiaHistogram]:
    """Simulate one acquisition and reduce it to a CountRecord and its TIA histogram.

    With `events_path` the raw click stream is also written as a JSON-lines log.
    """
    events, truth = simulate_events(config, duration_s, satellites_per_side)
    if events_path is not None:
        save_events(events, events_path, metadata={"config": config.to_dict()})
    hist = build_histogram(
        events,
        config.rep_rate_hz,
        bin_width_s=bin_width_s,
        stop_delay_s=config.stop_delay_periods * config.period_s,
    )
    raw_central, raw_satellites, central, satellite_mean = window_counts(
        hist, config.rep_rate_hz, window_s, satellites_per_side, pileup_correction
    )

    duration = events.duration_s
    record = CountRecord(
        duration_s=duration,
        n_s=events.signal_times_s.size / duration,
        n_i=events.idler_times_s.size / duration,
        c_raw=central / duration,
        c_b=satellite_mean / duration,
        raw_counts=RawCounts(
            signal=int(events.signal_times_s.size),
            idler=int(events.idler_times_s.size),
            central=raw_central,
            satellites=raw_satellites,
            satellite_peaks=2 * satellites_per_side,
        ),
        pump_power_mw=config.pump_avg_power_mw,
        config=config.to_dict(),
        true_counts=truth,
    )

    pileup = 1.0 - raw_central / central if central > 0 else 0.0
    if pileup > 0.10:
        logger.warning(f"Start-stop pile-up removed {pileup:.1%} of the central peak")
    for flag in record.flags():
        logger.warning(f"Record at {config.pump_avg_power_mw} mW flagged: {flag}")
    logger.info(
        f"Simulated {truth.pulses} pulses at {config.pump_avg_power_mw} mW: "
        f"N_s={record.n_s:.4g}/s N_i={record.n_i:.4g}/s "
        f"C_raw={record.c_raw:.4g}/s C_b={record.c_b:.4g}/s"
    )
    return record, hist
