import math

import pytest

from inference.estimators import background_bounds, lumped_efficiencies, weighted_mean
from inference.interface import (
    DegenerateRecordError,
    EfficiencyEstimate,
    InferenceArgumentError,
    PredictedEfficiencyRange,
)
from inference.records import record_from_rates


def _make_record(n_s=2.89e6, n_i=1.52e6, c_raw=3.6e5, c_b=0.4e5, duration_s=1.0):
    return record_from_rates(0.54, n_s, n_i, c_raw, c_b, duration_s=duration_s)


# ── lumped_efficiencies() ──────────────────────────────────────────


def test_high_power_column():
    estimate = lumped_efficiencies(_make_record())
    assert estimate.signal_lumped == pytest.approx(0.2105, abs=5e-4)
    assert estimate.idler_lumped == pytest.approx(0.1107, abs=5e-4)
    assert estimate.pair_rate == pytest.approx(1.373e7, rel=1e-3)


def test_low_power_column():
    estimate = lumped_efficiencies(_make_record(3.4e5, 1.9e5, 3.9e4, 0.1e4))
    assert estimate.signal_lumped == pytest.approx(0.200)
    assert estimate.idler_lumped == pytest.approx(0.1118, abs=5e-4)
    assert estimate.pair_rate == pytest.approx(1.7e6)


def test_efficiency_times_partner_singles_is_net():
    record = _make_record()
    estimate = lumped_efficiencies(record)
    assert estimate.signal_lumped * record.n_i == pytest.approx(record.net_coincidences)
    assert estimate.idler_lumped * record.n_s == pytest.approx(record.net_coincidences)
    assert estimate.signal_lumped * estimate.idler_lumped * estimate.pair_rate == pytest.approx(
        record.net_coincidences
    )


def test_scaling_all_rates_keeps_efficiencies():
    base = lumped_efficiencies(_make_record())
    scaled = lumped_efficiencies(_make_record(2.89e7, 1.52e7, 3.6e6, 0.4e6))
    assert scaled.signal_lumped == pytest.approx(base.signal_lumped)
    assert scaled.idler_lumped == pytest.approx(base.idler_lumped)
    assert scaled.pair_rate == pytest.approx(10 * base.pair_rate)


def test_accidentals_at_raw_level_are_degenerate():
    with pytest.raises(DegenerateRecordError, match="No coincidences above accidentals"):
        lumped_efficiencies(_make_record(c_raw=1e4, c_b=1e4))


def test_zero_singles_rejected():
    with pytest.raises(InferenceArgumentError, match="Singles"):
        lumped_efficiencies(_make_record(n_s=0.0, c_raw=0.0, c_b=0.0))


def test_uncertainty_shrinks_with_integration_time():
    short = lumped_efficiencies(_make_record(duration_s=1.0))
    long = lumped_efficiencies(_make_record(duration_s=4.0))
    assert short.signal_sigma > 0
    assert long.signal_sigma == pytest.approx(short.signal_sigma / 2)
    assert long.pair_rate_sigma == pytest.approx(short.pair_rate_sigma / 2)


def test_signal_uncertainty_from_poisson_counts():
    record = _make_record(c_b=0.0)
    estimate = lumped_efficiencies(record)
    rel = 1 / record.c_raw + 1 / record.n_i
    assert estimate.signal_sigma == pytest.approx(estimate.signal_lumped * math.sqrt(rel))


# ── background_bounds() ────────────────────────────────────────────


def test_bounds_when_measured_below_prediction():
    estimate = EfficiencyEstimate(signal_lumped=0.200, idler_lumped=0.112, pair_rate=1.0)
    bounds = background_bounds(estimate, PredictedEfficiencyRange())
    assert bounds.idler_fraction == pytest.approx((1 - 0.200 / 0.211, 1 - 0.200 / 0.229))
    assert bounds.signal_fraction == pytest.approx((0.0, 1 - 0.112 / 0.119))


def test_bounds_clamp_to_unit_interval():
    estimate = EfficiencyEstimate(signal_lumped=0.5, idler_lumped=1e-6, pair_rate=1.0)
    bounds = background_bounds(estimate, PredictedEfficiencyRange())
    assert bounds.idler_fraction == (0.0, 0.0)
    lo, hi = bounds.signal_fraction
    assert 0.0 <= lo <= hi <= 1.0


def test_predicted_range_must_be_ordered():
    with pytest.raises(InferenceArgumentError, match="lo <= hi"):
        PredictedEfficiencyRange(signal_lo=0.3, signal_hi=0.2)


# ── weighted_mean() ────────────────────────────────────────────────


def test_inverse_variance_mean():
    result = weighted_mean([1.0, 3.0], [1.0, 1.0])
    assert result.value == pytest.approx(2.0)
    assert result.sigma == pytest.approx(1 / math.sqrt(2))


def test_heavier_weight_pulls_mean():
    result = weighted_mean([1.0, 3.0], [0.1, 1.0])
    assert result.value < 1.1


def test_zero_sigma_falls_back_to_plain_mean():
    result = weighted_mean([1.0, 3.0], [0.0, 0.0])
    assert result.value == pytest.approx(2.0)
    assert result.sigma == pytest.approx(1.0)


def test_weighted_mean_rejects_empty():
    with pytest.raises(InferenceArgumentError):
        weighted_mean([], [])
