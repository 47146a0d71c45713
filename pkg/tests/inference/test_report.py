import json
from dataclasses import replace

import pytest

from inference.interface import InferenceArgumentError
from inference.records import record_from_rates
from inference.report import (
    estimator_bias,
    projection_to_dict,
    reference_records,
    report_to_dict,
    report_to_text,
    summarize_power_series,
    to_json,
)
from inference.fit import project_filtered_source
from source_sim.interface import SourceConfig


# ── summarize_power_series() ───────────────────────────────────────


def test_reference_series_rows():
    report = summarize_power_series(reference_records())
    assert [row.power_mw for row in report.rows] == [0.170, 0.245, 0.380, 0.540]
    first, last = report.rows[0], report.rows[-1]
    assert first.estimate.signal_lumped == pytest.approx(0.200)
    assert last.estimate.idler_lumped == pytest.approx(0.1107, abs=5e-4)
    assert last.pairs_per_pulse == pytest.approx(0.17, abs=0.01)
    assert report.fit.coefficient == pytest.approx(1.1207e6, rel=1e-3)


def test_reference_series_bounds_use_rounded_efficiencies():
    report = summarize_power_series(reference_records())
    first, last = report.rows[0], report.rows[-1]
    assert first.bounds.idler_fraction == pytest.approx((1 - 0.2 / 0.211, 1 - 0.2 / 0.229))
    assert first.bounds.signal_fraction == pytest.approx((0.0, 1 - 0.112 / 0.119))
    assert last.bounds.idler_fraction == pytest.approx((0.0, 1 - 0.211 / 0.229))
    assert last.bounds.signal_fraction == pytest.approx((0.0, 1 - 0.111 / 0.119))


def test_weighted_means_lie_between_rows():
    report = summarize_power_series(reference_records())
    signals = [row.estimate.signal_lumped for row in report.rows]
    assert min(signals) <= report.signal_mean.value <= max(signals)
    assert report.signal_mean.sigma > 0


def test_summary_rejects_empty():
    with pytest.raises(InferenceArgumentError, match="at least one record"):
        summarize_power_series([])


def test_summary_rejects_missing_power():
    record = replace(record_from_rates(0.17, 3.4e5, 1.9e5, 3.9e4, 1e3), pump_power_mw=None)
    with pytest.raises(InferenceArgumentError, match="no pump power"):
        summarize_power_series([record])


# ── rendering ──────────────────────────────────────────────────────


def test_text_report_has_quantity_rows_and_power_columns():
    text = report_to_text(summarize_power_series(reference_records()))
    assert "170 uW" in text and "540 uW" in text
    assert "Average pairs per pulse" in text
    assert "B_i/N_i" in text
    assert "Quadratic fit" in text
    assert "WARNING" not in text


def test_text_report_lists_flags():
    record = record_from_rates(0.2, 1e3, 1e3, 2e3, 10.0)
    text = report_to_text(summarize_power_series([record]))
    assert "WARNING 200 uW: coincidences exceed singles" in text


def test_dict_report_is_json_ready():
    data = json.loads(to_json(report_to_dict(summarize_power_series(reference_records()))))
    assert len(data["rows"]) == 4
    assert data["predicted"]["signal"] == [0.211, 0.229]
    assert data["quadratic_fit"]["A_per_s_per_mw2"] == pytest.approx(1.1207e6, rel=1e-3)


def test_projection_dict():
    data = projection_to_dict(project_filtered_source(1.21e6, 2.0))
    assert data["pair_rate"] == pytest.approx(80666.67, rel=1e-6)
    assert data["spectral_fraction"] == pytest.approx(1 / 15)


# ── estimator_bias() ───────────────────────────────────────────────


def test_estimator_is_unbiased_at_low_yield():
    bias = estimator_bias(SourceConfig(pump_avg_power_mw=0.01))
    assert abs(bias.signal_relative) < 1e-3
    assert abs(bias.idler_relative) < 1e-3
    assert abs(bias.pair_rate_relative) < 1e-3


def test_estimator_bias_grows_with_yield():
    low = estimator_bias(SourceConfig(pump_avg_power_mw=0.17))
    high = estimator_bias(SourceConfig(pump_avg_power_mw=0.54))
    assert high.mean_pairs_per_pulse > low.mean_pairs_per_pulse
    assert abs(high.pair_rate_relative) > abs(low.pair_rate_relative)
