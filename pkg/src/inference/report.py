import json
import logging
from collections.abc import Sequence

from inference.estimators import background_bounds, lumped_efficiencies, weighted_mean
from inference.fit import fit_quadratic_rate
from inference.interface import (
    EfficiencyEstimate,
    EstimatorBias,
    FilteredProjection,
    InferenceArgumentError,
    PowerSeriesReport,
    PowerSeriesRow,
    PredictedEfficiencyRange,
)
from inference.records import record_from_rates
from source_sim.interface import CountRecord, SourceConfig
from source_sim.simulator import expected_rates, mean_pairs_per_pulse

logger = logging.getLogger("pairsource.report")

# (pump power mW, N_s, N_i, C_raw, C_b) per second, measured four-power reference series
REFERENCE_MEASUREMENTS: tuple[tuple[float, float, float, float, float], ...] = (
    (0.170, 3.4e5, 1.9e5, 3.9e4, 0.1e4),
    (0.245, 6.8e5, 3.6e5, 8.0e4, 0.2e4),
    (0.380, 1.57e6, 8.2e5, 1.8e5, 0.1e5),
    (0.540, 2.89e6, 1.52e6, 3.6e5, 0.4e5),
)


def reference_records() -> list[CountRecord]:
    return [record_from_rates(*row) for row in REFERENCE_MEASUREMENTS]


def summarize_power_series(
    records: Sequence[CountRecord],
    rep_rate_hz: float = 80e6,
    predicted: PredictedEfficiencyRange | None = None,
    efficiency_decimals: int | None = 3,
) -> PowerSeriesReport:
    """Per-power efficiencies, background bounds and pair yield, plus the C = A·P² fit.

    Background bounds are computed from efficiencies rounded to
    `efficiency_decimals` (None keeps full precision).
    """
    if not records:
        raise InferenceArgumentError("Power-series summary needs at least one record")
    if rep_rate_hz <= 0:
        raise InferenceArgumentError(f"Repetition rate must be > 0, got {rep_rate_hz}")
    predicted = predicted or PredictedEfficiencyRange()

    rows = []
    for idx, record in enumerate(records):
        if record.pump_power_mw is None:
            raise InferenceArgumentError(f"Record {idx} has no pump power")
        estimate = lumped_efficiencies(record)
        rounded = estimate
        if efficiency_decimals is not None:
            rounded = EfficiencyEstimate(
                signal_lumped=round(estimate.signal_lumped, efficiency_decimals),
                idler_lumped=round(estimate.idler_lumped, efficiency_decimals),
                pair_rate=estimate.pair_rate,
            )
        rows.append(
            PowerSeriesRow(
                power_mw=record.pump_power_mw,
                n_s=record.n_s,
                n_i=record.n_i,
                c_raw=record.c_raw,
                c_b=record.c_b,
                net=record.net_coincidences,
                estimate=estimate,
                bounds=background_bounds(rounded, predicted),
                pairs_per_pulse=estimate.pair_rate / rep_rate_hz,
                flags=record.flags(),
            )
        )

    fit = fit_quadratic_rate([(row.power_mw, row.net) for row in rows])
    report = PowerSeriesReport(
        rows=rows,
        predicted=predicted,
        fit=fit,
        signal_mean=weighted_mean(
            [r.estimate.signal_lumped for r in rows], [r.estimate.signal_sigma for r in rows]
        ),
        idler_mean=weighted_mean(
            [r.estimate.idler_lumped for r in rows], [r.estimate.idler_sigma for r in rows]
        ),
        rep_rate_hz=rep_rate_hz,
    )
    logger.info(
        f"Summarized {len(rows)} power(s): η_s={report.signal_mean.value:.4f} "
        f"η_i={report.idler_mean.value:.4f} A={fit.coefficient:.4g}"
    )
    return report


def estimator_bias(config: SourceConfig) -> EstimatorBias:
    """Apply the lumped-efficiency estimator to exact expected rates and compare with the truth."""
    rates = expected_rates(config)
    record = record_from_rates(
        config.pump_avg_power_mw, rates.n_s, rates.n_i, rates.c_raw, rates.c_b
    )
    estimate = lumped_efficiencies(record)
    mu = mean_pairs_per_pulse(config)
    true_rate = mu * config.rep_rate_hz
    return EstimatorBias(
        mean_pairs_per_pulse=mu,
        signal_relative=estimate.signal_lumped / config.signal_lumped_eff - 1.0,
        idler_relative=estimate.idler_lumped / config.idler_lumped_eff - 1.0,
        pair_rate_relative=estimate.pair_rate / true_rate - 1.0,
    )


def _sci(value: float) -> str:
    return f"{value:.3g}"


def _pct(value: float) -> str:
    return f"{100 * value:.1f} %"


def _interval(bounds: tuple[float, float]) -> str:
    return f"{bounds[0]:.3f}-{bounds[1]:.3f}"


def report_to_text(report: PowerSeriesReport) -> str:
    """Rows are quantities, columns are pump powers."""
    pred = report.predicted
    table: list[tuple[str, list[str]]] = [
        ("Pump power", [f"{1000 * r.power_mw:.0f} uW" for r in report.rows]),
        ("N_s (/s)", [_sci(r.n_s) for r in report.rows]),
        ("N_i (/s)", [_sci(r.n_i) for r in report.rows]),
        ("C_raw (/s)", [_sci(r.c_raw) for r in report.rows]),
        ("C_b (/s)", [_sci(r.c_b) for r in report.rows]),
        ("C = C_raw - C_b (/s)", [_sci(r.net) for r in report.rows]),
        ("Signal lumped efficiency", [_pct(r.estimate.signal_lumped) for r in report.rows]),
        ("Predicted signal efficiency", [f"{100 * pred.signal_lo:.1f}-{100 * pred.signal_hi:.1f} %"] * len(report.rows)),
        ("B_i/N_i", [_interval(r.bounds.idler_fraction) for r in report.rows]),
        ("Idler lumped efficiency", [_pct(r.estimate.idler_lumped) for r in report.rows]),
        ("Predicted idler efficiency", [f"{100 * pred.idler_lo:.1f}-{100 * pred.idler_hi:.1f} %"] * len(report.rows)),
        ("B_s/N_s", [_interval(r.bounds.signal_fraction) for r in report.rows]),
        ("Pair production rate r (/s)", [_sci(r.estimate.pair_rate) for r in report.rows]),
        ("Average pairs per pulse", [f"{r.pairs_per_pulse:.3f}" for r in report.rows]),
    ]
    label_width = max(len(label) for label, _ in table)
    col_width = max(12, *(len(cell) for _, cells in table for cell in cells))

    lines = [
        f"{label:<{label_width}}  " + "  ".join(f"{cell:>{col_width}}" for cell in cells)
        for label, cells in table
    ]
    lines.append("")
    lines.append(
        f"Weighted mean efficiencies: signal {_pct(report.signal_mean.value)} "
        f"± {100 * report.signal_mean.sigma:.1f}, idler {_pct(report.idler_mean.value)} "
        f"± {100 * report.idler_mean.sigma:.1f}"
    )
    lines.append(f"Quadratic fit C = A·P²: A = {report.fit.coefficient:.4g} /s/mW²")
    for row in report.rows:
        for flag in row.flags:
            lines.append(f"WARNING {1000 * row.power_mw:.0f} uW: {flag}")
    return "\n".join(lines) + "\n"


def report_to_dict(report: PowerSeriesReport) -> dict:
    return {
        "rep_rate_hz": report.rep_rate_hz,
        "predicted": {
            "signal": [report.predicted.signal_lo, report.predicted.signal_hi],
            "idler": [report.predicted.idler_lo, report.predicted.idler_hi],
        },
        "rows": [
            {
                "power_mw": r.power_mw,
                "N_s": r.n_s,
                "N_i": r.n_i,
                "C_raw": r.c_raw,
                "C_b": r.c_b,
                "C": r.net,
                "signal_lumped": r.estimate.signal_lumped,
                "signal_sigma": r.estimate.signal_sigma,
                "idler_lumped": r.estimate.idler_lumped,
                "idler_sigma": r.estimate.idler_sigma,
                "pair_rate": r.estimate.pair_rate,
                "pair_rate_sigma": r.estimate.pair_rate_sigma,
                "idler_background_fraction": list(r.bounds.idler_fraction),
                "signal_background_fraction": list(r.bounds.signal_fraction),
                "pairs_per_pulse": r.pairs_per_pulse,
                "flags": r.flags,
            }
            for r in report.rows
        ],
        "weighted_mean": {
            "signal": {"value": report.signal_mean.value, "sigma": report.signal_mean.sigma},
            "idler": {"value": report.idler_mean.value, "sigma": report.idler_mean.sigma},
        },
        "quadratic_fit": {
            "A_per_s_per_mw2": report.fit.coefficient,
            "powers_mw": report.fit.powers_mw,
            "rates": report.fit.rates,
            "residuals": report.fit.residuals,
        },
    }


def projection_to_dict(projection: FilteredProjection) -> dict:
    return {
        "A_per_s_per_mw2": projection.coefficient,
        "power_mw": projection.power_mw,
        "transmission_per_arm": projection.transmission_per_arm,
        "spectral_fraction": projection.spectral_fraction,
        "rep_rate_hz": projection.rep_rate_hz,
        "pair_rate": projection.pair_rate,
        "fourfold_rate": projection.fourfold_rate,
    }


def to_json(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"
