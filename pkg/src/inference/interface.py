from dataclasses import dataclass, field


class InferenceError(Exception):
    """Base class for coincidence-analysis failures."""


class DegenerateRecordError(InferenceError, ValueError):
    """No coincidences above the accidental level."""


class InferenceArgumentError(InferenceError, ValueError):
    pass


class RecordFormatError(InferenceError, ValueError):
    """A record file could not be parsed; the message names the file and field."""


@dataclass(frozen=True)
class EfficiencyEstimate:
    signal_lumped: float
    idler_lumped: float
    pair_rate: float
    signal_sigma: float = 0.0
    idler_sigma: float = 0.0
    pair_rate_sigma: float = 0.0


@dataclass(frozen=True)
class PredictedEfficiencyRange:
    signal_lo: float = 0.211
    signal_hi: float = 0.229
    idler_lo: float = 0.110
    idler_hi: float = 0.119

    def __post_init__(self):
        for lo, hi, arm in (
            (self.signal_lo, self.signal_hi, "signal"),
            (self.idler_lo, self.idler_hi, "idler"),
        ):
            if not 0 < lo <= hi <= 1:
                raise InferenceArgumentError(
                    f"Predicted {arm} efficiency range must satisfy 0 < lo <= hi <= 1, got ({lo}, {hi})"
                )


@dataclass(frozen=True)
class BackgroundBounds:
    """B/N intervals: idler background from the signal estimate and vice versa."""

    idler_fraction: tuple[float, float]
    signal_fraction: tuple[float, float]


@dataclass(frozen=True)
class QuadraticFit:
    coefficient: float  # counts/s/mW²
    powers_mw: list[float]
    rates: list[float]
    residuals: list[float]

    def predict(self, power_mw: float) -> float:
        return self.coefficient * power_mw**2


@dataclass(frozen=True)
class FilteredProjection:
    pair_rate: float
    fourfold_rate: float
    power_mw: float
    coefficient: float
    transmission_per_arm: float
    spectral_fraction: float
    rep_rate_hz: float


@dataclass(frozen=True)
class WeightedEfficiency:
    value: float
    sigma: float


@dataclass(frozen=True)
class PowerSeriesRow:
    power_mw: float
    n_s: float
    n_i: float
    c_raw: float
    c_b: float
    net: float
    estimate: EfficiencyEstimate
    bounds: BackgroundBounds
    pairs_per_pulse: float
    flags: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class PowerSeriesReport:
    rows: list[PowerSeriesRow]
    predicted: PredictedEfficiencyRange
    fit: QuadraticFit
    signal_mean: WeightedEfficiency
    idler_mean: WeightedEfficiency
    rep_rate_hz: float


@dataclass(frozen=True)
class EstimatorBias:
    """Relative deviation of the lumped-efficiency estimator from configured truth."""

    mean_pairs_per_pulse: float
    signal_relative: float
    idler_relative: float
    pair_rate_relative: float
