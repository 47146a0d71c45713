from source_sim.interface import BackgroundMode, BackgroundModel, SourceConfig


class LinearBackground:
    """Uncorrelated counts growing linearly with average pump power (Raman-like)."""

    mode = BackgroundMode.LINEAR

    def rates(self, config: SourceConfig) -> tuple[float, float]:
        power = config.pump_avg_power_mw
        return config.signal_bg_rate_per_mw * power, config.idler_bg_rate_per_mw * power


class ConstantFractionBackground:
    """Background held at a fixed share B/N of each arm's singles rate."""

    mode = BackgroundMode.CONSTANT_FRACTION

    def rates(self, config: SourceConfig) -> tuple[float, float]:
        pair_rate = config.pair_yield_coeff * config.pump_avg_power_mw**2 * config.rep_rate_hz
        signal = config.signal_bg_fraction / (1.0 - config.signal_bg_fraction)
        idler = config.idler_bg_fraction / (1.0 - config.idler_bg_fraction)
        return (
            signal * config.signal_lumped_eff * pair_rate,
            idler * config.idler_lumped_eff * pair_rate,
        )


def build_background_model(mode: BackgroundMode) -> BackgroundModel:
    if mode == BackgroundMode.LINEAR:
        return LinearBackground()

    if mode == BackgroundMode.CONSTANT_FRACTION:
        return ConstantFractionBackground()

    raise ValueError(f"Unknown background mode: {mode}")
