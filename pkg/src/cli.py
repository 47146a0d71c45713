import json
import os
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, replace
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__
from typing import Optional

from dotenv import load_dotenv

load_dotenv()

import typer

from acceptance.registry import build_registry, results_to_dict
from dispersion.export import curve_to_csv as dispersion_to_csv
from dispersion.export import curve_to_dict as dispersion_to_dict
from dispersion.interface import DispersionError, ModeCutoffError, WavelengthDomainError
from dispersion.strand import dispersion_curve, dispersion_parameter, group_velocity_dispersion
from inference.estimators import lumped_efficiencies
from inference.fit import project_filtered_source
from inference.interface import DegenerateRecordError, InferenceArgumentError, InferenceError
from inference.records import load_records
from inference.report import (
    projection_to_dict,
    reference_records,
    report_to_dict,
    report_to_text,
    summarize_power_series,
    to_json,
)
from log_config import setup_logging
from phasematch.export import curve_to_csv as phasematch_to_csv
from phasematch.export import curve_to_dict as phasematch_to_dict
from phasematch.interface import NoPhaseMatchError, PhaseMatchDomainError, PhaseMatchError, RegimeError
from phasematch.solver import phase_matching_curve, solve_with_bandwidths
from plotting import histogram_svg, phasematch_svg, quadratic_fit_svg
from source_sim.export import histogram_to_csv, record_to_dict, record_to_json
from source_sim.interface import CountRecord, SimulationError
from source_sim.simulator import simulate_run
from workspace_config import ConfigError, WorkspaceConfig, load_config

logger = setup_logging("pairsource")

EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_ACCEPTANCE = 4

app = typer.Typer(add_completion=False, no_args_is_help=True)


class OutputFormat(StrEnum):
    CSV = "csv"
    JSON = "json"


@dataclass
class CliState:
    config: WorkspaceConfig
    fmt: OutputFormat = OutputFormat.CSV

    @property
    def out_dir(self) -> str:
        return self.config.output_dir


def _fail(message: str, code: int) -> None:
    logger.debug(f"Exiting with code {code}: {message}")
    typer.echo(f"error: {message}", err=True)
    raise typer.Exit(code)


@contextmanager
def _exit_on_error(stage: str):
    """Map library errors onto exit codes, naming the stage that failed."""
    try:
        yield
    except (
        RegimeError,
        NoPhaseMatchError,
        PhaseMatchDomainError,
        ModeCutoffError,
        WavelengthDomainError,
        DegenerateRecordError,
    ) as e:
        _fail(f"{stage}: {e}", EXIT_NUMERICAL)
    except (ValueError, OSError) as e:
        _fail(f"{stage}: {e}", EXIT_USAGE)
    except (DispersionError, PhaseMatchError, SimulationError, InferenceError, ArithmeticError) as e:
        _fail(f"{stage}: {e}", EXIT_NUMERICAL)


def _write(out_dir: str, name: str, text: str) -> str:
    path = os.path.join(out_dir, name)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as f:
        f.write(text)
    logger.info(f"Wrote {path}")
    return path


def _state(ctx: typer.Context) -> CliState:
    return ctx.obj


@app.callback()
def main(
    ctx: typer.Context,
    config: Optional[str] = typer.Option(None, "--config", help="Workspace JSON config."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the config seed."),
    out: Optional[str] = typer.Option(None, "--out", help="Override the output directory."),
    fmt: OutputFormat = typer.Option(OutputFormat.CSV, "--format", help="Tabular artifact format."),
):
    """Fiber photon-pair source: dispersion, phase matching, counting simulation and analysis."""
    try:
        workspace = load_config(config)
    except ConfigError as e:
        _fail(str(e), EXIT_USAGE)
        return
    if seed is not None:
        workspace = replace(workspace, seed=seed)
    if out is not None:
        workspace = replace(workspace, output_dir=out)
    ctx.obj = CliState(config=workspace, fmt=fmt)


# ── stages ─────────────────────────────────────────────────────────


def _run_dispersion(state: CliState, lo: float, hi: float, n_points: int) -> float | None:
    cfg = state.config
    fiber = cfg.fiber_model()
    curve = dispersion_curve(fiber, (lo, hi), n_points)
    if state.fmt == OutputFormat.JSON:
        _write(state.out_dir, "dispersion_curve.json", json.dumps(dispersion_to_dict(curve), indent=2) + "\n")
    else:
        _write(state.out_dir, "dispersion_curve.csv", dispersion_to_csv(curve))

    zero = curve.zero_dispersion_wavelength_nm
    if zero is None:
        typer.echo(f"No zero-dispersion wavelength in {lo:g}-{hi:g} nm")
    else:
        typer.echo(f"Zero-dispersion wavelength: {zero:.2f} nm")

    pump = cfg.pump.center_wavelength_nm
    beta2 = group_velocity_dispersion(fiber, pump)
    typer.echo(
        f"At pump {pump:g} nm: beta2 = {beta2:.4e} s^2/m, "
        f"D = {dispersion_parameter(beta2, pump):.2f} ps/(nm km)"
    )
    return zero


def _run_phasematch(
    state: CliState,
    lo: float,
    hi: float,
    n_points: int,
    peak_power_w: float,
    svg: bool,
    workers: int,
    stem: str = "phasematch_curve",
) -> None:
    cfg = state.config
    fiber = cfg.fiber_model()
    curve = phase_matching_curve(
        fiber, cfg.nonlinear_params(), (lo, hi), peak_power_w, n_points, workers=workers
    )
    if state.fmt == OutputFormat.JSON:
        _write(state.out_dir, f"{stem}.json", json.dumps(phasematch_to_dict(curve), indent=2) + "\n")
    else:
        _write(state.out_dir, f"{stem}.csv", phasematch_to_csv(curve))
    if svg:
        _write(state.out_dir, f"{stem}.svg", phasematch_svg(curve))

    violations = [s for s in curve.solutions if s.energy_mismatch() > 1e-12]
    typer.echo(
        f"Energy conservation: {len(curve.solutions) - len(violations)}/{len(curve.solutions)} rows pass"
        + (f", {len(curve.gaps_nm)} pump(s) without a root" if curve.gaps_nm else "")
    )

    pump = replace(cfg.pump_spec(), peak_power_w=peak_power_w)
    solution = solve_with_bandwidths(fiber, cfg.nonlinear_params(pump.center_wavelength_nm), pump)
    typer.echo(
        f"Pump {pump.center_wavelength_nm:g} nm: signal {solution.signal_wavelength_nm:.2f} nm "
        f"(FWHM {solution.signal_fwhm_nm:.2f} nm), idler {solution.idler_wavelength_nm:.2f} nm "
        f"(FWHM {solution.idler_fwhm_nm:.2f} nm)"
    )


def _run_simulate(
    state: CliState,
    powers: list[float],
    duration_s: float,
    workers: int,
    events: bool = False,
    svg: bool = False,
) -> list[CountRecord]:
    cfg = state.config
    analysis = cfg.analysis
    configs = [cfg.source_config(power, idx) for idx, power in enumerate(powers)]
    stems = [f"simulated/run_{idx:02d}_{1000 * power:.0f}uW" for idx, power in enumerate(powers)]

    def run_one(source, stem):
        return simulate_run(
            source,
            duration_s,
            window_s=analysis.window_s,
            satellites_per_side=analysis.satellites_per_side,
            bin_width_s=analysis.bin_width_s,
            pileup_correction=analysis.pileup_correction,
            events_path=os.path.join(state.out_dir, f"{stem}_events.jsonl") if events else None,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, configs, stems))
    else:
        results = [run_one(source, stem) for source, stem in zip(configs, stems)]

    records = []
    for power, stem, (record, hist) in zip(powers, stems, results):
        if state.fmt == OutputFormat.JSON:
            data = record_to_dict(record)
            data["histogram"] = {
                "bin_center_ns": [float(c) * 1e9 for c in hist.bin_centers_s],
                "counts": [int(c) for c in hist.counts],
            }
            _write(state.out_dir, f"{stem}.json", json.dumps(data, indent=2, sort_keys=True) + "\n")
        else:
            _write(state.out_dir, f"{stem}.json", record_to_json(record) + "\n")
            _write(state.out_dir, f"{stem}_histogram.csv", histogram_to_csv(hist))
        if svg:
            _write(state.out_dir, f"{stem}_histogram.svg", histogram_svg(hist))
        typer.echo(
            f"{1000 * power:.0f} uW: N_s={record.n_s:.4g}/s N_i={record.n_i:.4g}/s "
            f"C_raw={record.c_raw:.4g}/s C_b={record.c_b:.4g}/s"
        )
        records.append(record)
    return records


def _round_trip_rows(records: list[CountRecord]) -> list[dict]:
    """Recovered vs configured values for records that carry their simulator config."""
    rows = []
    for record in records:
        if not record.config:
            continue
        est = lumped_efficiencies(record)
        cfg = record.config
        true_rate = cfg["pair_yield_coeff"] * cfg["pump_avg_power_mw"] ** 2 * cfg["rep_rate_hz"]
        rows.append(
            {
                "power_mw": record.pump_power_mw,
                "signal_configured": cfg["signal_lumped_eff"],
                "signal_recovered": est.signal_lumped,
                "idler_configured": cfg["idler_lumped_eff"],
                "idler_recovered": est.idler_lumped,
                "pair_rate_configured": true_rate,
                "pair_rate_recovered": est.pair_rate,
            }
        )
    return rows


def _run_analyze(
    state: CliState,
    records: list[CountRecord],
    stem: str = "power_series_report",
    fit_stem: str | None = "quadratic_fit",
) -> None:
    """Report under `stem`; with `fit_stem` also the fit table and plot plus projection.json."""
    cfg = state.config
    if not records:
        raise InferenceArgumentError("No records to analyze")
    report = summarize_power_series(
        records,
        rep_rate_hz=cfg.source.rep_rate_hz,
        predicted=cfg.predicted_range(),
        efficiency_decimals=cfg.analysis.efficiency_decimals,
    )
    settings = cfg.analysis.projection
    coefficient = report.fit.coefficient if settings.coefficient is None else settings.coefficient
    projection = project_filtered_source(
        coefficient,
        settings.power_mw,
        settings.transmission_per_arm,
        settings.spectral_fraction,
        cfg.source.rep_rate_hz,
    )

    text = report_to_text(report)
    text += (
        f"Filtered projection at {projection.power_mw:g} mW (A = {coefficient:.4g}): "
        f"pairs {projection.pair_rate:.4g}/s, four-fold {projection.fourfold_rate:.4g}/s\n"
    )
    data = report_to_dict(report)
    round_trip = _round_trip_rows(records)
    if round_trip:
        data["round_trip"] = round_trip
        for row in round_trip:
            text += (
                f"Round trip {1000 * (row['power_mw'] or 0):.0f} uW: "
                f"η_s {row['signal_recovered']:.4f} (configured {row['signal_configured']:.4f}), "
                f"η_i {row['idler_recovered']:.4f} (configured {row['idler_configured']:.4f}), "
                f"r {row['pair_rate_recovered']:.4g} (configured {row['pair_rate_configured']:.4g})\n"
            )

    _write(state.out_dir, f"{stem}.txt", text)
    _write(state.out_dir, f"{stem}.json", to_json(data))

    fit = report.fit
    fit_rows = ["power_mw,net_rate,fitted_rate,residual"] + [
        f"{p!r},{c!r},{fit.predict(p)!r},{r!r}"
        for p, c, r in zip(fit.powers_mw, fit.rates, fit.residuals)
    ]
    if fit_stem is not None:
        _write(state.out_dir, f"{fit_stem}.csv", "\n".join(fit_rows) + "\n")
        _write(state.out_dir, f"{fit_stem}.svg", quadratic_fit_svg(fit))
        _write(state.out_dir, "projection.json", to_json(projection_to_dict(projection)))
    typer.echo(text, nl=False)


# ── commands ───────────────────────────────────────────────────────


@app.command()
def dispersion(
    ctx: typer.Context,
    range_from: Optional[float] = typer.Option(None, "--from", help="Start wavelength (nm)."),
    range_to: Optional[float] = typer.Option(None, "--to", help="End wavelength (nm)."),
    points: Optional[int] = typer.Option(None, "--points", help="Number of samples."),
):
    """Write the fiber dispersion curve and print the zero-dispersion wavelength."""
    state = _state(ctx)
    fiber = state.config.fiber
    lo = fiber.dispersion_range_nm[0] if range_from is None else range_from
    hi = fiber.dispersion_range_nm[1] if range_to is None else range_to
    with _exit_on_error("dispersion"):
        _run_dispersion(state, lo, hi, points or fiber.dispersion_points)


@app.command()
def phasematch(
    ctx: typer.Context,
    range_from: Optional[float] = typer.Option(None, "--from", help="First pump wavelength (nm)."),
    range_to: Optional[float] = typer.Option(None, "--to", help="Last pump wavelength (nm)."),
    points: Optional[int] = typer.Option(None, "--points", help="Number of pump wavelengths."),
    power: Optional[float] = typer.Option(None, "--power", help="Pump peak power (W)."),
    pump: Optional[float] = typer.Option(None, "--pump", help="Pump wavelength to report (nm)."),
    svg: bool = typer.Option(True, "--svg/--no-svg", help="Also write an SVG plot."),
    workers: int = typer.Option(1, "--workers", help="Threads for the pump sweep."),
):
    """Write the sideband-vs-pump curve and print the solution at the configured pump."""
    state = _state(ctx)
    cfg = state.config
    with _exit_on_error("phasematch"):
        if pump is not None:
            state = replace(state, config=replace(cfg, pump=replace(cfg.pump, center_wavelength_nm=pump)))
            state.config.pump_spec()
        _run_phasematch(
            state,
            cfg.pump.sweep_range_nm[0] if range_from is None else range_from,
            cfg.pump.sweep_range_nm[1] if range_to is None else range_to,
            points or cfg.pump.sweep_points,
            cfg.pump.peak_power_w if power is None else power,
            svg,
            workers,
        )


@app.command()
def simulate(
    ctx: typer.Context,
    duration: Optional[float] = typer.Option(None, "--duration", help="Acquisition time per power (s)."),
    power: Optional[list[float]] = typer.Option(None, "--power", help="Average pump power (mW); repeatable."),
    workers: int = typer.Option(1, "--workers", help="Ladder entries simulated in parallel."),
    events: bool = typer.Option(False, "--events", help="Also write each raw click stream as JSON lines."),
    svg: bool = typer.Option(False, "--svg/--no-svg", help="Also write each TIA histogram as SVG."),
):
    """Simulate one counting run per average pump power."""
    state = _state(ctx)
    cfg = state.config
    with _exit_on_error("simulate"):
        _run_simulate(
            state,
            list(power) if power else list(cfg.pump.power_ladder_mw),
            cfg.source.duration_s if duration is None else duration,
            workers,
            events=events,
            svg=svg,
        )


@app.command()
def analyze(
    ctx: typer.Context,
    files: Optional[list[str]] = typer.Argument(None, help="CountRecord JSON or power_mW,N_s,N_i,C_raw,C_b CSV."),
    reference: bool = typer.Option(False, "--reference", help="Analyze the built-in four-power reference series."),
):
    """Efficiencies, background bounds, quadratic fit and filtered-source projection."""
    state = _state(ctx)
    with _exit_on_error("analyze"):
        records = reference_records() if reference else load_records(list(files or []))
        _run_analyze(state, records)


@app.command("reproduce-paper")
def reproduce_paper(
    ctx: typer.Context,
    workers: int = typer.Option(1, "--workers", help="Threads for sweeps and simulations."),
):
    """Run every stage, write the named figure and table artifacts, then the acceptance checks.

    Writes fig2.{csv,svg} (sideband curve), table1_report.{txt,json} (reference
    series), fig7.{csv,svg} (quadratic fit) and projection.json, alongside the
    dispersion curve, the simulated runs and acceptance.json.
    """
    state = _state(ctx)
    cfg = state.config
    with _exit_on_error("dispersion"):
        _run_dispersion(state, *cfg.fiber.dispersion_range_nm, cfg.fiber.dispersion_points)
    with _exit_on_error("phasematch"):
        _run_phasematch(
            state,
            *cfg.pump.sweep_range_nm,
            cfg.pump.sweep_points,
            cfg.pump.peak_power_w,
            True,
            workers,
            stem="fig2",
        )
    with _exit_on_error("simulate"):
        simulated = _run_simulate(state, list(cfg.pump.power_ladder_mw), cfg.source.duration_s, workers)
    with _exit_on_error("analyze"):
        _run_analyze(state, reference_records(), stem="table1_report", fit_stem="fig7")
        _run_analyze(state, simulated, stem="simulated_series_report", fit_stem=None)

    results = build_registry().run_all(cfg)
    _write(state.out_dir, "acceptance.json", to_json(results_to_dict(results)))
    for result in results:
        typer.echo(f"[{'PASS' if result.passed else 'FAIL'}] {result.name}: {result.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        _fail(f"{len(failed)} acceptance check(s) failed: {', '.join(failed)}", EXIT_ACCEPTANCE)
    typer.echo(f"All {len(results)} acceptance checks passed")


if __name__ == "__main__":
    app()
