import json

import pytest
from typer.testing import CliRunner

import typer

from cli import EXIT_ACCEPTANCE, EXIT_NUMERICAL, EXIT_USAGE, _exit_on_error, app
from dispersion.interface import BracketError, WavelengthDomainError
from phasematch.interface import PhaseMatchDomainError
from source_sim.export import load_events
from workspace_config import CONFIG_ENV

runner = CliRunner()


@pytest.fixture(autouse=True)
def _no_env_config(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)


def _invoke(tmp_path, *args):
    return runner.invoke(app, ["--out", str(tmp_path), *args])


# ── analyze ────────────────────────────────────────────────────────


def test_analyze_reference_writes_report(tmp_path):
    result = _invoke(tmp_path, "analyze", "--reference")
    assert result.exit_code == 0, result.output
    for name in (
        "power_series_report.txt",
        "power_series_report.json",
        "quadratic_fit.csv",
        "quadratic_fit.svg",
        "projection.json",
    ):
        assert (tmp_path / name).is_file(), name
    projection = json.loads((tmp_path / "projection.json").read_text())
    assert projection["pair_rate"] == pytest.approx(80666.67, rel=1e-6)
    assert "Average pairs per pulse" in result.output


def test_analyze_csv_file(tmp_path):
    series = tmp_path / "series.csv"
    series.write_text("power_mW,N_s,N_i,C_raw,C_b\n0.17,3.4e5,1.9e5,3.9e4,1e3\n0.54,2.89e6,1.52e6,3.6e5,4e4\n")
    result = _invoke(tmp_path / "out", "analyze", str(series))
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "out" / "power_series_report.json").read_text())
    assert [row["power_mw"] for row in report["rows"]] == [0.17, 0.54]


def test_analyze_without_inputs_is_usage_error(tmp_path):
    result = _invoke(tmp_path, "analyze")
    assert result.exit_code == EXIT_USAGE


def test_malformed_csv_names_file_and_field(tmp_path):
    series = tmp_path / "series.csv"
    series.write_text("power_mW,N_s,N_i,C_raw,C_b\n0.17,abc,1.9e5,3.9e4,1e3\n")
    result = _invoke(tmp_path, "analyze", str(series))
    assert result.exit_code == EXIT_USAGE
    assert "series.csv:2" in result.output
    assert "N_s" in result.output


def test_degenerate_record_is_numerical_failure(tmp_path):
    series = tmp_path / "series.csv"
    series.write_text("power_mW,N_s,N_i,C_raw,C_b\n0.17,3.4e5,1.9e5,1e3,1e3\n")
    result = _invoke(tmp_path, "analyze", str(series))
    assert result.exit_code == EXIT_NUMERICAL


# ── simulate ───────────────────────────────────────────────────────


def test_simulate_zero_duration_is_usage_error(tmp_path):
    result = _invoke(tmp_path, "simulate", "--duration", "0", "--power", "0.17")
    assert result.exit_code == EXIT_USAGE


def test_simulate_is_deterministic(tmp_path):
    outputs = []
    for name in ("a", "b"):
        result = _invoke(tmp_path / name, "simulate", "--power", "0.17", "--duration", "0.01")
        assert result.exit_code == 0, result.output
        outputs.append((tmp_path / name / "simulated" / "run_00_170uW.json").read_text())
        assert (tmp_path / name / "simulated" / "run_00_170uW_histogram.csv").is_file()
    assert outputs[0] == outputs[1]


def test_seed_option_changes_simulation(tmp_path):
    _invoke(tmp_path / "a", "simulate", "--power", "0.17", "--duration", "0.01")
    runner.invoke(app, ["--out", str(tmp_path / "b"), "--seed", "99", "simulate", "--power", "0.17", "--duration", "0.01"])
    first = (tmp_path / "a" / "simulated" / "run_00_170uW.json").read_text()
    second = (tmp_path / "b" / "simulated" / "run_00_170uW.json").read_text()
    assert first != second


def test_simulate_writes_event_log_and_svg(tmp_path):
    result = _invoke(tmp_path, "simulate", "--power", "0.17", "--duration", "0.01", "--events", "--svg")
    assert result.exit_code == 0, result.output
    events, metadata = load_events(str(tmp_path / "simulated" / "run_00_170uW_events.jsonl"))
    record = json.loads((tmp_path / "simulated" / "run_00_170uW.json").read_text())
    assert events.signal_times_s.size == record["raw_counts"]["signal"]
    assert metadata["config"]["pump_avg_power_mw"] == 0.17
    assert (tmp_path / "simulated" / "run_00_170uW_histogram.svg").is_file()
    assert (tmp_path / "simulated" / "run_00_170uW_events.jsonl.meta.json").is_file()


# ── configuration ──────────────────────────────────────────────────


def test_missing_config_file_is_usage_error(tmp_path):
    result = runner.invoke(app, ["--config", str(tmp_path / "absent.json"), "analyze", "--reference"])
    assert result.exit_code == EXIT_USAGE
    assert "no such config file" in result.output


def test_invalid_config_value_is_usage_error(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"pump": {"power_ladder_mw": []}}))
    result = runner.invoke(app, ["--config", str(config), "analyze", "--reference"])
    assert result.exit_code == EXIT_USAGE


# ── dispersion and phase matching ──────────────────────────────────


def test_dispersion_prints_zero_dispersion_wavelength(tmp_path):
    result = _invoke(tmp_path, "dispersion", "--points", "7")
    assert result.exit_code == 0, result.output
    assert "Zero-dispersion wavelength: 71" in result.output
    assert (tmp_path / "dispersion_curve.csv").read_text().count("\n") == 8


def test_dispersion_json_format(tmp_path):
    result = runner.invoke(app, ["--out", str(tmp_path), "--format", "json", "dispersion", "--points", "3"])
    assert result.exit_code == 0, result.output
    data = json.loads((tmp_path / "dispersion_curve.json").read_text())
    assert len(data["samples"]) == 3


def test_inverted_dispersion_range_is_usage_error(tmp_path):
    result = _invoke(tmp_path, "dispersion", "--from", "800", "--to", "650")
    assert result.exit_code == EXIT_USAGE
    assert "increasing" in result.output


def test_anomalous_pump_is_numerical_failure(tmp_path):
    result = _invoke(
        tmp_path, "phasematch", "--from", "700", "--to", "708", "--points", "2", "--no-svg", "--pump", "720"
    )
    assert result.exit_code == EXIT_NUMERICAL
    assert "phasematch" in result.output


# ── exit codes ─────────────────────────────────────────────────────


@pytest.mark.parametrize(
    ("error", "code"),
    [
        (PhaseMatchDomainError("slope step left the phase-matched region"), EXIT_NUMERICAL),
        (WavelengthDomainError("outside Sellmeier range"), EXIT_NUMERICAL),
        (BracketError("range must be increasing"), EXIT_USAGE),
        (ValueError("bad flag"), EXIT_USAGE),
        (FloatingPointError("overflow"), EXIT_NUMERICAL),
    ],
)
def test_errors_map_to_exit_codes(error, code):
    with pytest.raises(typer.Exit) as excinfo:
        with _exit_on_error("stage"):
            raise error
    assert excinfo.value.exit_code == code


# ── reproduce-paper ────────────────────────────────────────────────


def _write_quick_config(tmp_path):
    config = tmp_path / "quick.json"
    config.write_text(
        json.dumps(
            {
                "fiber": {"dispersion_points": 5},
                "pump": {"sweep_points": 4},
                "source": {"duration_s": 0.005},
            }
        )
    )
    return str(config)


def test_reproduce_paper_twice_gives_identical_artifacts(tmp_path):
    config = _write_quick_config(tmp_path)
    codes = []
    for name in ("a", "b"):
        result = runner.invoke(app, ["--config", config, "--out", str(tmp_path / name), "reproduce-paper"])
        codes.append(result.exit_code)
        assert result.exit_code in (0, EXIT_ACCEPTANCE), result.output
    assert codes[0] == codes[1]

    first, second = tmp_path / "a", tmp_path / "b"
    for name in (
        "fig2.csv",
        "fig2.svg",
        "table1_report.txt",
        "table1_report.json",
        "fig7.csv",
        "fig7.svg",
        "projection.json",
        "acceptance.json",
    ):
        assert (first / name).is_file(), name
    artifacts = sorted(p.relative_to(first) for p in first.rglob("*") if p.suffix in (".csv", ".json"))
    assert artifacts
    for rel in artifacts:
        assert (first / rel).read_bytes() == (second / rel).read_bytes(), str(rel)
