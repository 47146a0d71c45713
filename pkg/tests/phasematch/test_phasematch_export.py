import pytest

from phasematch.export import CSV_HEADER, curve_from_csv, curve_to_csv, curve_to_dict
from phasematch.interface import PhaseMatchCurve, PhaseMatchSolution, idler_wavelength


def _make_curve() -> PhaseMatchCurve:
    signal = 587.1234567
    return PhaseMatchCurve(
        solutions=[
            PhaseMatchSolution(
                pump_wavelength_nm=708.4,
                signal_wavelength_nm=signal,
                idler_wavelength_nm=idler_wavelength(708.4, signal),
                peak_power_w=1.7,
                signal_fwhm_nm=3.1,
                idler_fwhm_nm=4.6,
                residual_rad_per_m=1.5e-9,
            )
        ],
        gaps_nm=[720.0],
    )


def test_csv_header():
    assert curve_to_csv(_make_curve()).splitlines()[0] == ",".join(CSV_HEADER)


def test_csv_parses_back_with_supplied_power():
    curve = _make_curve()
    parsed = curve_from_csv(curve_to_csv(curve), peak_power_w=1.7)
    assert parsed.solutions == curve.solutions
    assert parsed.solutions[0].energy_mismatch() <= 1e-12


def test_csv_rejects_unknown_header():
    with pytest.raises(ValueError, match="Unexpected phase-matching CSV header"):
        curve_from_csv("pump,signal\n708.4,587\n", peak_power_w=1.0)


def test_dict_lists_gaps():
    data = curve_to_dict(_make_curve())
    assert data["gaps_nm"] == [720.0]
    assert data["solutions"][0]["signal_fwhm_nm"] == 3.1
