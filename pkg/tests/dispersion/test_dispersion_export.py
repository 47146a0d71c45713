import pytest

from dispersion.export import CSV_HEADER, curve_from_csv, curve_from_dict, curve_to_csv, curve_to_dict
from dispersion.interface import DispersionCurve, DispersionSample

N_EFF = 1.4301234567890 + 1.23e-14


def _make_curve() -> DispersionCurve:
    return DispersionCurve(
        samples=[
            DispersionSample(700.0, N_EFF, 1.283e7, 4.1e-27),
            DispersionSample(720.0, 1.4290000000000001, 1.247e7, -2.3e-27),
        ],
        zero_dispersion_wavelength_nm=714.9,
    )


def test_csv_header_and_rows():
    lines = curve_to_csv(_make_curve()).splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 3
    assert lines[1].startswith(f"700.0,{N_EFF!r},")
    assert float(lines[1].split(",")[1]) == N_EFF


def test_csv_parses_back_to_same_floats():
    curve = _make_curve()
    parsed = curve_from_csv(curve_to_csv(curve))
    assert parsed.samples == curve.samples


def test_csv_rejects_unknown_header():
    with pytest.raises(ValueError, match="Unexpected dispersion CSV header"):
        curve_from_csv("lambda,n\n700,1.43\n")


def test_dict_keeps_zero_dispersion():
    curve = _make_curve()
    assert curve_from_dict(curve_to_dict(curve)) == curve


def test_curve_rejects_unsorted_samples():
    with pytest.raises(ValueError, match="strictly increasing"):
        DispersionCurve(samples=[DispersionSample(720.0, 1.4, 1.0, 0.0), DispersionSample(700.0, 1.4, 1.0, 0.0)])
