import numpy as np

from inference.fit import fit_quadratic_rate
from phasematch.interface import PhaseMatchCurve, PhaseMatchSolution, idler_wavelength
from plotting import histogram_svg, phasematch_svg, quadratic_fit_svg
from source_sim.interface import TiaHistogram


def _make_curve() -> PhaseMatchCurve:
    solutions = [
        PhaseMatchSolution(
            pump_wavelength_nm=pump,
            signal_wavelength_nm=signal,
            idler_wavelength_nm=idler_wavelength(pump, signal),
            peak_power_w=1.7,
        )
        for pump, signal in ((700.0, 560.0), (704.0, 575.0), (708.0, 600.0))
    ]
    return PhaseMatchCurve(solutions=solutions)


def test_svg_output_is_byte_identical_across_calls():
    fit = fit_quadratic_rate([(0.17, 3.8e4), (0.54, 3.2e5)])
    assert quadratic_fit_svg(fit) == quadratic_fit_svg(fit)
    assert phasematch_svg(_make_curve()) == phasematch_svg(_make_curve())


def test_svg_has_no_date_stamp():
    svg = phasematch_svg(_make_curve())
    assert svg.lstrip().startswith("<?xml")
    assert "<dc:date>" not in svg


def test_histogram_svg_renders():
    hist = TiaHistogram(bin_width_s=50e-12, origin_s=-1e-9, counts=np.arange(40))
    assert "</svg>" in histogram_svg(hist)
