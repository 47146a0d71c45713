"""Static SVG figures. Fixed size, no date stamp, fixed hash salt so reruns are byte-identical."""

import io

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib.figure import Figure

from inference.interface import QuadraticFit
from phasematch.interface import PhaseMatchCurve
from source_sim.interface import TiaHistogram

FIGSIZE = (6.4, 4.8)
SVG_METADATA = {"Date": None}


def _to_svg(fig: Figure) -> str:
    buf = io.StringIO()
    with matplotlib.rc_context({"svg.hashsalt": "pairsource", "svg.fonttype": "path"}):
        fig.savefig(buf, format="svg", metadata=SVG_METADATA)
    return buf.getvalue()


def phasematch_svg(curve: PhaseMatchCurve) -> str:
    fig = Figure(figsize=FIGSIZE)
    ax = fig.add_subplot()
    pumps = [s.pump_wavelength_nm for s in curve.solutions]
    ax.plot(pumps, [s.signal_wavelength_nm for s in curve.solutions], ".", label="signal")
    ax.plot(pumps, [s.idler_wavelength_nm for s in curve.solutions], ".", label="idler")
    ax.set_xlabel("Pump wavelength (nm)")
    ax.set_ylabel("Sideband wavelength (nm)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return _to_svg(fig)


def quadratic_fit_svg(fit: QuadraticFit) -> str:
    fig = Figure(figsize=FIGSIZE)
    ax = fig.add_subplot()
    powers = np.asarray(fit.powers_mw)
    grid = np.linspace(0.0, 1.1 * float(powers.max()), 200)
    ax.plot(powers, fit.rates, "o", label="net coincidences")
    ax.plot(grid, fit.coefficient * grid**2, "-", label=f"A·P², A = {fit.coefficient:.3g} /s/mW²")
    ax.set_xlabel("Average pump power (mW)")
    ax.set_ylabel("Net coincidence rate (/s)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return _to_svg(fig)


def histogram_svg(hist: TiaHistogram) -> str:
    fig = Figure(figsize=FIGSIZE)
    ax = fig.add_subplot()
    ax.step(hist.bin_centers_s * 1e9, hist.counts, where="mid")
    ax.set_xlabel("Stop − start (ns)")
    ax.set_ylabel("Counts per bin")
    ax.grid(True, alpha=0.3)
    return _to_svg(fig)
