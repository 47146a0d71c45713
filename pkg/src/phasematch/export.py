import csv
import io

from phasematch.interface import PhaseMatchCurve, PhaseMatchSolution

CSV_HEADER = [
    "pump_nm",
    "signal_nm",
    "idler_nm",
    "signal_fwhm_nm",
    "idler_fwhm_nm",
    "residual_rad_per_m",
]


def curve_to_csv(curve: PhaseMatchCurve) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for s in curve.solutions:
        writer.writerow(
            [
                repr(s.pump_wavelength_nm),
                repr(s.signal_wavelength_nm),
                repr(s.idler_wavelength_nm),
                repr(s.signal_fwhm_nm),
                repr(s.idler_fwhm_nm),
                repr(s.residual_rad_per_m),
            ]
        )
    return buf.getvalue()


def curve_from_csv(text: str, peak_power_w: float) -> PhaseMatchCurve:
    """Rebuild a curve from CSV. Peak power is not a CSV column, so it is supplied."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_HEADER:
        raise ValueError(f"Unexpected phase-matching CSV header: {reader.fieldnames}")
    solutions = [
        PhaseMatchSolution(
            pump_wavelength_nm=float(row["pump_nm"]),
            signal_wavelength_nm=float(row["signal_nm"]),
            idler_wavelength_nm=float(row["idler_nm"]),
            peak_power_w=peak_power_w,
            signal_fwhm_nm=float(row["signal_fwhm_nm"]),
            idler_fwhm_nm=float(row["idler_fwhm_nm"]),
            residual_rad_per_m=float(row["residual_rad_per_m"]),
        )
        for row in reader
    ]
    return PhaseMatchCurve(solutions=solutions)


def curve_to_dict(curve: PhaseMatchCurve) -> dict:
    return {
        "solutions": [
            {
                "pump_nm": s.pump_wavelength_nm,
                "signal_nm": s.signal_wavelength_nm,
                "idler_nm": s.idler_wavelength_nm,
                "signal_fwhm_nm": s.signal_fwhm_nm,
                "idler_fwhm_nm": s.idler_fwhm_nm,
                "residual_rad_per_m": s.residual_rad_per_m,
                "peak_power_w": s.peak_power_w,
            }
            for s in curve.solutions
        ],
        "gaps_nm": list(curve.gaps_nm),
    }
