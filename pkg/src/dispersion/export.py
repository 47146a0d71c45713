import csv
import io

from dispersion.interface import DispersionCurve, DispersionSample

CSV_HEADER = ["wavelength_nm", "n_eff", "beta_rad_per_m", "beta2_s2_per_m"]


def curve_to_csv(curve: DispersionCurve) -> str:
    # repr() gives the shortest string that parses back to the same float
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for s in curve.samples:
        writer.writerow([repr(s.wavelength_nm), repr(s.n_eff), repr(s.beta), repr(s.beta2)])
    return buf.getvalue()


def curve_from_csv(text: str) -> DispersionCurve:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != CSV_HEADER:
        raise ValueError(f"Unexpected dispersion CSV header: {header}")
    samples = [
        DispersionSample(float(row[0]), float(row[1]), float(row[2]), float(row[3]))
        for row in reader
        if row
    ]
    return DispersionCurve(samples=samples)


def curve_to_dict(curve: DispersionCurve) -> dict:
    return {
        "zero_dispersion_wavelength_nm": curve.zero_dispersion_wavelength_nm,
        "samples": [
            {
                "wavelength_nm": s.wavelength_nm,
                "n_eff": s.n_eff,
                "beta": s.beta,
                "beta2": s.beta2,
            }
            for s in curve.samples
        ],
    }


def curve_from_dict(data: dict) -> DispersionCurve:
    return DispersionCurve(
        samples=[DispersionSample(**s) for s in data["samples"]],
        zero_dispersion_wavelength_nm=data.get("zero_dispersion_wavelength_nm"),
    )
