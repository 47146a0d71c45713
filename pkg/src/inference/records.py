"""Load CountRecords from simulator JSON or hand-entered CSV."""

import csv
import json
import logging
import os

from inference.interface import RecordFormatError
from source_sim.export import EventFormatError, record_from_dict
from source_sim.interface import CountRecord, RawCounts

logger = logging.getLogger("pairsource.records")

CSV_FIELDS = ["power_mW", "N_s", "N_i", "C_raw", "C_b"]
OPTIONAL_CSV_FIELDS = ["duration_s"]
DEFAULT_SATELLITE_PEAKS = 4


def record_from_rates(
    power_mw: float,
    n_s: float,
    n_i: float,
    c_raw: float,
    c_b: float,
    duration_s: float = 1.0,
    satellite_peaks: int = DEFAULT_SATELLITE_PEAKS,
) -> CountRecord:
    """A CountRecord from tabulated rates; raw tallies are rate × duration."""
    return CountRecord(
        duration_s=duration_s,
        n_s=n_s,
        n_i=n_i,
        c_raw=c_raw,
        c_b=c_b,
        raw_counts=RawCounts(
            signal=round(n_s * duration_s),
            idler=round(n_i * duration_s),
            central=round(c_raw * duration_s),
            satellites=round(c_b * duration_s * satellite_peaks),
            satellite_peaks=satellite_peaks,
        ),
        pump_power_mw=power_mw,
    )


def _parse_float(path: str, lineno: int, row: dict, name: str) -> float:
    raw = row.get(name)
    if raw is None or raw.strip() == "":
        raise RecordFormatError(f"{path}:{lineno}: missing field '{name}'")
    try:
        return float(raw)
    except ValueError:
        raise RecordFormatError(f"{path}:{lineno}: field '{name}' is not a number: {raw!r}") from None


def load_csv_records(path: str) -> list[CountRecord]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        fields = reader.fieldnames or []
        missing = [name for name in CSV_FIELDS if name not in fields]
        if missing:
            raise RecordFormatError(f"{path}: missing column(s) {', '.join(missing)}")
        unknown = [name for name in fields if name not in CSV_FIELDS + OPTIONAL_CSV_FIELDS]
        if unknown:
            raise RecordFormatError(f"{path}: unknown column(s) {', '.join(unknown)}")

        records = []
        for lineno, row in enumerate(reader, start=2):
            values = {name: _parse_float(path, lineno, row, name) for name in CSV_FIELDS}
            duration = (
                _parse_float(path, lineno, row, "duration_s") if "duration_s" in fields else 1.0
            )
            try:
                records.append(
                    record_from_rates(
                        values["power_mW"],
                        values["N_s"],
                        values["N_i"],
                        values["C_raw"],
                        values["C_b"],
                        duration_s=duration,
                    )
                )
            except ValueError as exc:
                raise RecordFormatError(f"{path}:{lineno}: {exc}") from exc
    return records


def load_json_records(path: str) -> list[CountRecord]:
    with open(path) as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise RecordFormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc

    items = data if isinstance(data, list) else [data]
    records = []
    for idx, item in enumerate(items):
        if not isinstance(item, dict):
            raise RecordFormatError(f"{path}: record {idx} is not an object")
        missing = [k for k in ("duration_s", "N_s", "N_i", "C_raw", "C_b", "raw_counts") if k not in item]
        if missing:
            raise RecordFormatError(f"{path}: record {idx} missing field '{missing[0]}'")
        try:
            records.append(record_from_dict(item))
        except (EventFormatError, ValueError) as exc:
            raise RecordFormatError(f"{path}: record {idx}: {exc}") from exc
    return records


def load_records(paths: list[str]) -> list[CountRecord]:
    """Load every file in order; `.csv` is the rate table, anything else is record JSON."""
    records = []
    for path in paths:
        if not os.path.isfile(path):
            raise RecordFormatError(f"{path}: no such file")
        if path.lower().endswith(".csv"):
            loaded = load_csv_records(path)
        else:
            loaded = load_json_records(path)
        logger.debug(f"Loaded {len(loaded)} record(s) from {path}")
        records.extend(loaded)
    return records
