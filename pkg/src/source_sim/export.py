import csv
import io
import json
import logging
import os

import numpy as np

from source_sim.interface import (
    CountRecord,
    DetectionEvents,
    RawCounts,
    SimulationError,
    TiaHistogram,
    TrueCounts,
)

logger = logging.getLogger("pairsource.export")

SIGNAL_CHANNEL = "s"
IDLER_CHANNEL = "i"
HISTOGRAM_HEADER = ["bin_center_ns", "counts"]


class EventFormatError(SimulationError, ValueError):
    pass


def metadata_path(events_path: str) -> str:
    """Sidecar holding the run duration and any caller metadata for an event log."""
    return f"{events_path}.meta.json"


def save_events(events: DetectionEvents, path: str, metadata: dict | None = None) -> None:
    """Write one `{"t_ns", "ch"}` JSON line per click in time order, metadata to the sidecar."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    times = np.concatenate([events.signal_times_s, events.idler_times_s])
    channels = [SIGNAL_CHANNEL] * events.signal_times_s.size + [IDLER_CHANNEL] * events.idler_times_s.size
    order = np.argsort(times, kind="stable")

    with open(path, "w") as f:
        for idx in order:
            f.write(json.dumps({"t_ns": float(times[idx]) * 1e9, "ch": channels[idx]}) + "\n")
    with open(metadata_path(path), "w") as f:
        f.write(json.dumps({**(metadata or {}), "duration_s": events.duration_s}, indent=2, sort_keys=True) + "\n")

    logger.info(f"Event log saved: {path} ({times.size} clicks)")


def _load_metadata(path: str) -> dict:
    sidecar = metadata_path(path)
    try:
        with open(sidecar) as f:
            metadata = json.load(f)
    except FileNotFoundError as exc:
        raise EventFormatError(f"{sidecar}: missing metadata sidecar with 'duration_s'") from exc
    except json.JSONDecodeError as exc:
        raise EventFormatError(f"{sidecar}: invalid JSON ({exc.msg})") from exc
    if not isinstance(metadata, dict) or "duration_s" not in metadata:
        raise EventFormatError(f"{sidecar}: metadata must be an object with 'duration_s'")
    return metadata


def load_events(path: str) -> tuple[DetectionEvents, dict]:
    """Read an event log written by `save_events`, with its sidecar metadata."""
    metadata = _load_metadata(path)
    signal, idler = [], []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                event = json.loads(line)
            except json.JSONDecodeError as exc:
                raise EventFormatError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(event, dict) or set(event) != {"t_ns", "ch"} or event["ch"] not in (
                SIGNAL_CHANNEL,
                IDLER_CHANNEL,
            ):
                raise EventFormatError(f"{path}:{lineno}: expected exactly 't_ns' and 'ch' in {{'s','i'}}")
            (signal if event["ch"] == SIGNAL_CHANNEL else idler).append(float(event["t_ns"]) * 1e-9)

    events = DetectionEvents(
        signal_times_s=np.asarray(signal, dtype=float),
        idler_times_s=np.asarray(idler, dtype=float),
        duration_s=float(metadata["duration_s"]),
    )
    logger.debug(f"Loaded {len(signal)} signal and {len(idler)} idler clicks from {path}")
    return events, metadata


def histogram_to_csv(hist: TiaHistogram) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HISTOGRAM_HEADER)
    for center, count in zip(hist.bin_centers_s, hist.counts):
        writer.writerow([repr(float(center) * 1e9), int(count)])
    return buf.getvalue()


def record_to_dict(record: CountRecord) -> dict:
    data = {
        "duration_s": record.duration_s,
        "pump_power_mw": record.pump_power_mw,
        "N_s": record.n_s,
        "N_i": record.n_i,
        "C_raw": record.c_raw,
        "C_b": record.c_b,
        "net_coincidences": record.net_coincidences,
        "raw_counts": vars(record.raw_counts).copy(),
        "flags": record.flags(),
    }
    if record.true_counts is not None:
        data["true_counts"] = vars(record.true_counts).copy()
    if record.config is not None:
        data["config"] = record.config
    return data


def record_from_dict(data: dict) -> CountRecord:
    try:
        return CountRecord(
            duration_s=float(data["duration_s"]),
            n_s=float(data["N_s"]),
            n_i=float(data["N_i"]),
            c_raw=float(data["C_raw"]),
            c_b=float(data["C_b"]),
            raw_counts=RawCounts(**data["raw_counts"]),
            pump_power_mw=data.get("pump_power_mw"),
            config=data.get("config"),
            true_counts=TrueCounts(**data["true_counts"]) if "true_counts" in data else None,
        )
    except (KeyError, TypeError) as exc:
        raise EventFormatError(f"Malformed count record: {exc}") from exc


def record_to_json(record: CountRecord) -> str:
    return json.dumps(record_to_dict(record), indent=2, sort_keys=True)
