"""CSV and JSON emission/ingestion for spectra, sweeps, traces and fit inputs.

Floats are written with 17 significant digits so that files round-trip
bit-exactly.  Lines starting with ``#`` are metadata (``# key: value``).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .calibration import ZeroSpanTrace

SPECTRUM_COLUMNS = ("frequency_THz", "wavelength_nm", "s_minus_db", "s_plus_db")
TRACE_COLUMNS = ("ramp_phase_rad", "power_photons")
LOSS_COLUMNS = ("s_plus_db", "s_minus_db")
GAIN_COLUMNS = ("energy_pj", "detected_photons")


class ParseError(ValueError):
    """Malformed tabular input; the message carries the file line number."""


def fmt(x) -> str:
    return format(float(x), ".17g")


def format_csv(columns: Sequence[str], rows: Iterable[Sequence[float]], meta: Dict[str, object] | None = None) -> str:
    out = io.StringIO()
    for key, value in (meta or {}).items():
        out.write(f"# {key}: {value}\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")
    return out.getvalue()


def parse_csv(text: str, columns: Sequence[str], source: str = "<input>") -> Tuple[Dict[str, str], np.ndarray]:
    """Parse a metadata-prefixed CSV whose header must equal ``columns``."""
    meta: Dict[str, str] = {}
    header = None
    rows: List[List[float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            key, sep, value = stripped[1:].partition(":")
            if sep:
                meta[key.strip()] = value.strip()
            continue
        fields = next(csv.reader([stripped]))
        if header is None:
            header = [f.strip() for f in fields]
            if tuple(header) != tuple(columns):
                raise ParseError(f"{source}:{lineno}: expected header {','.join(columns)}, got {stripped}")
            continue
        if len(fields) != len(columns):
            raise ParseError(f"{source}:{lineno}: expected {len(columns)} fields, got {len(fields)}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            raise ParseError(f"{source}:{lineno}: non-numeric field in {stripped!r}") from None
    if header is None:
        raise ParseError(f"{source}: no header line found")
    return meta, np.array(rows, dtype=float).reshape(-1, len(columns))


def read_csv(path, columns: Sequence[str]):
    path = Path(path)
    return parse_csv(path.read_text(), columns, str(path))


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def to_jsonable(obj):
    if is_dataclass(obj):
        obj = asdict(obj)
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def format_json(obj) -> str:
    # Infinity is emitted as a string so the output stays strict JSON
    def clean(v):
        if isinstance(v, float) and not np.isfinite(v):
            return str(v)
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, list):
            return [clean(x) for x in v]
        return v

    return json.dumps(clean(to_jsonable(obj)), indent=2, sort_keys=True) + "\n"


def trace_to_csv(trace: ZeroSpanTrace) -> str:
    return format_csv(
        TRACE_COLUMNS,
        zip(trace.ramp_phase, trace.power),
        {"label": trace.label, "seed": trace.rng_seed},
    )


def trace_from_csv(text: str, source: str = "<input>") -> ZeroSpanTrace:
    meta, data = parse_csv(text, TRACE_COLUMNS, source)
    if "label" not in meta or "seed" not in meta:
        raise ParseError(f"{source}: trace header must carry label and seed")
    try:
        seed = int(meta["seed"])
    except ValueError:
        raise ParseError(f"{source}: seed {meta['seed']!r} is not an integer") from None
    return ZeroSpanTrace(data[:, 0], data[:, 1], meta["label"], seed)


def read_trace(path) -> ZeroSpanTrace:
    path = Path(path)
    return trace_from_csv(path.read_text(), str(path))


def bundled_path(name: str) -> Path:
    return Path(__file__).parent / "data" / name
