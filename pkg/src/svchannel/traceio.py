"""Text file formats: PDP trace files and parameter files.

A PDP trace is a two-column text table (``delay_ns,power_db``) preceded by
``# key: value`` metadata lines. Values are printed with 9 significant
digits, which makes emit -> parse -> emit byte-stable. A parameter file is a
JSON document holding one parameter set plus provenance.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .geometry import MisalignmentBin
from .metrics import Pdp
from .sv_core import Scenario, SvParameterSet

SPACING_TOLERANCE_NS = 1e-9
TRACE_HEADER = "delay_ns,power_db"


class TraceParseError(ValueError):
    """A trace or parameter file could not be parsed; the message cites the line."""


def _fmt(value: float) -> str:
    """9-significant-digit representation that round-trips through float()."""
    return f"{value:.9g}"


def _format_meta(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _fmt(value)
    return str(value)


def _parse_meta(text: str):
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def write_pdp_trace(path, pdp: Pdp, metadata=None) -> None:
    """Write a PDP as a trace file; powers are stored in dB (empty bins as -inf)."""
    meta = dict(metadata or {})
    meta.setdefault("delay_resolution_ns", pdp.delay_resolution_ns)
    meta.setdefault("normalized", pdp.normalized)
    with np.errstate(divide="ignore"):
        power_db = 10.0 * np.log10(pdp.powers)
    lines = [f"# {key}: {_format_meta(value)}" for key, value in meta.items()]
    lines.append(TRACE_HEADER)
    for delay, db in zip(pdp.delays(), power_db):
        lines.append(f"{_fmt(delay)},{_fmt(db)}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_pdp_trace(path):
    """Parse a trace file back into ``(Pdp, metadata dict)``.

    Validates the header, the monotone uniform delay grid (within 1e-9 ns),
    and that delays start at 0. Parse failures raise TraceParseError with the
    offending line number.
    """
    metadata = {}
    delays = []
    powers_db = []
    header_seen = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if header_seen:
                    raise TraceParseError(f"{path}:{lineno}: metadata after the header")
                key, sep, value = line[1:].partition(":")
                if not sep:
                    raise TraceParseError(f"{path}:{lineno}: malformed metadata line {line!r}")
                metadata[key.strip()] = _parse_meta(value.strip())
                continue
            if not header_seen:
                if line != TRACE_HEADER:
                    raise TraceParseError(
                        f"{path}:{lineno}: expected header {TRACE_HEADER!r}, got {line!r}"
                    )
                header_seen = True
                continue
            fields = line.split(",")
            if len(fields) != 2:
                raise TraceParseError(f"{path}:{lineno}: expected 2 columns, got {len(fields)}")
            try:
                delays.append(float(fields[0]))
                powers_db.append(float(fields[1]))
            except ValueError:
                raise TraceParseError(f"{path}:{lineno}: non-numeric row {line!r}") from None
    if not header_seen:
        raise TraceParseError(f"{path}: missing {TRACE_HEADER!r} header")
    if not delays:
        raise TraceParseError(f"{path}: trace contains no samples")

    delays = np.asarray(delays)
    if abs(delays[0]) > SPACING_TOLERANCE_NS:
        raise TraceParseError(f"{path}: delay column must start at 0, got {delays[0]!r}")
    if delays.size > 1:
        spacing = np.diff(delays)
        if np.any(spacing <= 0.0):
            raise TraceParseError(f"{path}: delay column must be strictly increasing")
        dt = float(np.mean(spacing))
        if np.any(np.abs(spacing - dt) > SPACING_TOLERANCE_NS):
            raise TraceParseError(f"{path}: delay grid is not uniform within 1e-9 ns")
    else:
        dt = metadata.get("delay_resolution_ns", 0.0)
    meta_dt = metadata.get("delay_resolution_ns")
    if isinstance(meta_dt, (int, float)) and delays.size > 1:
        if abs(meta_dt - dt) > SPACING_TOLERANCE_NS:
            raise TraceParseError(
                f"{path}: delay_resolution_ns metadata ({meta_dt}) disagrees with the grid ({dt})"
            )
        dt = float(meta_dt)
    if not dt > 0.0:
        raise TraceParseError(f"{path}: could not determine the delay resolution")

    powers = 10.0 ** (np.asarray(powers_db) / 10.0)
    pdp = Pdp(
        powers=powers,
        delay_resolution_ns=dt,
        normalized=bool(metadata.get("normalized", False)),
    )
    return pdp, metadata


def nan_to_none(values):
    return [None if (isinstance(v, float) and math.isnan(v)) else v for v in values]


def none_to_nan(values):
    return [float("nan") if v is None else float(v) for v in values]


def write_parameter_file(path, params, source="table", sample_count=1, diagnostics=None):
    """Write one parameter set (table row or extraction result) as JSON."""
    doc = {
        "scenario": params.scenario.value if params.scenario else None,
        "bin": params.bin.value if params.bin else None,
        "n_clusters": params.n_clusters,
        "ray_rates_per_ns": nan_to_none([float(v) for v in params.ray_rates]),
        "cluster_rate_per_ns": nan_to_none([float(params.cluster_rate)])[0],
        "ray_decays_ns": nan_to_none([float(v) for v in params.ray_decays]),
        "cluster_decay_ns": nan_to_none([float(params.cluster_decay)])[0],
        "provenance": {"source": source, "sample_count": sample_count},
    }
    if diagnostics:
        doc["diagnostics"] = diagnostics
    with open(path, "w", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_parameter_file(path):
    """Parse a parameter file into ``(SvParameterSet | None, raw doc)``.

    The first element is a full parameter set when the document is complete
    (scenario, bin, and all-positive values); otherwise None, with the raw
    document still available (extraction results may carry nulls).
    """
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TraceParseError(f"{path}:{exc.lineno}: {exc.msg}") from None
    try:
        n_clusters = int(doc["n_clusters"])
        ray_rates = none_to_nan(doc["ray_rates_per_ns"])
        ray_decays = none_to_nan(doc["ray_decays_ns"])
        cluster_rate = none_to_nan([doc["cluster_rate_per_ns"]])[0]
        cluster_decay = none_to_nan([doc["cluster_decay_ns"]])[0]
        scenario = doc.get("scenario")
        bin_value = doc.get("bin")
    except (KeyError, TypeError, ValueError) as exc:
        raise TraceParseError(f"{path}: malformed parameter file ({exc})") from None

    values = (*ray_rates, cluster_rate, *ray_decays, cluster_decay)
    complete = (
        scenario is not None
        and bin_value is not None
        and len(ray_rates) == n_clusters
        and len(ray_decays) == n_clusters
        and all(math.isfinite(v) and v > 0.0 for v in values)
    )
    params = None
    if complete:
        params = SvParameterSet(
            scenario=Scenario.parse(scenario),
            bin=MisalignmentBin(bin_value),
            n_clusters=n_clusters,
            ray_rates=tuple(ray_rates),
            cluster_rate=cluster_rate,
            ray_decays=tuple(ray_decays),
            cluster_decay=cluster_decay,
        )
    return params, doc
