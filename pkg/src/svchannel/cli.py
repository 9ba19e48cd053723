"""Command-line surface: ``angle``, ``simulate``, ``extract``, ``validate``.

Every command is a pure function of its arguments, input files, and seed;
repeated invocations produce byte-identical output. Exit codes form a stable
scripting contract: 0 success, 1 usage error, 2 data/domain error, 3 I/O
error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields as dataclass_fields
from pathlib import Path

import numpy as np

from . import extraction, metrics, simulator, traceio
from .geometry import AngularPose, bin_for, is_extrapolated, total_misalignment
from .metrics import Pdp, normalize_pdp
from .simulator import SimConfig
from .sv_core import Scenario

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3

OUTPUT_DIR_ENV = "SVCHANNEL_OUTPUT_DIR"

_FORMAT_CHOICES = ("text", "json", "json-like-structured")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad arguments; route through UsageError
    # instead so the exit-code contract (usage errors -> 1) holds.
    def error(self, message):
        raise UsageError(message)


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def _emit(pairs, as_json):
    if as_json:
        print(json.dumps(dict(pairs), indent=2, sort_keys=True))
    else:
        for key, value in pairs:
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = _fmt(value)
            print(f"{key}: {value}")


def _want_json(args) -> bool:
    return args.format != "text"


def _load_config(path, seed=None) -> SimConfig:
    """Build a SimConfig from a JSON file of overrides (all fields optional)."""
    overrides = {}
    if path is not None:
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise traceio.TraceParseError(f"{path}:{exc.lineno}: {exc.msg}") from None
        known = {f.name for f in dataclass_fields(SimConfig)}
        unknown = set(doc) - known
        if unknown:
            raise traceio.TraceParseError(
                f"{path}: unknown config keys {sorted(unknown)}; expected {sorted(known)}"
            )
        overrides.update(doc)
    if seed is not None:
        overrides["seed"] = seed
    return SimConfig(**overrides)


def _resolve_psi(args):
    """(psi, theta, phi) from either --psi or the --theta/--phi pair."""
    if args.psi is not None:
        if args.theta is not None or args.phi is not None:
            raise UsageError("give either --psi or the --theta/--phi pair, not both")
        if args.psi < 0.0:
            raise ValueError(f"psi must be >= 0 deg, got {args.psi}")
        return args.psi, None, None
    if args.theta is None or args.phi is None:
        raise UsageError("either --psi or both --theta and --phi are required")
    pose = AngularPose(theta_deg=args.theta, phi_deg=args.phi)
    return total_misalignment(pose), args.theta, args.phi


def _output_dir(args) -> Path:
    if args.output is not None:
        return Path(args.output)
    env = os.environ.get(OUTPUT_DIR_ENV)
    return Path(env) if env else Path.cwd()


def cmd_angle(args) -> int:
    pose = AngularPose(theta_deg=args.theta, phi_deg=args.phi)
    psi = total_misalignment(pose)
    _emit(
        [
            ("psi_deg", psi),
            ("bin", bin_for(psi).value),
            ("extrapolated", is_extrapolated(psi)),
        ],
        _want_json(args),
    )
    return EXIT_OK


def _simulate_one(scenario, psi, config, params, index):
    rng = simulator.realization_rng(config.seed, index)
    pdp = simulator.simulate_pdp(scenario, psi, config, rng=rng, params=params)
    return normalize_pdp(pdp)


def cmd_simulate(args) -> int:
    scenario = Scenario.parse(args.scenario)
    psi, theta, phi = _resolve_psi(args)
    config = _load_config(args.config, seed=args.seed)
    if args.realizations < 1:
        raise ValueError("--realizations must be >= 1")

    params = None
    if args.parameters is not None:
        params, _ = traceio.read_parameter_file(args.parameters)
        if params is None:
            raise traceio.TraceParseError(
                f"{args.parameters}: parameter file is incomplete (nulls or missing "
                "scenario/bin); simulation needs a full parameter set"
            )

    out_dir = _output_dir(args)
    out_dir.mkdir(parents=True, exist_ok=True)

    indices = range(args.realizations)
    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            pdps = list(pool.map(lambda i: _simulate_one(scenario, psi, config, params, i), indices))
    else:
        pdps = [_simulate_one(scenario, psi, config, params, i) for i in indices]

    used = params if params is not None else simulator.lookup_parameters(scenario, psi)
    meta = {
        "scenario": scenario.value,
        "theta_deg": float("nan") if theta is None else theta,
        "phi_deg": float("nan") if phi is None else phi,
        "psi_deg": psi,
        "bin": used.bin.value,
        "extrapolated": is_extrapolated(psi),
        "seed": config.seed,
    }
    written = []
    for i, pdp in enumerate(pdps):
        path = out_dir / f"realization_{i:04d}.csv"
        traceio.write_pdp_trace(path, pdp, {**meta, "realization_index": i})
        written.append(str(path))

    # Ensemble: per-bin mean of the normalized realizations, re-normalized.
    stacked = np.mean([p.powers for p in pdps], axis=0)
    ensemble = normalize_pdp(Pdp(stacked, config.delay_resolution_ns))
    ensemble_path = out_dir / "ensemble_average.csv"
    traceio.write_pdp_trace(ensemble_path, ensemble, {**meta, "realizations": args.realizations})
    written.append(str(ensemble_path))

    _emit(
        [
            ("scenario", scenario.value),
            ("psi_deg", psi),
            ("bin", used.bin.value),
            ("extrapolated", is_extrapolated(psi)),
            ("seed", config.seed),
            ("realizations", args.realizations),
            ("ensemble_rms_delay_spread_ns", metrics.rms_delay_spread(ensemble)),
            ("files_written", len(written)),
            ("output_dir", str(out_dir)),
        ],
        _want_json(args),
    )
    return EXIT_OK


_DEFAULT_CLUSTERS = {Scenario.O2I: 2, Scenario.O2O: 3}


def _trace_paths(inputs):
    paths = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            paths.extend(sorted(q for q in p.iterdir() if q.suffix == ".csv"))
        else:
            paths.append(p)
    if not paths:
        raise ValueError("no input traces found")
    return paths


def cmd_extract(args) -> int:
    paths = _trace_paths(args.input)
    entries = []
    bins = set()
    scenarios = set()
    for path in paths:
        try:
            pdp, meta = traceio.read_pdp_trace(path)
            if "realizations" in meta:
                print(
                    f"note: skipping {path}: ensemble-average trace, not a per-angle trace",
                    file=sys.stderr,
                )
                continue
            scenario = Scenario.parse(meta["scenario"]) if "scenario" in meta else None
            n_clusters = args.clusters
            if n_clusters is None:
                if scenario is None:
                    raise ValueError(
                        "trace carries no scenario metadata; pass --clusters explicitly"
                    )
                n_clusters = _DEFAULT_CLUSTERS[scenario]
            bin_ = bin_for(float(meta["psi_deg"])) if "psi_deg" in meta else None
            entry = extraction.extract_parameters(pdp, n_clusters, scenario=scenario, bin=bin_)
            entries.append(entry)
            bins.add(bin_)
            scenarios.add(scenario)
        except (ValueError, traceio.TraceParseError) as exc:
            print(f"warning: skipping {path}: {exc}", file=sys.stderr)
    if not entries:
        raise ValueError("no input trace could be extracted")
    if len(bins) > 1:
        raise ValueError(
            f"input traces span several misalignment bins ({sorted(b.value if b else '?' for b in bins)}); "
            "aggregate one bin at a time"
        )

    aggregated = extraction.aggregate_over_bin(entries, bin=bins.pop() if bins else None)
    diagnostics = {
        "ray_fit_rms_db": traceio.nan_to_none([float(v) for v in aggregated.ray_fit_rms_db]),
        "cluster_fit_rms_db": traceio.nan_to_none([aggregated.cluster_fit_rms_db])[0],
        "mean_peak_counts": [float(v) for v in aggregated.peak_counts],
        "traces": len(entries),
    }
    traceio.write_parameter_file(
        args.output,
        aggregated,
        source="extracted",
        sample_count=aggregated.sample_count,
        diagnostics=diagnostics,
    )
    _emit(
        [
            ("traces_used", len(entries)),
            ("traces_skipped", len(paths) - len(entries)),
            ("output", str(args.output)),
        ],
        _want_json(args),
    )
    return EXIT_OK


def _rebin_to(pdp: Pdp, dt: float) -> Pdp:
    """Re-accumulate bin powers onto a coarser grid of width ``dt`` (sums, not interpolation)."""
    if abs(pdp.delay_resolution_ns - dt) <= 1e-12:
        return pdp
    if dt < pdp.delay_resolution_ns:
        raise ValueError(
            f"cannot re-accumulate a {pdp.delay_resolution_ns} ns grid onto a finer "
            f"{dt} ns grid"
        )
    idx = np.floor(pdp.delays() / dt + 1e-12).astype(int)
    powers = np.bincount(idx, weights=pdp.powers)
    return Pdp(powers=powers, delay_resolution_ns=dt)


def cmd_validate(args) -> int:
    measured, _ = traceio.read_pdp_trace(args.measured)
    simulated, _ = traceio.read_pdp_trace(args.simulated)
    simulated = _rebin_to(simulated, measured.delay_resolution_ns)
    if simulated.powers.size != measured.powers.size:
        raise ValueError(
            f"traces differ in length after resampling: measured {measured.powers.size} "
            f"bins, simulated {simulated.powers.size} bins"
        )
    # traces are compared as stored; the trace format records whether a
    # profile is normalized, and correlation/RMS are scale-invariant anyway
    report = metrics.gof_report(measured, simulated)
    _emit(
        [
            ("correlation", report.correlation),
            ("ks_statistic", report.ks_statistic),
            ("ks_reject_at_5pct", report.ks_reject_at_5pct),
            ("rms_measured_ns", report.rms_measured_ns),
            ("rms_simulated_ns", report.rms_simulated_ns),
        ],
        _want_json(args),
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="svchannel",
        description=(
            "Misalignment-aware Saleh-Valenzuela channel toolkit for 60 GHz fixed "
            "uplinks: simulate directional PDPs, extract model parameters from "
            "traces, and score measured-vs-simulated fits."
        ),
        epilog=(
            f"The environment variable {OUTPUT_DIR_ENV} sets the default output "
            "directory for commands that write files. Exit codes: 0 success, "
            "1 usage error, 2 data/domain error, 3 I/O error."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument(
            "--format",
            choices=_FORMAT_CHOICES,
            default="text",
            help="output style; 'json-like-structured' (alias 'json') emits a machine-readable document",
        )

    p_angle = sub.add_parser("angle", help="total misalignment angle and parameter bin")
    p_angle.add_argument("--theta", type=float, required=True, help="elevation misalignment, deg")
    p_angle.add_argument("--phi", type=float, required=True, help="azimuth misalignment, deg")
    add_format(p_angle)
    p_angle.set_defaults(func=cmd_angle)

    p_sim = sub.add_parser("simulate", help="simulate directional PDP realizations")
    p_sim.add_argument("--scenario", required=True, choices=("o2i", "o2o"))
    p_sim.add_argument("--psi", type=float, help="total misalignment angle, deg")
    p_sim.add_argument("--theta", type=float, help="elevation misalignment, deg")
    p_sim.add_argument("--phi", type=float, help="azimuth misalignment, deg")
    p_sim.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p_sim.add_argument("--realizations", type=int, default=1)
    p_sim.add_argument("--output", help=f"output directory (default ${OUTPUT_DIR_ENV} or cwd)")
    p_sim.add_argument("--parameters", help="parameter file overriding the built-in tables")
    p_sim.add_argument("--config", help="JSON file overriding simulation config fields")
    p_sim.add_argument("--workers", type=int, default=1, help="concurrent realizations")
    add_format(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_ext = sub.add_parser("extract", help="estimate S-V parameters from trace files")
    p_ext.add_argument("--input", nargs="+", required=True, help="trace files or a directory")
    p_ext.add_argument("--clusters", type=int, help="cluster count (default: 2 for o2i, 3 for o2o)")
    p_ext.add_argument("--output", required=True, help="parameter file to write")
    add_format(p_ext)
    p_ext.set_defaults(func=cmd_extract)

    p_val = sub.add_parser("validate", help="goodness-of-fit between two traces")
    p_val.add_argument("--measured", required=True)
    p_val.add_argument("--simulated", required=True)
    add_format(p_val)
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (traceio.TraceParseError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint():
    sys.exit(main())
