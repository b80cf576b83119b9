"""Command-line driver: ``squeezechain {ideal,sweep,spectrum,traces,fit}``.

Exit codes: 0 success, 2 configuration error, 3 numeric/domain error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import tabular
from .calibration import extract_squeezing, fit_gain_curve, fit_loss_model, squeezer_gain_parameter, synthesize_traces
from .chain import ideal_squeezing, simulate_chain
from .config import ConfigError, RunConfig, load_config
from .spectral import bandwidth, linearized_squeezing, squeezing_at_wavelength, squeezing_spectrum, temporal_cycles
from .tabular import GAIN_COLUMNS, LOSS_COLUMNS, SPECTRUM_COLUMNS
from .units import db_to_r

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

AXES = ("pump_energy", "coupler_eta", "detection_loss", "measurement_gain", "sigma_phase")
SWEEP_COLUMNS = ("s_minus_db", "s_plus_db", "n_minus", "n_plus", "n_vac")
REPORT_WAVELENGTHS_NM = (1950.0, 2090.0, 2200.0)


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be >= 0")
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "out", None) is not None:
        cfg = replace(cfg, out_dir=args.out)
    return cfg


def _print(text: str):
    sys.stdout.write(text)
    sys.stdout.flush()


def sweep_rows(cfg: RunConfig, axis: str):
    """``(axis_value, SqueezingResult)`` pairs for one sweep axis, in range order."""
    if axis not in AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {', '.join(AXES)}")
    base = cfg.chain.to_params()
    rng = getattr(cfg.sweep, axis)
    rows = []
    for x in rng.values():
        x = float(x)
        if axis == "pump_energy":
            p = replace(base, r1=float(squeezer_gain_parameter(x, cfg.sweep.gain_strength)))
        elif axis == "coupler_eta":
            p = replace(base, eta_coupler=x)
        elif axis == "detection_loss":
            p = replace(base, eta_det=10.0 ** (-x / 10.0))
        elif axis == "measurement_gain":
            p = replace(base, r2=db_to_r(x))
        else:
            p = replace(base, sigma_phase=x)
        rows.append((x, simulate_chain(p)))
    return rows


def cmd_ideal(args) -> int:
    if args.r1_gain_db < 0 or args.r2_gain_db < 0:
        raise ValueError("gains must be >= 0 dB")
    try:
        s_minus, s_plus = ideal_squeezing(db_to_r(args.r1_gain_db), db_to_r(args.r2_gain_db))
    except ZeroDivisionError:
        raise ValueError("measurement gain of 0 dB leaves the output undefined") from None
    _print(
        tabular.format_csv(
            ("r1_gain_db", "r2_gain_db", "s_minus_db", "s_plus_db"),
            [(args.r1_gain_db, args.r2_gain_db, s_minus, s_plus)],
        )
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _config(args)
    rows = sweep_rows(cfg, args.axis)
    text = tabular.format_csv(
        (args.axis,) + SWEEP_COLUMNS,
        [(x, r.s_minus_db, r.s_plus_db, r.n_minus, r.n_plus, r.n_vac) for x, r in rows],
        {"axis": args.axis, "seed": cfg.seed},
    )
    path = tabular.write_text(Path(cfg.out_dir) / f"sweep_{args.axis}.csv", text)
    _print(f"wrote {path} ({len(rows)} rows)\n")
    return EXIT_OK


def spectrum_summary(cfg: RunConfig, threshold_db: float | None = None):
    """Compute the configured spectrum and its bandwidth/duration summary."""
    spec_cfg = cfg.spectral
    threshold = spec_cfg.threshold_db if threshold_db is None else threshold_db
    if threshold <= 0:
        raise ConfigError("--threshold-db must be positive")
    params = spec_cfg.to_params()
    grid = spec_cfg.grid()
    spectrum = squeezing_spectrum(params, grid)
    freq = spectrum.frequencies
    s_minus = spectrum.s_minus_db
    bw = bandwidth(freq, s_minus, threshold)
    lin = linearized_squeezing(s_minus)
    center = grid.center_wavelength
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cycles = {m: temporal_cycles(freq, lin, center, method=m) for m in ("gaussian_fit", "transform_limit_numeric")}
    at = {}
    for wl_nm in REPORT_WAVELENGTHS_NM:
        res = squeezing_at_wavelength(params, center, wl_nm * 1e-9)
        at[f"{wl_nm:g}"] = {"s_minus_db": res.s_minus_db, "s_plus_db": res.s_plus_db}
    summary = {
        "threshold_db": threshold,
        "bandwidth_thz": bw.width_hz / 1e12,
        "bandwidth_saturated": bw.saturated,
        "bandwidth_lower_thz": bw.lower_hz / 1e12,
        "bandwidth_upper_thz": bw.upper_hz / 1e12,
        "cycles": {
            m: {"cycles": d.cycles, "duration_fs": d.duration_s * 1e15, "definition": d.definition, "flagged": d.flagged}
            for m, d in cycles.items()
        },
        "squeezing_at_nm": at,
    }
    return spectrum, summary


def cmd_spectrum(args) -> int:
    cfg = _config(args)
    spectrum, summary = spectrum_summary(cfg, args.threshold_db)
    rows = zip(spectrum.frequencies / 1e12, spectrum.wavelengths * 1e9, spectrum.s_minus_db, spectrum.s_plus_db)
    out = Path(cfg.out_dir)
    tabular.write_text(out / "spectrum.csv", tabular.format_csv(SPECTRUM_COLUMNS, rows))
    tabular.write_text(out / "spectrum_summary.json", tabular.format_json(summary))
    flag = " (saturated: never crosses threshold)" if summary["bandwidth_saturated"] else ""
    lines = [f"bandwidth @ {summary['threshold_db']:g} dB: {summary['bandwidth_thz']:.3f} THz{flag}"]
    for m, d in summary["cycles"].items():
        lines.append(f"cycles [{m}]: {d['cycles']:.3f} ({d['duration_fs']:.2f} fs, {d['definition']})")
    for wl, v in summary["squeezing_at_nm"].items():
        lines.append(f"s_minus @ {wl} nm: {v['s_minus_db']:.3f} dB")
    lines.append(f"wrote {out / 'spectrum.csv'}")
    _print("\n".join(lines) + "\n")
    return EXIT_OK


def traces_summary(cfg: RunConfig):
    """Synthesize the four traces and compare extraction to the exact chain."""
    p = cfg.chain.to_params()
    tc = cfg.traces
    traces = synthesize_traces(p, tc.ramp(), tc.rin, cfg.seed, pump_ratio=tc.pump_ratio)
    got = extract_squeezing(traces, tc.window)
    truth = simulate_chain(p)
    summary = {
        "seed": cfg.seed,
        "rin": tc.rin,
        "n_samples": tc.n_samples,
        "extracted": {"s_minus_db": got.s_minus_db, "s_plus_db": got.s_plus_db},
        "ground_truth": {"s_minus_db": truth.s_minus_db, "s_plus_db": truth.s_plus_db},
        "error_db": {
            "s_minus": got.s_minus_db - truth.s_minus_db,
            "s_plus": got.s_plus_db - truth.s_plus_db,
        },
        "shotnoise_levels": {label: float(np.mean(traces[label].power)) for label in ("shotnoise_original", "shotnoise_max", "shotnoise_min")},
    }
    return traces, summary


def cmd_traces(args) -> int:
    cfg = _config(args)
    traces, summary = traces_summary(cfg)
    out = Path(cfg.out_dir)
    for label, trace in traces.items():
        tabular.write_text(out / f"trace_{label}.csv", tabular.trace_to_csv(trace))
    tabular.write_text(out / "traces_summary.json", tabular.format_json(summary))
    e = summary["extracted"]
    _print(f"extracted s_minus {e['s_minus_db']:.3f} dB, s_plus {e['s_plus_db']:.3f} dB; wrote 4 traces to {out}\n")
    return EXIT_OK


def cmd_fit(args) -> int:
    columns = LOSS_COLUMNS if args.model == "loss" else GAIN_COLUMNS
    _, data = tabular.read_csv(args.input, columns)
    if args.model == "loss":
        result = fit_loss_model(data)
    else:
        result = fit_gain_curve(data)
    _print(tabular.format_json(result))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="squeezechain", description="Two-stage OPA squeezing model and analysis.")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("--config", metavar="PATH", help="JSON run config (defaults to the reference device)")
        sp.add_argument("--seed", type=int, help="override config seed")
        sp.add_argument("--out", metavar="DIR", help="override config out_dir")

    p = sub.add_parser("ideal", help="lossless two-stage squeezing for gains in dB")
    p.add_argument("r1_gain_db", type=float)
    p.add_argument("r2_gain_db", type=float)
    p.set_defaults(func=cmd_ideal)

    p = sub.add_parser("sweep", help="sweep one chain parameter and write a CSV")
    with_config(p)
    p.add_argument("--axis", required=True, choices=AXES)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spectrum", help="per-bin squeezing spectrum with bandwidth and duration summary")
    with_config(p)
    p.add_argument("--threshold-db", type=float, help="bandwidth threshold below peak (dB)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("traces", help="synthesize zero-span traces and extract squeezing")
    with_config(p)
    p.set_defaults(func=cmd_traces)

    p = sub.add_parser("fit", help="fit the loss or gain model to a CSV and print JSON")
    p.add_argument("input", metavar="CSV")
    p.add_argument("--model", required=True, choices=("loss", "gain"))
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        where = f": {exc.filename}" if exc.filename else ""
        print(f"I/O error{where}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
