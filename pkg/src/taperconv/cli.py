"""``taperconv <subcommand> --config <file> [--out <file>] [--format csv|json]``."""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, io
from .analytic import area_uniform, bandwidth_estimate
from .config import ConfigError, RunConfig, from_dict, parse_config
from .dispersion import coupling_g, phase_matched_width
from .experiments import area_sweep, records_csv, records_jsonl, sweep
from .propagation import efficiency, propagate, raw_efficiency, resolve_step_count
from .spectrum import compute_spectrum
from .validate import run_checks

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

SUBCOMMANDS = ("propagate", "spectrum", "sweep", "area-law", "phase-match", "validate")


def _complex(z) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def _kv(rows: list[tuple], fmt: str, config: dict) -> str:
    if fmt == "json":
        return json.dumps({"version": __version__, "config": config, **{k: io.round_floats(v) for k, v in rows}}, indent=2, sort_keys=True) + "\n"
    return io.csv_text(["key", "value"], rows, config)


def cmd_propagate(cfg: RunConfig, fmt: str, threads) -> tuple[str, int]:
    model, prof, settings = cfg.build_model(), cfg.build_profile(), cfg.build_settings()
    s = cfg.simulation
    n = resolve_step_count(model, prof, s.length, s.pump_power, s.lambda3, settings)
    m = propagate(model, prof, s.length, s.pump_power, s.lambda3, settings)
    rows = [
        ("eta", efficiency(m)),
        ("eta_raw", raw_efficiency(m)),
        ("step_count", n),
        ("unitarity_error", m.unitarity_error()),
    ]
    if fmt == "json":
        rows += [(k, _complex(getattr(m, k))) for k in ("m11", "m12", "m21", "m22")]
    else:
        for k in ("m11", "m12", "m21", "m22"):
            z = getattr(m, k)
            rows += [(f"{k}_re", float(np.real(z))), (f"{k}_im", float(np.imag(z)))]
    return _kv(rows, fmt, cfg.to_dict()), EXIT_OK


def cmd_spectrum(cfg: RunConfig, fmt: str, threads) -> tuple[str, int]:
    model, prof, settings = cfg.build_model(), cfg.build_profile(), cfg.build_settings()
    s, sp = cfg.simulation, cfg.spectrum
    spec = compute_spectrum(model, prof, s.length, s.pump_power, sp.lambda_min, sp.lambda_max, sp.points, settings, threads)
    text = io.spectrum_json(spec, cfg.to_dict()) if fmt == "json" else io.spectrum_csv(spec, cfg.to_dict())
    return text, EXIT_OK


def cmd_sweep(cfg: RunConfig, fmt: str, threads) -> tuple[str, int]:
    model, prof, settings = cfg.build_model(), cfg.build_profile(), cfg.build_settings()
    s, sw = cfg.simulation, cfg.sweep
    recs = sweep(
        model, prof, s.length, s.pump_power, sw.parameter, sw.values, sw.observable,
        lambda3=s.lambda3, points=cfg.spectrum.points, settings=settings, threads=threads,
    )
    text = records_jsonl(recs, cfg.to_dict()) if fmt == "json" else records_csv(recs, cfg.to_dict())
    return text, EXIT_OK


def cmd_area_law(cfg: RunConfig, fmt: str, threads) -> tuple[str, int]:
    model, settings = cfg.build_model(), cfg.build_settings()
    s = cfg.simulation
    dws = cfg.sweep.values if cfg.sweep.parameter == "delta_w" else (0.0, 2.0, 4.0, 8.0)
    recs = area_sweep(model, s.length, s.pump_power, delta_ws=dws, points=cfg.spectrum.points, settings=settings, threads=threads)
    est = area_uniform(coupling_g(model, model.w0, s.pump_power), s.length, model.dbeta_dlambda)
    header = ["delta_w_nm", "area_numeric_nm", "area_analytic_nm", "ratio", "bandwidth_estimate_nm", "weak_coupling", "warning"]
    rows = [
        [r.value, r.result, est.value, r.result / est.value,
         bandwidth_estimate(r.value, model.kappa_w, model.dbeta_dlambda), est.weak_coupling, r.warning.replace(",", ";")]
        for r in recs
    ]
    if fmt == "json":
        doc = {"version": __version__, "config": cfg.to_dict(), "rows": [dict(zip(header, io.round_floats(row))) for row in rows]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n", EXIT_OK
    return io.csv_text(header, rows, cfg.to_dict()), EXIT_OK


def cmd_phase_match(cfg: RunConfig, fmt: str, threads) -> tuple[str, int]:
    model = cfg.build_model()
    lam = cfg.simulation.lambda3
    w = phase_matched_width(model, lam)
    return _kv([("lambda3_nm", lam), ("phase_matched_width_um", w)], fmt, cfg.to_dict()), EXIT_OK


def cmd_validate(cfg: RunConfig, fmt: str, threads) -> tuple[str, int]:
    results = run_checks()
    ok = all(c.passed for c in results)
    if fmt == "json":
        doc = {"version": __version__, "passed": ok, "checks": [c._asdict() for c in results]}
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        text = "".join(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  ({c.detail})\n" for c in results)
    return text, EXIT_OK if ok else EXIT_FAILURE


COMMANDS = {
    "propagate": cmd_propagate,
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "area-law": cmd_area_law,
    "phase-match": cmd_phase_match,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="taperconv", description=__doc__)
    ap.add_argument("--version", action="version", version=f"taperconv {__version__}")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="JSON config file, '-' for stdin (validate: optional)")
    ap.add_argument("--out", help="output file (default stdout)")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--threads", type=int, default=None, help="override TAPERCONV_THREADS (0 = auto)")
    return ap


def run(subcommand: str, config: RunConfig, out=None, fmt: str = "csv", threads=None) -> int:
    text, status = COMMANDS[subcommand](config, fmt, threads)
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is None:
            if args.subcommand != "validate":
                raise ConfigError("--config", "required for this subcommand")
            cfg = from_dict({})
        else:
            cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(args.subcommand, cfg, args.out, args.format, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
