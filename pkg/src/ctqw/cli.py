"""``ctqw`` command line.

    ctqw <subcommand> --config FILE [--out DIR] [--format csv|json]
                      [--horizon-scale F] [--threads N]

Exit status: 0 on success, 2 on configuration errors, 3 on numerical
errors (boundary contamination, non-converging expansion).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ctqw import io
from ctqw.config import EXPERIMENTS, ExperimentConfig, emit_config, parse_config
from ctqw.errors import ConfigError, NumericalError
from ctqw.experiments import (
    PROTOCOL_NAMES,
    compare_protocols,
    refine_omega,
    run_series,
    snapshot,
    sweep_beta,
    sweep_omega,
)
from ctqw.propagator import DefectProtocol

log = logging.getLogger("ctqw")

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _run(cfg: ExperimentConfig, out: Path):
    fmt = cfg.output_format
    lattice, prop = cfg.lattice, cfg.propagator
    files, summary = [], {}
    if cfg.experiment == "run":
        protocol = cfg.protocol.build()
        series = run_series(lattice, protocol, cfg.horizon, cfg.samples, prop, cfg.initial_site)
        reference = run_series(
            lattice, DefectProtocol.free(), cfg.horizon, cfg.samples, prop, cfg.initial_site
        )
        series = series.with_reference(reference)
        files.append(io.write_series(series, out / f"series.{fmt}", fmt))
        final = series.final()
        summary = {"final": {k: getattr(final, k) for k in ("time", "sigma", "sigma_ratio", "shannon", "ipr")}}
    elif cfg.experiment in ("sweep-beta", "sweep-omega"):
        spec = cfg.sweep_spec()
        if spec.kind == "beta":
            table = sweep_beta(spec, lattice, prop, cfg.initial_site, cfg.threads)
        elif cfg.sweep[3]:
            table = refine_omega(spec, lattice, prop, cfg.initial_site, cfg.threads,
                                 cfg.protocol.phase, top=cfg.sweep[3])
        else:
            table = sweep_omega(spec, lattice, prop, cfg.initial_site, cfg.threads, cfg.protocol.phase)
        name = cfg.experiment.replace("-", "_")
        files.append(io.write_table(table, out / f"{name}.{fmt}", fmt))
        summary = {"sigma0": table.sigma0, "argmax": table.argmax, "max_ratio": table.max_ratio}
        if table.certificate is not None:
            summary["parrondo"] = table.certificate.as_dict()
    elif cfg.experiment == "compare":
        p = cfg.protocol
        result = compare_protocols(
            lattice, p.beta1, p.beta2, p.omega, cfg.horizon, prop,
            cfg.samples, cfg.initial_site, cfg.threads, p.phase,
        )
        if fmt == "csv":
            for name in PROTOCOL_NAMES:
                files.append(io.write_series(result.series[name], out / f"{name}.csv"))
        else:
            bundle = {name: io.series_columns(result.series[name]) for name in PROTOCOL_NAMES}
            files.append(io.write_json(out / "comparison.json", bundle))
        summary = {
            "parrondo": result.certificate().as_dict(),
            "final": {
                name: {"sigma_ratio": r.sigma_ratio, "shannon": r.shannon, "ipr": r.ipr}
                for name, r in ((n, result.final(n)) for n in PROTOCOL_NAMES)
            },
        }
    elif cfg.experiment == "snapshot":
        snap = snapshot(lattice, cfg.protocol.build(), cfg.horizon, prop, cfg.initial_site)
        if fmt == "csv":
            files.append(io.write_profile(snap.sites, snap.distribution, "P_j", out / "distribution.csv"))
            files.append(io.write_profile(snap.sites, snap.rqd, "RQD_j", out / "rqd.csv"))
        else:
            files.append(io.write_json(out / "snapshot.json", {
                "j": snap.sites, "P_j": snap.distribution, "RQD_j": snap.rqd,
            }))
        summary = {"peaks": snap.peaks}
    return files, summary


def execute(cfg: ExperimentConfig, out_dir=None) -> tuple[list[Path], dict]:
    """Run a resolved config and write its outputs plus the manifest."""
    out = io.prepare_dir(out_dir or cfg.output_dir)
    files, summary = _run(cfg, out)
    files.append(io.write_manifest(out, cfg.to_dict(), files, summary))
    return files, summary


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctqw",
        description="Continuous-time quantum walks with alternating transition defects.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path, help="YAML experiment config")
        p.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
        p.add_argument("--format", choices=("csv", "json"), help="overrides output.format")
        p.add_argument("--horizon-scale", type=float, default=1.0,
                       help="multiply the horizon (and sampling interval) by this factor")
        p.add_argument("--threads", type=int, help="worker threads for independent runs")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc.strerror or exc}", "--config") from exc
        cfg = parse_config(text, args.command)
        overrides = {}
        if args.out is not None:
            overrides["output_dir"] = str(args.out)
        if args.format is not None:
            overrides["output_format"] = args.format
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("threads >= 1 violated", "--threads")
            overrides["threads"] = args.threads
        cfg = replace(cfg, **overrides).resolved(args.horizon_scale)
        sys.stdout.write(emit_config(cfg))
        sys.stdout.flush()
        files, _ = execute(cfg)
    except ConfigError as exc:
        print(f"ConfigError: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"OSError: {exc}", file=sys.stderr)
        return 1
    for f in files:
        log.info("wrote %s", f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
