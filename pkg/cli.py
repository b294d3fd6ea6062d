#!/usr/bin/env python3
"""
CLI interface for the quantum illumination toolkit
Exit status: 0 ok, 2 configuration error, 3 numeric failure
"""
import argparse
import asyncio
import json
import math
import sys
from pathlib import Path
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from analysis.analytic import closed_form_for, piecewise, region_table
from analysis.helstrom import helstrom_bound
from analysis.infotheory import holevo
from analysis.metrics import evaluate_state, low_eta_sweep
from config import config, parse_log_base
from core.errors import ConfigError, NumericError
from core.presets import ProbeConfig, load_presets, resolve_probe
from core.scenario import Scenario, build_hypotheses
from study import IlluminationStudy
from utils.export import timestamp, write_rows
from utils.log import setup_logging

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class RunConfig(BaseModel):
    """Everything needed to reproduce one invocation; echoed into output metadata"""
    command: Literal["hb", "mean", "holevo", "table", "regions", "sweep", "validate", "presets"]
    config: Optional[List[str]] = None
    suite: Optional[str] = None
    p0: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    eta: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    tol: Optional[float] = Field(default=None, gt=0.0)
    log_base: float = Field(default_factory=lambda: config.log_base, gt=1.0)
    threads: int = Field(default_factory=lambda: max(1, config.threads), ge=1)
    expensive: bool = False
    resolution: int = Field(default_factory=lambda: config.resolution, ge=2)
    format: Literal["csv", "json"] = "csv"
    output: Optional[str] = None
    eta_max: float = Field(default=0.01, gt=0.0, le=1.0)
    points: int = Field(default=101, ge=2)
    at: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    holevo: bool = False
    numeric: bool = False
    json_output: bool = False
    presets: Optional[str] = None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Quantum illumination toolkit - Helstrom bounds, optimal measurements and mean-value tables",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s hb --config bell_1s1i --p0 0.4 --eta 0.5
  %(prog)s mean --config s_si_2s1i --holevo
  %(prog)s table three-qubit --format json
  %(prog)s table four-ququart-3s1i --expensive
  %(prog)s regions --config s_si_2s1i --resolution 201
  %(prog)s sweep --suite three-qubit-2s1i --at 0.005
  %(prog)s validate               # Validate configuration
  %(prog)s presets                # List shipped presets
        """
    )
    parser.add_argument("--log-level", type=str, default=config.log_level, help="Logging level (default: %(default)s)")
    parser.add_argument("--presets", type=str, help="Presets file (default: QI_PRESETS_PATH)")

    subparsers = parser.add_subparsers(dest="command", help="Commands")

    def scenario_args(p, multiple: bool = False):
        p.add_argument("--config", "-c", type=str, required=not multiple, action="append" if multiple else None,
                       help="Preset name or path of a JSON probe file")

    def point_args(p):
        p.add_argument("--p0", type=float, required=True, help="Prior probability that the target is absent")
        p.add_argument("--eta", type=float, required=True, help="Target reflectivity")

    def output_args(p):
        p.add_argument("--format", "-f", choices=["csv", "json"], default="csv", help="Output format (default: csv)")
        p.add_argument("--output", "-o", type=str, help="Output file path (default: QI_OUTPUT_DIR/<name>.<format>)")

    hb_parser = subparsers.add_parser("hb", help="Helstrom bound at one (p0, eta) point")
    scenario_args(hb_parser)
    point_args(hb_parser)
    hb_parser.add_argument("--json", dest="json_output", action="store_true", help="Output raw JSON")

    holevo_parser = subparsers.add_parser("holevo", help="Holevo information at one (p0, eta) point")
    scenario_args(holevo_parser)
    point_args(holevo_parser)
    holevo_parser.add_argument("--log-base", type=parse_log_base, help="Logarithm base, e or a number (default: QI_LOG_BASE)")
    holevo_parser.add_argument("--json", dest="json_output", action="store_true", help="Output raw JSON")

    mean_parser = subparsers.add_parser("mean", help="Mean Helstrom bound over the (p0, eta) square")
    scenario_args(mean_parser)
    mean_parser.add_argument("--tol", type=float, help="Absolute quadrature tolerance")
    mean_parser.add_argument("--holevo", action="store_true", help="Also integrate the Holevo information")
    mean_parser.add_argument("--log-base", type=parse_log_base, help="Logarithm base for the Holevo information (e or a number)")
    mean_parser.add_argument("--threads", type=int, help="Worker threads for point evaluation")
    mean_parser.add_argument("--expensive", action="store_true", help="Allow 256-dimensional probes")

    table_parser = subparsers.add_parser("table", help="Mean HB / Holevo table for a preset suite")
    table_parser.add_argument("suite", type=str, help="three-qubit, three-qutrit, four-qubit or four-ququart, optionally -<config>")
    table_parser.add_argument("--tol", type=float, help="Absolute quadrature tolerance")
    table_parser.add_argument("--log-base", type=parse_log_base, help="Logarithm base for the Holevo information (e or a number)")
    table_parser.add_argument("--threads", type=int, help="Worker threads per state")
    table_parser.add_argument("--expensive", action="store_true", help="Allow 256-dimensional probes")
    output_args(table_parser)

    regions_parser = subparsers.add_parser("regions", help="Region map over a (p0, eta) grid")
    scenario_args(regions_parser)
    regions_parser.add_argument("--resolution", type=int, help="Grid points per axis (default: QI_RESOLUTION)")
    regions_parser.add_argument("--numeric", action="store_true", help="Classify from the numeric spectrum instead of closed forms")
    output_args(regions_parser)

    sweep_parser = subparsers.add_parser("sweep", help="Helstrom bound on a low-eta grid at fixed p0")
    scenario_args(sweep_parser, multiple=True)
    sweep_parser.add_argument("--suite", type=str, help="Sweep every state of a suite")
    sweep_parser.add_argument("--p0", type=float, default=0.5, help="Prior (default: 0.5)")
    sweep_parser.add_argument("--eta-max", type=float, default=0.01, help="Largest eta (default: 0.01)")
    sweep_parser.add_argument("--points", type=int, default=101, help="Grid points (default: 101)")
    sweep_parser.add_argument("--at", type=float, help="Report the ordering at this eta")
    output_args(sweep_parser)

    subparsers.add_parser("validate", help="Validate configuration")
    subparsers.add_parser("presets", help="List shipped presets and suites")
    return parser


def make_run_config(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if k in RunConfig.model_fields and v is not None}
    if isinstance(values.get("config"), str):
        values["config"] = [values["config"]]
    return RunConfig(**values)


def main(argv: List[str] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)

    if args.command is None:
        parser.print_help()
        return EXIT_OK

    handlers = {
        "hb": cmd_hb,
        "holevo": cmd_holevo,
        "mean": cmd_mean,
        "table": cmd_table,
        "regions": cmd_regions,
        "sweep": cmd_sweep,
        "validate": cmd_validate,
        "presets": cmd_presets,
    }
    try:
        run = make_run_config(args)
        return handlers[run.command](run)
    except ValidationError as e:
        print(f"❌ Invalid configuration:\n{e}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as e:
        print(f"❌ Numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except KeyboardInterrupt:
        print("\n\nInterrupted by user")
        return 1


def _probe(run: RunConfig) -> ProbeConfig:
    probe = resolve_probe(run.config[0], run.presets)
    if probe.expensive and run.command in ("mean", "table") and not run.expensive:
        raise ConfigError(f"{probe.name} needs a {probe.matrix_size}-dimensional eigensolve per point; pass --expensive")
    return probe


def _output_path(run: RunConfig, name: str) -> Path:
    if run.output:
        return Path(run.output)
    return Path(config.output_dir) / f"{name}.{run.format}"


def _metadata(run: RunConfig, **extra) -> dict:
    return dict({"generated_at": timestamp(), "run_config": run.model_dump()}, **extra)


def cmd_hb(run: RunConfig) -> int:
    """Helstrom bound, optimal projector rank and region at one point"""
    probe = _probe(run)
    h = build_hypotheses(Scenario(probe.build(), run.eta, run.p0, probe.noise))
    outcome = helstrom_bound(h, run.p0)
    report = dict(outcome.to_dict(), config=probe.name, p0=run.p0, eta=run.eta)

    closed_form = closed_form_for(probe.configuration, probe.label, probe.d)
    if closed_form is not None and math.isclose(probe.theta, math.pi / 2) and probe.weights is None:
        analytic = piecewise(closed_form).evaluate(run.p0, run.eta)
        report["analytic_p_err"] = analytic.p_err
        report["analytic_region"] = analytic.region_id

    if run.json_output:
        print(json.dumps(report, indent=2, sort_keys=True))
        return EXIT_OK

    print(f"\n🎯 {probe.configuration} {probe.label} at p0={run.p0}, η={run.eta}")
    print("-" * 40)
    print(f"  Helstrom bound: {outcome.p_err:.12f}")
    print(f"  Region:         {outcome.region}")
    print(f"  Π1 rank:        {outcome.rank}")
    print(f"  Spectrum:       {np.array2string(outcome.spectrum, precision=6, max_line_width=120)}")
    if "analytic_p_err" in report:
        print(f"  Closed form:    {report['analytic_p_err']:.12f} (region {report['analytic_region']})")
    return EXIT_OK


def cmd_holevo(run: RunConfig) -> int:
    probe = _probe(run)
    h = build_hypotheses(Scenario(probe.build(), run.eta, run.p0, probe.noise))
    result = holevo(h, run.p0, run.log_base)
    if run.json_output:
        print(json.dumps({"config": probe.name, "p0": run.p0, "eta": run.eta, "chi": result.chi,
                          "commutator_norm": result.commutator_norm, "log_base": result.log_base}, indent=2, sort_keys=True))
        return EXIT_OK
    print(f"\n📡 {probe.configuration} {probe.label} at p0={run.p0}, η={run.eta}")
    print("-" * 40)
    print(f"  Holevo information: {result.chi:.12f} (log base {result.log_base:g})")
    print(f"  ‖[ρ0, ρ1]‖_F:       {result.commutator_norm:.3e}")
    if not result.commuting:
        print("  ⚠️  ρ0 and ρ1 do not commute - χ only bounds the accessible information")
    return EXIT_OK


def cmd_mean(run: RunConfig) -> int:
    probe = _probe(run)
    tol = run.tol or (config.expensive_tolerance if probe.expensive else config.tolerance)
    print(f"\n🧮 Integrating {probe.configuration} {probe.label} (tolerance {tol:g})...")
    row = evaluate_state(probe, tol=tol, log_base=run.log_base, with_holevo=run.holevo, threads=run.threads)
    print(f"  Mean Helstrom bound: {row.mean_hb:.6f} ± {row.err_estimate:.1e}")
    if run.holevo:
        if row.holevo_skipped:
            print(f"  Mean Holevo:         skipped (‖[ρ0, ρ1]‖ = {row.commutator_norm:.2e})")
        else:
            print(f"  Mean Holevo:         {row.mean_holevo:.6f}")
    print(f"  Evaluations:         {row.evaluations}")
    if probe.reference is not None and probe.reference.mean_hb is not None:
        print(f"  Reference HB:        {probe.reference.mean_hb:.6f} (Δ {row.mean_hb - probe.reference.mean_hb:+.1e})")
    return EXIT_OK


def cmd_table(run: RunConfig) -> int:
    presets = load_presets(run.presets)
    suite, entries = presets.suite(run.suite)
    expensive = any(e.expensive for e in entries)
    if expensive and not run.expensive:
        raise ConfigError(f"Suite {run.suite} contains 256-dimensional probes; pass --expensive")
    tol = run.tol or (config.expensive_tolerance if expensive else config.tolerance)

    study = IlluminationStudy(tol=tol, log_base=run.log_base, threads=run.threads,
                              run_config=run.model_dump(), presets_path=run.presets)
    report = asyncio.run(study.run(run.suite))
    study.print_report()
    study.save_report(_output_path(run, run.suite), run.format)
    return EXIT_NUMERIC if report.failures else EXIT_OK


def _numeric_regions(probe: ProbeConfig, resolution: int) -> List[dict]:
    psi = probe.build()
    rows = []
    for p0 in np.linspace(0.0, 1.0, resolution):
        for eta in np.linspace(0.0, 1.0, resolution):
            outcome = helstrom_bound(build_hypotheses(Scenario(psi, float(eta), float(p0), probe.noise)), float(p0))
            rows.append({"p0": float(p0), "eta": float(eta), "region_id": str(outcome.region), "p_err": outcome.p_err})
    return rows


def cmd_regions(run: RunConfig) -> int:
    ref = run.config[0]
    closed_form = None
    name = ref
    try:
        probe = resolve_probe(ref, run.presets)
        name = probe.name
        closed_form = closed_form_for(probe.configuration, probe.label, probe.d)
    except ConfigError:
        probe = None
        closed_form = piecewise(ref).state_id

    if run.numeric or closed_form is None:
        if probe is None:
            raise ConfigError(f"Numeric region maps need a preset or probe file, got '{ref}'")
        rows = _numeric_regions(probe, run.resolution)
        source = "numeric"
    else:
        rows = region_table(closed_form, run.resolution)
        source = f"closed form {closed_form.value}"

    regions = sorted({str(r["region_id"]) for r in rows})
    print(f"\n🗺️  {name}: {len(rows)} grid points from {source}")
    print(f"   Regions: {', '.join(regions)}")
    path = write_rows(_output_path(run, f"regions_{name}"), rows, _metadata(run, source=source),
                      run.format, ["p0", "eta", "region_id", "p_err"])
    print(f"Region map saved to {path}")
    return EXIT_OK


def cmd_sweep(run: RunConfig) -> int:
    if run.suite:
        _, entries = load_presets(run.presets).suite(run.suite)
    elif run.config:
        entries = [resolve_probe(ref, run.presets) for ref in run.config]
    else:
        raise ConfigError("sweep needs --suite or at least one --config")
    labels = [e.label for e in entries]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"Sweep labels must be unique within one run, got {labels}")

    table = low_eta_sweep(entries, p0=run.p0 if run.p0 is not None else 0.5, eta_max=run.eta_max, n_points=run.points)
    at = run.at if run.at is not None else run.eta_max / 2
    print(f"\n📈 HB at p0={table.p0} for η ∈ [0, {run.eta_max}] ({run.points} points)")
    print(f"   Ordering at η={at:g}: {table.order_string(at)}")
    name = f"sweep_{run.suite or '_'.join(e.name for e in entries)}"
    path = write_rows(_output_path(run, name), table.to_rows(), _metadata(run, ordering=table.order_string(at)),
                      run.format, ["p0", "eta"] + labels)
    print(f"Sweep saved to {path}")
    return EXIT_OK


def cmd_validate(run: RunConfig) -> int:
    """Validate configuration and show status"""
    print("\n🔧 Configuration Validation")
    print("-" * 40)
    print(f"  Tolerance:           {config.tolerance:g} (expensive: {config.expensive_tolerance:g})")
    print(f"  Depth / evaluations: {config.max_depth} / {config.max_evaluations}")
    print(f"  Threads:             {config.threads}")
    print(f"  Log base:            {config.log_base:g}")
    print(f"  Presets:             {config.presets_path}")

    warnings = config.validate()
    presets_ok = True
    try:
        presets = load_presets(run.presets)
        print(f"  ✅ {len(presets.presets)} presets in {len(presets.suites)} suites")
    except (ConfigError, ValidationError) as e:
        presets_ok = False
        print(f"  ❌ Presets do not load: {e}")

    if warnings:
        print("\n⚠️  Warnings:")
        for w in warnings:
            print(f"   - {w}")

    print()
    if not warnings and presets_ok:
        print("✅ Configuration looks good!")
        return EXIT_OK
    print("❌ Some configuration issues need attention")
    print("\n💡 Set environment variables or create a .env file:")
    print("   QI_TOLERANCE=1e-5")
    print("   QI_THREADS=8")
    print("   QI_LOG_BASE=e")
    return EXIT_CONFIG


def cmd_presets(run: RunConfig) -> int:
    presets = load_presets(run.presets)
    for suite, names in presets.suites.items():
        print(f"\n📌 {suite}")
        print("-" * 40)
        for name in names:
            p = presets.get(name)
            flag = " [expensive]" if p.expensive else ""
            print(f"   {p.name:<20} {p.configuration:<5} {p.label:<8} d={p.d}{flag}")
    if presets.aliases:
        print("\n🔗 Aliases")
        for alias, target in sorted(presets.aliases.items()):
            print(f"   {alias} -> {target}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
