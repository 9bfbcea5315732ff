"""Command-line front end: forward simulation, reconstruction and round trips.

Verbs:
    simulate     write the full record set for one scenario
    reconstruct  invert a previously written record set into a report
    roundtrip    simulate + reconstruct + error summary in one step

All commands are deterministic given the config file and --seed.  The
environment variable COVREC_LOG (debug/info/warning/error) controls log
verbosity.  Exit codes: 0 success, 1 validation or I/O failure, 2 numerical
failure (rank-deficient phase grids, physicality or residual flags).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import serialize
from .detection import DetectorBank
from .optics import TwinBeamSource, random_state, squeezed_thermal_pair, twin_beam
from .reconstruction import (
    ExperimentPlan,
    RankDeficientGridError,
    coefficient_errors,
    reconstruct,
    run_pipeline,
    simulate_records,
    uniform_phase_grid,
)
from .states import COEFFICIENT_NAMES, TwoModeCoefficients, is_physical

log = logging.getLogger("covrec")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2


class ConfigError(ValueError):
    pass


def _parse_shots(text):
    if text in (None, "inf", "Inf", "INF"):
        return None
    shots = int(text)
    if shots < 2:
        raise ConfigError("shots must be >= 2 or 'inf'")
    return shots


def _phase_grid(section: dict, prefix: str) -> tuple:
    grid = section.get(f"{prefix}_grid")
    if grid is not None:
        return tuple(float(p) for p in grid)
    return uniform_phase_grid(int(section.get(f"{prefix}_points", 12)))


def _plan_from_config(config: dict, shots_override) -> ExperimentPlan:
    section = config.get("plan", {})
    det = DetectorBank(
        tuple(section.get("eta", (1.0,) * 4)),
        tuple(section.get("dark", (0.0,) * 4)),
    )
    shots = (
        shots_override
        if shots_override != "unset"
        else _parse_shots(section.get("shots", "inf"))
    )
    return ExperimentPlan(
        b_p=float(section.get("b_p", 1.0)),
        phi_grid=_phase_grid(section, "phi"),
        theta_grid=_phase_grid(section, "theta"),
        det=det,
        shots=shots,
        vacuum_arm=int(section.get("vacuum_arm", 2)),
    )


def _make_unknowns(config: dict) -> list[TwoModeCoefficients]:
    """Unknown state(s) from the scenario's generator spec."""
    spec = config.get("unknown", {"kind": "vacuum"})
    kind = spec.get("kind", "vacuum")
    if kind == "vacuum":
        unknowns = [TwoModeCoefficients.vacuum()]
    elif kind == "twin":
        unknowns = [twin_beam(TwinBeamSource(spec["b_p"], spec.get("phi", 0.0)))]
    elif kind == "squeezed":
        unknowns = [
            squeezed_thermal_pair(
                spec.get("n1", 0.0),
                spec.get("s1", 0.0),
                spec.get("chi1", 0.0),
                spec.get("n2", 0.0),
                spec.get("s2", 0.0),
                spec.get("chi2", 0.0),
            )
        ]
    elif kind == "random":
        count = int(spec.get("count", 1))
        rng = np.random.default_rng(int(spec.get("seed", 0)))
        unknowns = [random_state(rng, spec.get("max_b", 1.0)) for _ in range(count)]
    elif kind == "explicit":
        unknowns = [serialize.coefficients_from_json(spec)]
    else:
        raise ConfigError(f"unknown generator kind {kind!r}")
    for state in unknowns:
        if not is_physical(state):
            raise ConfigError("scenario unknown state is not physical")
    return unknowns


def _load_config(path) -> dict:
    if path is None:
        raise ConfigError("--config is required for this command")
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    plan = _plan_from_config(config, args.shots)
    unknown = _make_unknowns(config)[0]
    records = simulate_records(unknown, plan, seed=args.seed)
    out = _out_dir(args)
    serialize.dump_json(serialize.record_set_to_json(records, plan), out / "records.json")
    serialize.dump_json(
        {"unknown": serialize.coefficients_to_json(unknown), "seed": args.seed},
        out / "truth.json",
    )
    log.info("wrote %s", out / "records.json")
    if args.format == "csv":
        serialize.write_sweep_csv(records, out / "sweeps.csv")
        log.info("wrote %s", out / "sweeps.csv")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    out = _out_dir(args)
    records_path = out / "records.json"
    if args.config is not None:
        config = _load_config(args.config)
        records_path = Path(
            config.get("output", {}).get("records", records_path)
        )
    if not records_path.exists():
        raise ConfigError(f"record set not found: {records_path}")
    records, plan = serialize.record_set_from_json(serialize.load_json(records_path))
    report = reconstruct(records, plan)
    serialize.dump_json(serialize.report_to_json(report), out / "report.json")
    (out / "report.txt").write_text(serialize.report_to_text(report), encoding="utf-8")
    log.info("wrote %s", out / "report.json")
    if report.flags:
        log.warning("report flags: %s", ", ".join(report.flags))
        return EXIT_NUMERICAL
    return EXIT_OK


def _error_table(rows) -> str:
    header = f"{'shots':>10} {'run':>4} " + " ".join(
        f"{name:>11}" for name in COEFFICIENT_NAMES
    )
    lines = [header, "-" * len(header)]
    for row in rows:
        shots = "inf" if row["shots"] is None else str(row["shots"])
        lines.append(
            f"{shots:>10} {row['run']:>4} "
            + " ".join(f"{row['errors'][name]:>11.3e}" for name in COEFFICIENT_NAMES)
        )
    return "\n".join(lines) + "\n"


def cmd_roundtrip(args) -> int:
    config = _load_config(args.config)
    plan = _plan_from_config(config, args.shots)
    unknowns = _make_unknowns(config)
    shots_values = config.get("shots_sweep")
    if shots_values is not None:
        shots_values = [_parse_shots(s) for s in shots_values]
    else:
        shots_values = [plan.shots]

    runs = []
    all_flags = []
    run_index = 0
    for shots in shots_values:
        plan_s = ExperimentPlan(
            b_p=plan.b_p,
            phi_grid=plan.phi_grid,
            theta_grid=plan.theta_grid,
            det=plan.det,
            shots=shots,
            vacuum_arm=plan.vacuum_arm,
        )
        for i, unknown in enumerate(unknowns):
            report = run_pipeline(unknown, plan_s, seed=args.seed + run_index)
            errors = coefficient_errors(report.recovered, unknown)
            runs.append(
                {
                    "run": run_index,
                    "unknown_index": i,
                    "shots": shots,
                    "errors": errors,
                    "flags": list(report.flags),
                    "physical": report.physical,
                }
            )
            all_flags.extend(report.flags)
            run_index += 1

    max_error = {
        name: max(r["errors"][name] for r in runs) for name in COEFFICIENT_NAMES
    }
    summary = {
        "runs": [
            {**r, "shots": "inf" if r["shots"] is None else r["shots"]} for r in runs
        ],
        "max_error": max_error,
        "flags": sorted(set(all_flags)),
    }
    out = _out_dir(args)
    serialize.dump_json(summary, out / "summary.json")
    text = _error_table(runs)
    text += f"\nmax abs error: " + "  ".join(
        f"{name}={max_error[name]:.3e}" for name in COEFFICIENT_NAMES
    )
    text += f"\nflags: {', '.join(summary['flags']) if summary['flags'] else 'none'}\n"
    (out / "summary.txt").write_text(text, encoding="utf-8")
    log.info("wrote %s", out / "summary.json")
    if all_flags:
        log.warning("flags fired: %s", ", ".join(sorted(set(all_flags))))
        return EXIT_NUMERICAL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covrec",
        description="Simulate and invert twin-beam-referenced covariance measurements.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler in (
        ("simulate", cmd_simulate),
        ("reconstruct", cmd_reconstruct),
        ("roundtrip", cmd_roundtrip),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", help="scenario config (JSON)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument(
            "--shots",
            default="unset",
            help="override plan shots: an integer or 'inf' for exact moments",
        )
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=getattr(logging, os.environ.get("COVREC_LOG", "warning").upper(), logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    if args.shots != "unset":
        try:
            args.shots = _parse_shots(args.shots)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
    try:
        return args.handler(args)
    except RankDeficientGridError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
