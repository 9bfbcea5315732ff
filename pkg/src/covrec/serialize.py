"""File formats for records, reports and sweep exports.

Complex numbers are stored as {"re": x, "im": y} objects, exact records as
"shots": "inf", and detector pairs under 1-based labels (mm_12 ... mm_34),
matching the detector numbering used in lab notes.  All writers emit sorted
keys and trailing newlines so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json

from .detection import DetectorBank, MeasurementRecord
from .reconstruction import ExperimentPlan, ReconstructionReport, RecordSet
from .states import COEFFICIENT_NAMES, FOUR_MODE_PAIRS, TwoModeCoefficients

PAIR_LABELS = tuple(f"mm_{j + 1}{k + 1}" for j, k in FOUR_MODE_PAIRS)
MEAN_LABELS = tuple(f"mean_m{j + 1}" for j in range(4))

SWEEP_COLUMNS = ("preparation", "phase") + MEAN_LABELS + PAIR_LABELS


def complex_to_json(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def complex_from_json(obj) -> complex:
    if isinstance(obj, dict):
        return complex(obj["re"], obj.get("im", 0.0))
    return complex(obj)


def coefficients_to_json(coeffs: TwoModeCoefficients) -> dict:
    out = {"b1": coeffs.b1, "b2": coeffs.b2}
    for name in ("c1", "c2", "d12", "dbar12"):
        out[name] = complex_to_json(getattr(coeffs, name))
    return out


def coefficients_from_json(obj: dict) -> TwoModeCoefficients:
    return TwoModeCoefficients(
        obj["b1"],
        obj["b2"],
        complex_from_json(obj.get("c1", 0.0)),
        complex_from_json(obj.get("c2", 0.0)),
        complex_from_json(obj.get("d12", 0.0)),
        complex_from_json(obj.get("dbar12", 0.0)),
    )


def record_to_json(record: MeasurementRecord) -> dict:
    out = {
        "mean_m": list(record.mean_m),
        "cross_mm": {
            label: value for label, value in zip(PAIR_LABELS, record.cross_mm)
        },
        "shots": "inf" if record.shots is None else record.shots,
    }
    if record.seed is not None:
        out["seed"] = record.seed
    return out


def record_from_json(obj: dict) -> MeasurementRecord:
    shots = obj.get("shots", "inf")
    shots = None if shots in ("inf", None) else int(shots)
    cross = obj["cross_mm"]
    return MeasurementRecord(
        tuple(obj["mean_m"]),
        tuple(cross[label] for label in PAIR_LABELS),
        shots=shots,
        seed=obj.get("seed"),
    )


def detector_bank_to_json(det: DetectorBank) -> dict:
    return {"eta": list(det.eta), "dark": list(det.dark)}


def detector_bank_from_json(obj: dict) -> DetectorBank:
    return DetectorBank(tuple(obj["eta"]), tuple(obj["dark"]))


def plan_to_json(plan: ExperimentPlan) -> dict:
    return {
        "b_p": plan.b_p,
        "phi_grid": list(plan.phi_grid),
        "theta_grid": list(plan.theta_grid),
        "det": detector_bank_to_json(plan.det),
        "shots": "inf" if plan.shots is None else plan.shots,
        "vacuum_arm": plan.vacuum_arm,
    }


def plan_from_json(obj: dict) -> ExperimentPlan:
    shots = obj.get("shots", "inf")
    return ExperimentPlan(
        b_p=obj["b_p"],
        phi_grid=tuple(obj["phi_grid"]),
        theta_grid=tuple(obj["theta_grid"]),
        det=detector_bank_from_json(obj["det"]),
        shots=None if shots in ("inf", None) else int(shots),
        vacuum_arm=obj.get("vacuum_arm", 2),
    )


def record_set_to_json(records: RecordSet, plan: ExperimentPlan) -> dict:
    def sweep(entries):
        return [
            {"phase": phase, "record": record_to_json(record)}
            for phase, record in entries
        ]

    return {
        "plan": plan_to_json(plan),
        "vacuum": record_to_json(records.vacuum),
        "balanced_mix": sweep(records.balanced_mix),
        "pure_twin": sweep(records.pure_twin),
        "single_arm_vacuum": {
            "vacuum_arm": records.vacuum_arm,
            "sweep": sweep(records.single_arm),
        },
    }


def record_set_from_json(obj: dict) -> tuple[RecordSet, ExperimentPlan]:
    def sweep(entries):
        return tuple(
            (item["phase"], record_from_json(item["record"])) for item in entries
        )

    single = obj["single_arm_vacuum"]
    records = RecordSet(
        vacuum=record_from_json(obj["vacuum"]),
        balanced_mix=sweep(obj["balanced_mix"]),
        pure_twin=sweep(obj["pure_twin"]),
        single_arm=sweep(single["sweep"]),
        vacuum_arm=single.get("vacuum_arm", 2),
    )
    return records, plan_from_json(obj["plan"])


def report_to_json(report: ReconstructionReport) -> dict:
    out = {
        "recovered": coefficients_to_json(report.recovered),
        "residuals": dict(report.residuals),
        "used_preparations": list(report.used_preparations),
        "c_magnitude_from_variance": list(report.c_magnitude_from_variance),
        "physical": report.physical,
        "flags": list(report.flags),
        "shots": "inf" if report.shots is None else report.shots,
    }
    if report.seed is not None:
        out["seed"] = report.seed
    if report.ground_truth_error is not None:
        out["ground_truth_error"] = dict(report.ground_truth_error)
    return out


def dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_sweep_csv(records: RecordSet, path) -> None:
    """One row per (preparation, phase) pair, fixed column order."""
    rows = [("vacuum", 0.0, records.vacuum)]
    rows += [("balanced_mix", phase, rec) for phase, rec in records.balanced_mix]
    rows += [("pure_twin", phase, rec) for phase, rec in records.pure_twin]
    rows += [("single_arm_vacuum", phase, rec) for phase, rec in records.single_arm]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for preparation, phase, rec in rows:
            writer.writerow(
                [preparation, repr(float(phase))]
                + [repr(v) for v in rec.mean_m]
                + [repr(v) for v in rec.cross_mm]
            )


def _format_complex(z: complex) -> str:
    return f"{z.real:+.9g} {z.imag:+.9g}i"


def report_to_text(report: ReconstructionReport) -> str:
    """Aligned human-readable table of the recovered coefficients."""
    lines = []
    header = f"{'coefficient':<12} {'recovered':>28}"
    if report.ground_truth_error is not None:
        header += f" {'abs error':>12}"
    lines.append(header)
    lines.append("-" * len(header))
    values = report.recovered.asdict()
    for name in COEFFICIENT_NAMES:
        value = values[name]
        shown = (
            f"{value:+.9g}" if isinstance(value, float) else _format_complex(value)
        )
        line = f"{name:<12} {shown:>28}"
        if report.ground_truth_error is not None:
            line += f" {report.ground_truth_error[name]:>12.3e}"
        lines.append(line)
    lines.append("")
    lines.append(
        "residuals: "
        + "  ".join(f"{k}={v:.3e}" for k, v in sorted(report.residuals.items()))
    )
    mags = report.c_magnitude_from_variance
    lines.append(f"|C| from vacuum-reference variances: {mags[0]:.9g}, {mags[1]:.9g}")
    lines.append(f"physical: {report.physical}")
    lines.append(f"flags: {', '.join(report.flags) if report.flags else 'none'}")
    if report.shots is not None:
        lines.append(f"shots: {report.shots} (seed {report.seed})")
    return "\n".join(lines) + "\n"
