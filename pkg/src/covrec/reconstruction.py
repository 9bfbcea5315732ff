"""Four-step retrieval of the covariance coefficients from photocount moments.

The unknown state's six coefficients are recovered from moment records taken
with different reference preparations, in a fixed order (later steps consume
earlier estimates):

    1. B_1, B_2      from detector means with the reference inputs in vacuum:
                     B_1 = 2 (<m_1> - n_d1) / eta_1 and likewise B_2 from
                     detector 3.  The same record supplies the intensity
                     variances <dW_j^2> = 4 <dm dm> / (eta eta) of each mode.
    2. C_1, C_2      from a pump-phase sweep with the balanced-mix reference:
                     after subtracting the known offset, the (1,2) moment
                     traces -Im{e^{-i phi} C_1} and the (3,4) moment traces
                     +Im{e^{-i phi} C_2}.
    3. D_12          from a pump-phase sweep with the pure-twin reference:
                     (<dm1 dm3>/(e1 e3) - <dm1 dm4>/(e1 e4)) /
                     sqrt(b_p (b_p + 1)) = Im{e^{-i phi} D_12}.
    4. Dbar_12       from a modulator-phase sweep with the single-arm-vacuum
                     reference: (2 / b_p) of the same detector combination
                     equals +-Re{e^{-i theta} Dbar_12*}, the sign set by which
                     BS1 arm holds the vacuum.

Every sweep reduces to one linear least-squares fit in the basis
{cos, sin}; the two fit coefficients map directly onto the real and
imaginary parts of the target coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .detection import DetectorBank, MeasurementRecord, measure
from .optics import (
    ReferencePreparation,
    TwinBeamSource,
    prepare_reference,
    twin_beam,
)
from .states import TwoModeCoefficients, is_physical

STEP_NAMES = ("c1", "c2", "d12", "dbar12")


class RankDeficientGridError(ValueError):
    """Phase grid cannot resolve both quadratures of the fitted coefficient."""


def uniform_phase_grid(n_points: int = 12) -> tuple:
    """n_points uniformly spaced phases on [0, 2 pi)."""
    if n_points < 3:
        raise ValueError("need at least three phases")
    return tuple(2.0 * math.pi * i / n_points for i in range(n_points))


@dataclass(frozen=True)
class PhaseSweep:
    """Ordered (phase, value) samples feeding one sinusoid fit."""

    phases: tuple
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.phases) != len(self.values):
            raise ValueError("phases and values must have equal length")
        if not all(math.isfinite(x) for x in self.phases + self.values):
            raise ValueError("sweep entries must be finite")
        distinct = np.unique(np.round(np.mod(self.phases, 2.0 * math.pi), 9))
        if len(distinct) < 3:
            raise ValueError("need at least three distinct phases modulo 2 pi")


@dataclass(frozen=True)
class SinusoidFit:
    """Result of one two-basis fit: the complex coefficient and the rms residual."""

    z: complex
    residual: float


def _sweep_arrays(sweep) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(sweep, PhaseSweep):
        return np.asarray(sweep.phases), np.asarray(sweep.values)
    phases, values = sweep
    return np.asarray(phases, dtype=float), np.asarray(values, dtype=float)


def fit_sinusoid(sweep, kind: str) -> SinusoidFit:
    """Least-squares solve of y = a cos(phase) + b sin(phase) for a complex Z.

    kind "im" reads the samples as y = Im{e^{-i phase} Z}, so Z = -b + i a;
    kind "re" reads them as y = Re{e^{-i phase} Z*}, so Z = a - i b.  The
    input may be a :class:`PhaseSweep` or a bare (phases, values) pair, which
    also admits the exactly-determined two-point case.

    Raises:
        RankDeficientGridError: all phases coincide modulo pi, so the two
            basis functions are linearly dependent.
    """
    if kind not in ("im", "re"):
        raise ValueError(f"kind must be 'im' or 're', got {kind!r}")
    phases, values = _sweep_arrays(sweep)
    design = np.column_stack([np.cos(phases), np.sin(phases)])
    solution, _, rank, _ = np.linalg.lstsq(design, values, rcond=None)
    if rank < 2:
        raise RankDeficientGridError(
            "phase grid is degenerate modulo pi; cannot separate quadratures"
        )
    a, b = solution
    residual = float(np.sqrt(np.mean((values - design @ solution) ** 2)))
    z = complex(-b, a) if kind == "im" else complex(a, -b)
    return SinusoidFit(z, residual)


@dataclass(frozen=True)
class ExperimentPlan:
    """Everything the retrieval needs besides the records themselves.

    b_p is the mean pair number of the reference source, phi_grid the pump
    phases for the balanced-mix and pure-twin sweeps, theta_grid the
    modulator phases for the single-arm sweep, and vacuum_arm selects which
    BS1 input is left dark during step 4.  ``shots is None`` requests exact
    moments.
    """

    b_p: float
    phi_grid: tuple = field(default_factory=uniform_phase_grid)
    theta_grid: tuple = field(default_factory=uniform_phase_grid)
    det: DetectorBank = field(default_factory=DetectorBank.ideal)
    shots: int | None = None
    vacuum_arm: int = 2

    def __post_init__(self):
        object.__setattr__(self, "b_p", float(self.b_p))
        object.__setattr__(self, "phi_grid", tuple(float(p) for p in self.phi_grid))
        object.__setattr__(
            self, "theta_grid", tuple(float(p) for p in self.theta_grid)
        )
        if not math.isfinite(self.b_p) or self.b_p <= 0.0:
            raise ValueError("reference pair number must be > 0")
        for grid in (self.phi_grid, self.theta_grid):
            PhaseSweep(grid, (0.0,) * len(grid))  # reuse the sweep validation
        if self.shots is not None:
            object.__setattr__(self, "shots", int(self.shots))
            if self.shots < 2:
                raise ValueError("shots must be >= 2 (or None for exact moments)")
        if self.vacuum_arm not in (1, 2):
            raise ValueError("vacuum_arm must be 1 or 2")


@dataclass(frozen=True)
class RecordSet:
    """All records of one experiment: vacuum reference plus the three sweeps."""

    vacuum: MeasurementRecord
    balanced_mix: tuple  # ((phi, record), ...)
    pure_twin: tuple
    single_arm: tuple  # ((theta, record), ...)
    vacuum_arm: int = 2


@dataclass(frozen=True)
class ReconstructionReport:
    """Recovered coefficients with per-step fit residuals and diagnostics.

    ``c_magnitude_from_variance`` holds the |C_j| implied by the
    vacuum-reference intensity variances, kept alongside the phase-sweep
    values as an internal consistency check.  Unphysical or suspicious
    results are flagged, never projected back onto the physical set.
    """

    recovered: TwoModeCoefficients
    residuals: dict
    used_preparations: tuple
    c_magnitude_from_variance: tuple
    physical: bool
    flags: tuple = ()
    ground_truth_error: dict | None = None
    shots: int | None = None
    seed: int | None = None

    @property
    def ok(self) -> bool:
        return not self.flags


def retrieve_B(record: MeasurementRecord, det: DetectorBank) -> tuple[float, float]:
    """Mean photon numbers from a vacuum-reference record.

    With the reference ports dark, each detector sees half of its mode's
    photons, so B_1 = 2 (<m_1> - n_d1) / eta_1 and B_2 likewise from
    detector 3.  Estimates are returned raw; noise can make them negative.
    """
    b1 = 2.0 * (record.mean_m[0] - det.dark[0]) / det.eta[0]
    b2 = 2.0 * (record.mean_m[2] - det.dark[2]) / det.eta[2]
    return b1, b2


def intensity_variances(record: MeasurementRecord, det: DetectorBank) -> tuple:
    """<dW_1^2>, <dW_2^2> of the unknown state from a vacuum-reference record."""
    w1 = 4.0 * record.cross(0, 1) / (det.eta[0] * det.eta[1])
    w2 = 4.0 * record.cross(2, 3) / (det.eta[2] * det.eta[3])
    return w1, w2


@dataclass(frozen=True)
class CRetrieval:
    c1: complex
    c2: complex
    residuals: tuple
    magnitudes_from_variance: tuple


def retrieve_C(
    vacuum_record: MeasurementRecord,
    sweeps: tuple,
    plan: ExperimentPlan,
    known_b: tuple,
) -> CRetrieval:
    """C_1 and C_2 from balanced-mix pump-phase sweeps.

    ``sweeps`` holds two :class:`PhaseSweep` objects with the raw (1,2) and
    (3,4) photocount cross-moments.  With the balanced-mix reference the
    moments read

        <dm1 dm2> = (e1 e2/4) (2 b_p^2 + b_p (1 - 2 B_1) + <dW_1^2>)
                    - (e1 e2/2) sqrt(b_p (b_p+1)) Im{e^{-i phi} C_1}

    and the (3,4) analogue with the opposite sign of the sinusoid, so
    subtracting the offset (built from ``known_b`` and the vacuum-reference
    variances) and rescaling leaves a pure Im-type sinusoid per mode.  The
    fitted |C_j| can be cross-checked against the magnitude implied by
    <dW_j^2> = B_j^2 + |C_j|^2; both are reported.
    """
    bp = plan.b_p
    eta = plan.det.eta
    w1, w2 = intensity_variances(vacuum_record, plan.det)
    b1, b2 = known_b
    amp = math.sqrt(bp * (bp + 1.0))

    sweep1, sweep2 = sweeps
    offset1 = (2.0 * bp * bp + bp * (1.0 - 2.0 * b1) + w1) / 4.0
    offset2 = (2.0 * bp * bp + bp * (1.0 - 2.0 * b2) + w2) / 4.0
    y1 = [
        (offset1 - v / (eta[0] * eta[1])) * 2.0 / amp for v in sweep1.values
    ]
    y2 = [
        (v / (eta[2] * eta[3]) - offset2) * 2.0 / amp for v in sweep2.values
    ]
    fit1 = fit_sinusoid((sweep1.phases, y1), "im")
    fit2 = fit_sinusoid((sweep2.phases, y2), "im")
    mags = (
        math.sqrt(max(w1 - b1 * b1, 0.0)),
        math.sqrt(max(w2 - b2 * b2, 0.0)),
    )
    return CRetrieval(fit1.z, fit2.z, (fit1.residual, fit2.residual), mags)


def retrieve_C_symmetric(sweep: PhaseSweep, plan: ExperimentPlan) -> SinusoidFit:
    """Single C for a symmetric state (B_1 = B_2, C_1 = C_2) -- shortcut form.

    ``sweep`` carries the efficiency-normalized difference
    <dm3 dm4>/(e3 e4) - <dm1 dm2>/(e1 e2) per pump phase; for a symmetric
    state all offsets cancel and the difference equals
    sqrt(b_p (b_p+1)) Im{e^{-i phi} C} directly.  Applied to an asymmetric
    state the fit residual exposes the model mismatch.
    """
    amp = math.sqrt(plan.b_p * (plan.b_p + 1.0))
    y = [v / amp for v in sweep.values]
    return fit_sinusoid((sweep.phases, y), "im")


def detector_difference(record: MeasurementRecord, det: DetectorBank) -> float:
    """Efficiency-normalized (1,3) minus (1,4) photocount cross-moment."""
    return record.cross(0, 2) / (det.eta[0] * det.eta[2]) - record.cross(0, 3) / (
        det.eta[0] * det.eta[3]
    )


def detector_difference_alt(record: MeasurementRecord, det: DetectorBank) -> float:
    """Alternative combination (2,4) minus (2,3); carries the same information."""
    return record.cross(1, 3) / (det.eta[1] * det.eta[3]) - record.cross(1, 2) / (
        det.eta[1] * det.eta[2]
    )


def retrieve_D12(sweep: PhaseSweep, plan: ExperimentPlan) -> SinusoidFit:
    """D_12 from a pure-twin pump-phase sweep.

    ``sweep`` carries :func:`detector_difference` values; dividing by
    sqrt(b_p (b_p + 1)) leaves Im{e^{-i phi} D_12}.
    """
    amp = math.sqrt(plan.b_p * (plan.b_p + 1.0))
    y = [v / amp for v in sweep.values]
    return fit_sinusoid((sweep.phases, y), "im")


def retrieve_Dbar12(
    sweep: PhaseSweep, plan: ExperimentPlan, vacuum_arm: int | None = None
) -> SinusoidFit:
    """Dbar_12 from a single-arm-vacuum modulator-phase sweep.

    ``sweep`` carries :func:`detector_difference` values; scaling by 2 / b_p
    gives +-Re{e^{-i theta} Dbar_12*} with + when BS1 input 2 holds the
    vacuum, so the fit is sign-corrected by the arm choice.
    """
    arm = plan.vacuum_arm if vacuum_arm is None else vacuum_arm
    if arm not in (1, 2):
        raise ValueError("vacuum_arm must be 1 or 2")
    sign = 1.0 if arm == 2 else -1.0
    y = [sign * 2.0 * v / plan.b_p for v in sweep.values]
    return fit_sinusoid((sweep.phases, y), "re")


def simulate_records(
    unknown: TwoModeCoefficients, plan: ExperimentPlan, seed: int = 0
) -> RecordSet:
    """Forward-simulate every record the retrieval needs.

    The unknown state never leaves this function; reconstruction consumes
    only the returned records.  With finite shots each record gets its own
    sub-seed drawn from ``seed``, so the full set is reproducible.
    """
    noisy = plan.shots is not None
    seed_stream = np.random.default_rng(seed) if noisy else None

    def next_seed():
        return int(seed_stream.integers(0, 2**63)) if noisy else None

    def acquire(reference):
        return measure(unknown, reference, plan.det, plan.shots, next_seed())

    vacuum = acquire(TwoModeCoefficients.vacuum())
    balanced = tuple(
        (
            phi,
            acquire(
                prepare_reference(
                    ReferencePreparation.balanced_mix(TwinBeamSource(plan.b_p, phi))
                )
            ),
        )
        for phi in plan.phi_grid
    )
    pure = tuple(
        (phi, acquire(twin_beam(TwinBeamSource(plan.b_p, phi))))
        for phi in plan.phi_grid
    )
    single = tuple(
        (
            theta,
            acquire(
                prepare_reference(
                    ReferencePreparation.single_arm_vacuum(
                        TwinBeamSource(plan.b_p),
                        vacuum_arm=plan.vacuum_arm,
                        modulator_theta=theta,
                    )
                )
            ),
        )
        for theta in plan.theta_grid
    )
    return RecordSet(vacuum, balanced, pure, single, plan.vacuum_arm)


def _residual_threshold(plan: ExperimentPlan, span: float) -> float:
    # Diagnostic heuristic only: exact records should fit to round-off;
    # sampled records get a generous allowance ~ estimator spread.
    if plan.shots is None:
        return 1e-8 * max(1.0, span)
    return max(1e-8, 50.0 * (1.0 + span) / math.sqrt(plan.shots))


def reconstruct(records: RecordSet, plan: ExperimentPlan) -> ReconstructionReport:
    """Run the four retrieval steps on a complete record set."""
    det = plan.det
    b1, b2 = retrieve_B(records.vacuum, det)

    phis = tuple(phi for phi, _ in records.balanced_mix)
    sweep_m1 = PhaseSweep(phis, tuple(r.cross(0, 1) for _, r in records.balanced_mix))
    sweep_m2 = PhaseSweep(phis, tuple(r.cross(2, 3) for _, r in records.balanced_mix))
    cret = retrieve_C(records.vacuum, (sweep_m1, sweep_m2), plan, (b1, b2))

    phis_d = tuple(phi for phi, _ in records.pure_twin)
    sweep_d = PhaseSweep(
        phis_d,
        tuple(detector_difference(r, det) for _, r in records.pure_twin),
    )
    fit_d12 = retrieve_D12(sweep_d, plan)

    thetas = tuple(theta for theta, _ in records.single_arm)
    sweep_db = PhaseSweep(
        thetas,
        tuple(detector_difference(r, det) for _, r in records.single_arm),
    )
    fit_dbar = retrieve_Dbar12(sweep_db, plan, records.vacuum_arm)

    recovered = TwoModeCoefficients(b1, b2, cret.c1, cret.c2, fit_d12.z, fit_dbar.z)
    residuals = {
        "c1": cret.residuals[0],
        "c2": cret.residuals[1],
        "d12": fit_d12.residual,
        "dbar12": fit_dbar.residual,
    }

    flags = []
    if b1 < 0.0 or b2 < 0.0:
        flags.append("negative_mean_photon_number")
    coeff_span = max(
        1.0, abs(b1), abs(b2), abs(cret.c1), abs(cret.c2), abs(fit_d12.z), abs(fit_dbar.z)
    )
    threshold = _residual_threshold(plan, coeff_span)
    for step in STEP_NAMES:
        if residuals[step] > threshold:
            flags.append(f"large_residual_{step}")
    for mode, (c_fit, c_mag) in enumerate(
        zip((cret.c1, cret.c2), cret.magnitudes_from_variance), start=1
    ):
        if abs(abs(c_fit) - c_mag) > 5.0 * threshold:
            flags.append(f"c{mode}_magnitude_inconsistent")
    physical = is_physical(recovered)
    if not physical:
        flags.append("unphysical_recovered_state")

    some_record = records.vacuum
    return ReconstructionReport(
        recovered=recovered,
        residuals=residuals,
        used_preparations=("vacuum", "balanced_mix", "pure_twin", "single_arm_vacuum"),
        c_magnitude_from_variance=cret.magnitudes_from_variance,
        physical=physical,
        flags=tuple(flags),
        shots=some_record.shots,
        seed=some_record.seed,
    )


def coefficient_errors(
    recovered: TwoModeCoefficients, truth: TwoModeCoefficients
) -> dict:
    """Absolute per-coefficient errors |recovered - truth|."""
    rec = recovered.asdict()
    tru = truth.asdict()
    return {name: abs(rec[name] - tru[name]) for name in rec}


def run_pipeline(
    unknown: TwoModeCoefficients, plan: ExperimentPlan, seed: int = 0
) -> ReconstructionReport:
    """Simulate all records for ``unknown`` and invert them.

    The unknown enters only the simulator; the returned report additionally
    carries the per-coefficient ground-truth errors, which a real experiment
    would not have.
    """
    records = simulate_records(unknown, plan, seed)
    report = reconstruct(records, plan)
    errors = coefficient_errors(report.recovered, unknown)
    return ReconstructionReport(
        recovered=report.recovered,
        residuals=report.residuals,
        used_preparations=report.used_preparations,
        c_magnitude_from_variance=report.c_magnitude_from_variance,
        physical=report.physical,
        flags=report.flags,
        ground_truth_error=errors,
        shots=report.shots,
        seed=seed if plan.shots is not None else None,
    )


def twin_beam_self_check(
    source: TwinBeamSource, plan: ExperimentPlan, seed: int = 0
) -> ReconstructionReport:
    """Reconstruct a second, nominally identical twin beam as the unknown.

    Feeding the scheme a twin beam with known (b_p, phi) and comparing the
    recovered coefficients against their nominal values validates the whole
    apparatus, reference included.
    """
    return run_pipeline(twin_beam(source), plan, seed)
