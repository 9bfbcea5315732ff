"""Photodetection model: from four-mode field coefficients to photocount moments.

A detector with quantum efficiency eta and dark-count rate n_d converts the
integrated-intensity statistics of its mode into photocount statistics:

    <m_j>            = eta_j B'_j + n_dj
    <dm_j dm_k>      = eta_j eta_k <dW_j dW_k>      (j != k)

Dark counts are independent Poisson noise, so they shift the means but leave
the cross-covariances untouched.

Two routes produce the same exact record: :func:`exact_measurement` applied
to a network-propagated four-mode state, and :func:`closed_form_moments`,
which evaluates the six cross-moments directly from the unknown and reference
two-mode coefficients.  The pair is kept separate on purpose -- their
agreement is the central correctness check of the simulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .optics import build_fig1_network
from .states import (
    FOUR_MODE_PAIRS,
    FourModeCoefficients,
    TwoModeCoefficients,
    intensity_moments,
    is_physical,
    pair_index,
)


@dataclass(frozen=True)
class DetectorBank:
    """Quantum efficiencies and dark-count rates of the four detectors."""

    eta: tuple = (1.0, 1.0, 1.0, 1.0)
    dark: tuple = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "eta", tuple(float(e) for e in self.eta))
        object.__setattr__(self, "dark", tuple(float(d) for d in self.dark))
        if len(self.eta) != 4 or len(self.dark) != 4:
            raise ValueError("need efficiencies and dark rates for four detectors")
        for e in self.eta:
            if not math.isfinite(e) or not 0.0 < e <= 1.0:
                raise ValueError(f"efficiencies must lie in (0, 1], got {e}")
        for d in self.dark:
            if not math.isfinite(d) or d < 0.0:
                raise ValueError(f"dark-count rates must be >= 0, got {d}")

    @classmethod
    def ideal(cls) -> "DetectorBank":
        return cls()


@dataclass(frozen=True)
class MeasurementRecord:
    """Mean photocounts and the six photocount cross-covariances.

    ``cross_mm`` is ordered by :data:`covrec.states.FOUR_MODE_PAIRS`.
    ``shots is None`` marks an exact (infinite-statistics) record; finite
    records carry the seed that generated their noise.
    """

    mean_m: tuple
    cross_mm: tuple
    shots: int | None = None
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "mean_m", tuple(float(x) for x in self.mean_m))
        object.__setattr__(self, "cross_mm", tuple(float(x) for x in self.cross_mm))
        if len(self.mean_m) != 4 or len(self.cross_mm) != 6:
            raise ValueError("need four means and six cross-moments")
        if self.shots is None:
            if self.seed is not None:
                raise ValueError("exact records carry no seed")
        else:
            object.__setattr__(self, "shots", int(self.shots))
            if self.shots < 2:
                raise ValueError("finite-statistics records need shots >= 2")
            if self.seed is None:
                raise ValueError("finite-statistics records must carry their seed")
            object.__setattr__(self, "seed", int(self.seed))

    @property
    def exact(self) -> bool:
        return self.shots is None

    def cross(self, j: int, k: int) -> float:
        return self.cross_mm[pair_index(j, k)]


def exact_measurement(
    state: FourModeCoefficients, det: DetectorBank
) -> MeasurementRecord:
    """Exact photocount record of a four-mode state at the given detectors."""
    if not is_physical(state):
        raise ValueError("state is not physical")
    w = intensity_moments(state)
    mean_m = tuple(
        e * mw + nd for e, mw, nd in zip(det.eta, w.mean_w, det.dark)
    )
    cross_mm = tuple(
        det.eta[j] * det.eta[k] * w.cross(j, k) for j, k in FOUR_MODE_PAIRS
    )
    return MeasurementRecord(mean_m, cross_mm)


def closed_form_moments(
    unknown: TwoModeCoefficients,
    reference: TwoModeCoefficients,
    det: DetectorBank,
) -> MeasurementRecord:
    """Photocount record straight from the two-mode coefficient algebra.

    For balanced zero-phase mixing of the unknown state with an independent
    reference, the six cross-moments are

        <dm1 dm2> = (e1 e2 / 4) (B1^2 + |C1|^2 + B1R^2 + |C1R|^2
                                 - 2 B1 B1R - 2 Re{C1 C1R*})
        <dm3 dm4> = same with mode-2 coefficients
        <dm1 dm3> = (e1 e3 / 4) (|D|^2 + |Db|^2 + |DR|^2 + |DbR|^2
                                 + 2 Re{D DR*} + 2 Re{Db DbR*})
        <dm1 dm4> = e1 e4 analogue with the interference terms negated
        <dm2 dm3> = e2 e3 analogue with the interference terms negated
        <dm2 dm4> = e2 e4 analogue with the interference terms as in <dm1 dm3>

    and the detector means are eta_j (B + B^R)/2 + n_dj with B of the mode
    feeding that detector.  Must agree with
    ``exact_measurement(build_fig1_network(unknown, reference), det)``
    identically; that equivalence is the module's defining test.
    """
    for name, state in (("unknown", unknown), ("reference", reference)):
        if not is_physical(state):
            raise ValueError(f"{name} state is not physical")
    e1, e2, e3, e4 = det.eta

    v1 = (
        unknown.b1**2
        + abs(unknown.c1) ** 2
        + reference.b1**2
        + abs(reference.c1) ** 2
        - 2.0 * unknown.b1 * reference.b1
        - 2.0 * (unknown.c1 * np.conj(reference.c1)).real
    )
    v2 = (
        unknown.b2**2
        + abs(unknown.c2) ** 2
        + reference.b2**2
        + abs(reference.c2) ** 2
        - 2.0 * unknown.b2 * reference.b2
        - 2.0 * (unknown.c2 * np.conj(reference.c2)).real
    )
    common = (
        abs(unknown.d12) ** 2
        + abs(unknown.dbar12) ** 2
        + abs(reference.d12) ** 2
        + abs(reference.dbar12) ** 2
    )
    interference = 2.0 * (
        (unknown.d12 * np.conj(reference.d12)).real
        + (unknown.dbar12 * np.conj(reference.dbar12)).real
    )

    cross = {
        (0, 1): e1 * e2 / 4.0 * v1,
        (2, 3): e3 * e4 / 4.0 * v2,
        (0, 2): e1 * e3 / 4.0 * (common + interference),
        (0, 3): e1 * e4 / 4.0 * (common - interference),
        (1, 2): e2 * e3 / 4.0 * (common - interference),
        (1, 3): e2 * e4 / 4.0 * (common + interference),
    }
    half_n = (
        (unknown.b1 + reference.b1) / 2.0,
        (unknown.b1 + reference.b1) / 2.0,
        (unknown.b2 + reference.b2) / 2.0,
        (unknown.b2 + reference.b2) / 2.0,
    )
    mean_m = tuple(e * n + nd for e, n, nd in zip(det.eta, half_n, det.dark))
    cross_mm = tuple(cross[pair] for pair in FOUR_MODE_PAIRS)
    return MeasurementRecord(mean_m, cross_mm)


def _single_shot_variances(state: FourModeCoefficients, det: DetectorBank) -> tuple:
    """Per-detector photocount variance eta^2 <dW^2> + eta <W> + n_d."""
    w = intensity_moments(state)
    return tuple(
        e * e * vw + e * mw + nd
        for e, vw, mw, nd in zip(det.eta, w.var_w, w.mean_w, det.dark)
    )


def sample_measurement(
    state: FourModeCoefficients,
    det: DetectorBank,
    shots: int,
    seed: int,
    noise_scale: float = 1.0,
) -> MeasurementRecord:
    """Finite-statistics estimate of a photocount record.

    Models the sampling error of moment estimators over ``shots`` repeated
    measurement windows as additive zero-mean Gaussian noise whose standard
    deviation matches the analytic large-sample estimator spread:
    sd(mean_j) = sqrt(Var m_j / shots) and
    sd(cov_jk) = sqrt((Var m_j Var m_k + cov_jk^2) / shots),
    with Var m_j = eta_j^2 <dW_j^2> + eta_j <W_j> + n_dj.  Deterministic for
    a fixed seed; ``noise_scale`` stretches the noise for stress tests.
    """
    shots = int(shots)
    if shots < 2:
        raise ValueError("shots must be >= 2")
    exact = exact_measurement(state, det)
    var_m = _single_shot_variances(state, det)
    sd_mean = np.sqrt(np.asarray(var_m) / shots)
    sd_cross = np.sqrt(
        np.array(
            [
                var_m[j] * var_m[k] + exact.cross(j, k) ** 2
                for j, k in FOUR_MODE_PAIRS
            ]
        )
        / shots
    )
    rng = np.random.default_rng(seed)
    mean_m = np.asarray(exact.mean_m) + noise_scale * rng.normal(size=4) * sd_mean
    cross_mm = (
        np.asarray(exact.cross_mm) + noise_scale * rng.normal(size=6) * sd_cross
    )
    return MeasurementRecord(tuple(mean_m), tuple(cross_mm), shots=shots, seed=seed)


def measure(
    unknown: TwoModeCoefficients,
    reference: TwoModeCoefficients,
    det: DetectorBank,
    shots: int | None = None,
    seed: int | None = None,
) -> MeasurementRecord:
    """One simulated acquisition: exact when shots is None, sampled otherwise."""
    if shots is None:
        return closed_form_moments(unknown, reference, det)
    state = build_fig1_network(unknown, reference)
    return sample_measurement(state, det, shots, seed if seed is not None else 0)
