"""Sources and linear-optics transforms for the four-detector interference scheme.

The measurement layout mixes an unknown two-mode Gaussian state (modes a1,
a2) with a reference field derived from a pure twin beam.  The twin beam's
constituents (c1', c2') pass through beam splitter BS1 and an optional phase
modulator on c1, producing the reference modes (c1, c2); BS2 then mixes
(a1, c1) into detector modes (1, 2) and BS3 mixes (a2, c2) into detector
modes (3, 4).  BS2 and BS3 are balanced with zero phase.

A beam splitter with amplitude transmissivity t, reflectivity r = sqrt(1-t^2)
and phase theta maps input operators (x, y) to outputs

    x' = t x + r e^{i theta} y
    y' = -r e^{-i theta} x + t y

Covariance matrices transform by conjugation with the unitary mode map lifted
to the interleaved (beta, beta*) slots, so one code path serves all three
beam splitters and the phase modulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .states import (
    NORMAL,
    FourModeCoefficients,
    MultimodeCovariance,
    TwoModeCoefficients,
    build_covariance,
    extract_coefficients,
    extract_four_mode_coefficients,
    is_physical,
)

PURE_TWIN = "pure_twin"
BALANCED_MIX = "balanced_mix"
SINGLE_ARM_VACUUM = "single_arm_vacuum"

REFERENCE_VARIANTS = (PURE_TWIN, BALANCED_MIX, SINGLE_ARM_VACUUM)


@dataclass(frozen=True)
class BeamSplitter:
    """Lossless beam splitter with amplitude transmissivity t and phase theta."""

    t: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "theta", float(self.theta))
        if not math.isfinite(self.t) or not math.isfinite(self.theta):
            raise ValueError("beam splitter parameters must be finite")
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"transmissivity must lie in [0, 1], got {self.t}")

    @property
    def r(self) -> float:
        """Amplitude reflectivity sqrt(1 - t^2)."""
        return math.sqrt(max(0.0, 1.0 - self.t * self.t))

    @classmethod
    def balanced(cls, theta: float = 0.0) -> "BeamSplitter":
        return cls(1.0 / math.sqrt(2.0), theta)

    def mode_map(self) -> np.ndarray:
        """2x2 unitary sending input operators to output operators."""
        t, r, th = self.t, self.r, self.theta
        return np.array(
            [
                [t, r * np.exp(1j * th)],
                [-r * np.exp(-1j * th), t],
            ]
        )


@dataclass(frozen=True)
class TwinBeamSource:
    """Pure twin beam with mean photon-pair number b_p and pump phase phi."""

    b_p: float
    phi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "b_p", float(self.b_p))
        object.__setattr__(self, "phi", float(self.phi))
        if not math.isfinite(self.b_p) or not math.isfinite(self.phi):
            raise ValueError("source parameters must be finite")
        if self.b_p < 0.0:
            raise ValueError(f"mean pair number must be >= 0, got {self.b_p}")

    @classmethod
    def from_gain(cls, gain: float, phi: float = 0.0) -> "TwinBeamSource":
        """Source at parametric gain G, with b_p = sinh^2(sqrt(G))."""
        if gain < 0.0:
            raise ValueError("gain must be >= 0")
        return cls(math.sinh(math.sqrt(gain)) ** 2, phi)


def twin_beam(source: TwinBeamSource) -> TwoModeCoefficients:
    """Coefficients of a pure twin beam from parametric down-conversion.

    Only B_1 = B_2 = b_p and D_12 = i e^{i phi} sqrt(b_p (b_p + 1)) are
    nonzero.
    """
    bp = source.b_p
    d12 = 1j * np.exp(1j * source.phi) * math.sqrt(bp * (bp + 1.0))
    return TwoModeCoefficients(bp, bp, 0j, 0j, d12, 0j)


def estimate_twin_beam_parameters(coeffs: TwoModeCoefficients) -> tuple[float, float]:
    """Invert :func:`twin_beam`: (b_p, phi) from measured coefficients.

    b_p is taken as the average of the two mean photon numbers and phi from
    the phase of D_12 relative to the i e^{i phi} convention.
    """
    b_p = (coeffs.b1 + coeffs.b2) / 2.0
    phi = float(np.angle(-1j * coeffs.d12))
    return b_p, phi


def _lift_mode_map(u: np.ndarray) -> np.ndarray:
    """Lift an n x n unitary mode map to the 2n interleaved (beta, beta*) slots.

    With outputs a_out = U a_in, the characteristic-function variables pull
    back as gamma = U^dag beta (and conjugates), so the covariance transforms
    as A -> S^dag A S with this S.
    """
    n = u.shape[0]
    s = np.zeros((2 * n, 2 * n), dtype=complex)
    s[0::2, 0::2] = u.conj().T
    s[1::2, 1::2] = u.T
    return s


def _conjugated(state: MultimodeCovariance, big: np.ndarray) -> MultimodeCovariance:
    out = big.conj().T @ state.matrix @ big
    return MultimodeCovariance(state.n_modes, out, state.ordering)


def apply_beam_splitter(
    state: MultimodeCovariance, modes: tuple[int, int], bs: BeamSplitter
) -> MultimodeCovariance:
    """Mix two modes of a covariance matrix on a lossless beam splitter.

    Exact (quadratic in t, r); preserves physicality and the total mean
    photon number.
    """
    j, k = modes
    n = state.n_modes
    if j == k or not (0 <= j < n) or not (0 <= k < n):
        raise ValueError(f"need two distinct mode indices below {n}")
    if state.ordering != NORMAL:
        raise ValueError("transforms act on normally-ordered covariances")
    u = np.eye(n, dtype=complex)
    u[np.ix_((j, k), (j, k))] = bs.mode_map()
    return _conjugated(state, _lift_mode_map(u))


def apply_phase_shift(
    state: MultimodeCovariance, mode: int, theta: float
) -> MultimodeCovariance:
    """Impose a phase shift a_mode -> e^{i theta} a_mode.

    B is unchanged while C picks up e^{2 i theta}, D_jk e^{+-i theta} and
    Dbar_jk the conjugate factor, consistent with the moment definitions.
    """
    n = state.n_modes
    if not 0 <= mode < n:
        raise ValueError(f"mode index {mode} out of range for {n} modes")
    if state.ordering != NORMAL:
        raise ValueError("transforms act on normally-ordered covariances")
    u = np.eye(n, dtype=complex)
    u[mode, mode] = np.exp(1j * float(theta))
    return _conjugated(state, _lift_mode_map(u))


def apply_single_mode_squeeze(
    state: MultimodeCovariance, mode: int, amount: float, phase: float = 0.0
) -> MultimodeCovariance:
    """Squeeze one mode: a -> cosh(amount) a + e^{i phase} sinh(amount) a^dag.

    Active Bogoliubov transform used to build general Gaussian sources.  The
    Weyl characteristic function transforms covariantly under any Gaussian
    unitary, so the conjugation is done at symmetric ordering and mapped back.
    """
    n = state.n_modes
    if not 0 <= mode < n:
        raise ValueError(f"mode index {mode} out of range for {n} modes")
    if state.ordering != NORMAL:
        raise ValueError("transforms act on normally-ordered covariances")
    ch = math.cosh(float(amount))
    sh = math.sinh(float(amount))
    ph = np.exp(1j * float(phase))
    big = np.eye(2 * n, dtype=complex)
    sl = (2 * mode, 2 * mode + 1)
    big[np.ix_(sl, sl)] = np.array([[ch, -ph * sh], [-np.conj(ph) * sh, ch]])
    eye = np.eye(2 * n)
    a_s = state.matrix - 0.5 * eye
    out = big.conj().T @ a_s @ big + 0.5 * eye
    return MultimodeCovariance(n, out, NORMAL)


def tensor_product(
    a: MultimodeCovariance, b: MultimodeCovariance
) -> MultimodeCovariance:
    """Covariance of the product state, modes of ``a`` first."""
    if a.ordering != b.ordering:
        raise ValueError("cannot combine covariances with different orderings")
    n = a.n_modes + b.n_modes
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    m[: 2 * a.n_modes, : 2 * a.n_modes] = a.matrix
    m[2 * a.n_modes :, 2 * a.n_modes :] = b.matrix
    return MultimodeCovariance(n, m, a.ordering)


def permute_modes(state: MultimodeCovariance, order) -> MultimodeCovariance:
    """Reorder modes so new mode i is old mode order[i]."""
    n = state.n_modes
    order = tuple(int(i) for i in order)
    if sorted(order) != list(range(n)):
        raise ValueError(f"order must be a permutation of 0..{n - 1}")
    slots = np.array([(2 * i, 2 * i + 1) for i in order]).reshape(-1)
    return MultimodeCovariance(
        n, state.matrix[np.ix_(slots, slots)], state.ordering
    )


@dataclass(frozen=True)
class ReferencePreparation:
    """Recipe for one reference field used by the retrieval procedure.

    variant:
        "pure_twin"         -- the twin beam itself (BS1 fully transmissive);
        "balanced_mix"      -- twin-beam constituents mixed on balanced BS1,
                               giving two separable squeezed modes with
                               opposite phases;
        "single_arm_vacuum" -- one twin-beam constituent mixed with vacuum on
                               balanced BS1; ``vacuum_arm`` selects which BS1
                               input (1 or 2) carries the vacuum, which fixes
                               the sign of the resulting Dbar coefficient.
    modulator_theta is a phase imposed on reference mode c1 after BS1;
    bs1_theta is the BS1 phase (the retrieval identities assume 0).
    """

    variant: str
    source: TwinBeamSource
    vacuum_arm: int = 2
    modulator_theta: float = 0.0
    bs1_theta: float = 0.0

    def __post_init__(self):
        if self.variant not in REFERENCE_VARIANTS:
            raise ValueError(f"unknown reference variant {self.variant!r}")
        if self.vacuum_arm not in (1, 2):
            raise ValueError("vacuum_arm must be 1 or 2")
        object.__setattr__(self, "modulator_theta", float(self.modulator_theta))
        object.__setattr__(self, "bs1_theta", float(self.bs1_theta))

    @classmethod
    def pure_twin(cls, source: TwinBeamSource, modulator_theta: float = 0.0):
        return cls(PURE_TWIN, source, modulator_theta=modulator_theta)

    @classmethod
    def balanced_mix(cls, source: TwinBeamSource, modulator_theta: float = 0.0):
        return cls(BALANCED_MIX, source, modulator_theta=modulator_theta)

    @classmethod
    def single_arm_vacuum(
        cls,
        source: TwinBeamSource,
        vacuum_arm: int = 2,
        modulator_theta: float = 0.0,
    ):
        return cls(
            SINGLE_ARM_VACUUM,
            source,
            vacuum_arm=vacuum_arm,
            modulator_theta=modulator_theta,
        )


def prepare_reference(prep: ReferencePreparation) -> TwoModeCoefficients:
    """Coefficients of the reference field for the selected preparation.

    With bs1_theta = 0 the three variants give

        pure_twin:         B^R = b_p, D^R = i e^{i phi} sqrt(b_p (b_p+1))
        balanced_mix:      B^R = b_p, C_1^R = -C_2^R = i e^{i phi} sqrt(...)
        single_arm_vacuum: B^R = b_p / 2, Dbar^R = +- b_p / 2
                           (+ when BS1 input 2 is the vacuum)

    followed by the modulator phase on mode c1.
    """
    if prep.variant == PURE_TWIN:
        state = build_covariance(twin_beam(prep.source))
    elif prep.variant == BALANCED_MIX:
        state = build_covariance(twin_beam(prep.source))
        state = apply_beam_splitter(
            state, (0, 1), BeamSplitter.balanced(prep.bs1_theta)
        )
    else:
        # One thermal constituent of the twin beam (mean photon number b_p)
        # on the non-vacuum BS1 input, vacuum on the other.
        bp = prep.source.b_p
        b1, b2 = (bp, 0.0) if prep.vacuum_arm == 2 else (0.0, bp)
        state = build_covariance(TwoModeCoefficients(b1, b2))
        state = apply_beam_splitter(
            state, (0, 1), BeamSplitter.balanced(prep.bs1_theta)
        )
    if prep.modulator_theta != 0.0:
        state = apply_phase_shift(state, 0, prep.modulator_theta)
    return extract_coefficients(state)


def build_fig1_network(
    unknown: TwoModeCoefficients,
    reference: TwoModeCoefficients,
    tol: float = 1e-9,
) -> FourModeCoefficients:
    """Propagate unknown (x) reference through the detection network.

    Forms the four-mode product state in the order (a1, c1, a2, c2), applies
    the balanced zero-phase splitters BS2 on (a1, c1) and BS3 on (a2, c2),
    and returns the coefficients of the four detector modes.
    """
    for name, state in (("unknown", unknown), ("reference", reference)):
        if not is_physical(state, tol):
            raise ValueError(f"{name} state is not physical")
    four = tensor_product(build_covariance(unknown), build_covariance(reference))
    four = permute_modes(four, (0, 2, 1, 3))
    four = apply_beam_splitter(four, (0, 1), BeamSplitter.balanced())
    four = apply_beam_splitter(four, (2, 3), BeamSplitter.balanced())
    return extract_four_mode_coefficients(four)


def squeezed_thermal_pair(
    n1: float,
    s1: float,
    chi1: float,
    n2: float,
    s2: float,
    chi2: float,
) -> TwoModeCoefficients:
    """Two independent squeezed thermal modes.

    Each mode has B = n cosh(2s) + sinh^2(s) and C = (n + 1/2) sinh(2s)
    e^{i chi}; there are no cross-correlations.  A pure squeezed mode (n = 0)
    saturates |C|^2 = B (B + 1).
    """
    if n1 < 0.0 or n2 < 0.0:
        raise ValueError("thermal occupations must be >= 0")
    b = []
    c = []
    for n_th, s, chi in ((n1, s1, chi1), (n2, s2, chi2)):
        b.append(n_th * math.cosh(2.0 * s) + math.sinh(s) ** 2)
        c.append((n_th + 0.5) * math.sinh(2.0 * s) * np.exp(1j * chi))
    return TwoModeCoefficients(b[0], b[1], c[0], c[1])


def random_state(seed_or_rng, max_b: float = 1.0) -> TwoModeCoefficients:
    """Random physical two-mode Gaussian state with all six coefficients generic.

    Samples a thermal pair, mixes it, squeezes each mode locally and mixes
    again (thermal -> passive -> squeeze -> passive spans every zero-mean
    two-mode Gaussian state).  ``max_b`` loosely caps the mean photon numbers.
    """
    rng = np.random.default_rng(seed_or_rng) if not isinstance(
        seed_or_rng, np.random.Generator
    ) else seed_or_rng
    scale = float(max_b)
    if scale <= 0.0:
        raise ValueError("max_b must be > 0")
    n1, n2 = rng.uniform(0.0, 0.30 * scale, 2)
    s_max = math.asinh(math.sqrt(0.45 * scale))
    s1, s2 = rng.uniform(0.1 * s_max, s_max, 2)
    chi1, chi2 = rng.uniform(0.0, 2.0 * np.pi, 2)

    state = build_covariance(TwoModeCoefficients(n1, n2))
    state = apply_beam_splitter(
        state, (0, 1), BeamSplitter(rng.uniform(0.2, 0.98), rng.uniform(0, 2 * np.pi))
    )
    state = apply_single_mode_squeeze(state, 0, s1, chi1)
    state = apply_single_mode_squeeze(state, 1, s2, chi2)
    state = apply_phase_shift(state, 0, rng.uniform(0, 2 * np.pi))
    state = apply_beam_splitter(
        state, (0, 1), BeamSplitter(rng.uniform(0.2, 0.98), rng.uniform(0, 2 * np.pi))
    )
    state = apply_phase_shift(state, 1, rng.uniform(0, 2 * np.pi))
    return extract_coefficients(state)
