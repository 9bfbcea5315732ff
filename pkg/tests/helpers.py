"""Shared generators for randomized tests."""

import numpy as np

from covrec.optics import (
    BeamSplitter,
    ReferencePreparation,
    TwinBeamSource,
    apply_beam_splitter,
    apply_phase_shift,
    prepare_reference,
    random_state,
    tensor_product,
)
from covrec.states import MultimodeCovariance, build_covariance


def random_reference(rng) -> "TwoModeCoefficients":
    """Reference coefficients from a randomly chosen preparation."""
    source = TwinBeamSource(rng.uniform(0.1, 2.0), rng.uniform(0.0, 2 * np.pi))
    variant = rng.integers(0, 3)
    if variant == 0:
        prep = ReferencePreparation.pure_twin(source)
    elif variant == 1:
        prep = ReferencePreparation.balanced_mix(source)
    else:
        prep = ReferencePreparation.single_arm_vacuum(
            source,
            vacuum_arm=int(rng.integers(1, 3)),
            modulator_theta=rng.uniform(0.0, 2 * np.pi),
        )
    return prepare_reference(prep)


def random_four_mode_covariance(rng, max_b: float = 1.0) -> MultimodeCovariance:
    """Random physical four-mode state: two random pairs plus extra mixing."""
    state = tensor_product(
        build_covariance(random_state(rng, max_b)),
        build_covariance(random_state(rng, max_b)),
    )
    for modes in ((0, 2), (1, 3)):
        state = apply_beam_splitter(
            state,
            modes,
            BeamSplitter(rng.uniform(0.3, 0.95), rng.uniform(0.0, 2 * np.pi)),
        )
    return apply_phase_shift(state, int(rng.integers(0, 4)), rng.uniform(0, 2 * np.pi))
