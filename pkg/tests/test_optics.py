"""Tests for sources, passive transforms and the four-detector network."""

import numpy as np
import pytest

from covrec.optics import (
    BeamSplitter,
    ReferencePreparation,
    TwinBeamSource,
    apply_beam_splitter,
    apply_phase_shift,
    apply_single_mode_squeeze,
    build_fig1_network,
    estimate_twin_beam_parameters,
    permute_modes,
    prepare_reference,
    random_state,
    squeezed_thermal_pair,
    tensor_product,
    twin_beam,
)
from covrec.states import (
    TwoModeCoefficients,
    build_covariance,
    extract_coefficients,
    is_physical,
)

from helpers import random_four_mode_covariance

SQRT2 = np.sqrt(2.0)


def total_mean_photons(state):
    return -state.matrix.trace().real / 2.0


class TestTwinBeam:
    def test_zero_gain_gives_vacuum(self):
        assert twin_beam(TwinBeamSource(0.0)) == TwoModeCoefficients.vacuum()

    def test_unit_pair_number(self):
        coeffs = twin_beam(TwinBeamSource(1.0))
        assert coeffs.b1 == coeffs.b2 == 1.0
        assert coeffs.d12 == pytest.approx(1j * SQRT2)
        assert coeffs.c1 == coeffs.c2 == coeffs.dbar12 == 0.0

    def test_pump_phase_rotates_d12(self):
        coeffs = twin_beam(TwinBeamSource(1.0, np.pi / 2.0))
        assert coeffs.d12 == pytest.approx(-SQRT2)

    def test_negative_pair_number_rejected(self):
        with pytest.raises(ValueError):
            TwinBeamSource(-0.5)

    def test_from_gain(self):
        source = TwinBeamSource.from_gain(1.0)
        assert source.b_p == pytest.approx(np.sinh(1.0) ** 2)

    def test_parameter_estimate_round_trip(self):
        source = TwinBeamSource(0.7, 1.9)
        b_p, phi = estimate_twin_beam_parameters(twin_beam(source))
        assert b_p == pytest.approx(0.7)
        assert phi == pytest.approx(1.9)


class TestBeamSplitter:
    def test_transmissivity_bounds(self):
        with pytest.raises(ValueError):
            BeamSplitter(1.2)
        with pytest.raises(ValueError):
            BeamSplitter(-0.1)

    def test_reflectivity(self):
        assert BeamSplitter(0.6).r == pytest.approx(0.8)
        assert BeamSplitter.balanced().t == pytest.approx(1 / SQRT2)

    def test_fully_transmissive_is_identity(self):
        state = build_covariance(random_state(0, 1.0))
        out = apply_beam_splitter(state, (0, 1), BeamSplitter(1.0))
        np.testing.assert_allclose(out.matrix, state.matrix, atol=1e-15)

    def test_invalid_modes_rejected(self):
        state = build_covariance(TwoModeCoefficients.vacuum())
        for modes in ((0, 0), (0, 2), (-1, 1)):
            with pytest.raises(ValueError):
                apply_beam_splitter(state, modes, BeamSplitter.balanced())

    def test_balanced_split_of_twin_beam_gives_opposite_squeezing(self):
        # The twin beam's constituents leave a balanced splitter as two
        # separable squeezed modes with opposite phases.
        phi = 0.45
        state = build_covariance(twin_beam(TwinBeamSource(1.0, phi)))
        out = extract_coefficients(
            apply_beam_splitter(state, (0, 1), BeamSplitter.balanced())
        )
        expected = 1j * np.exp(1j * phi) * SQRT2
        assert out.c1 == pytest.approx(expected, abs=1e-14)
        assert out.c2 == pytest.approx(-expected, abs=1e-14)
        assert out.d12 == pytest.approx(0.0, abs=1e-14)
        assert out.b1 == pytest.approx(1.0)
        assert out.b2 == pytest.approx(1.0)

    def test_balanced_split_of_single_thermal_arm(self):
        # Thermal mode + vacuum through a balanced splitter: equal mean
        # photon numbers and dbar12 = +b/2 when mode 2 held the vacuum.
        state = build_covariance(TwoModeCoefficients(1.0, 0.0))
        out = extract_coefficients(
            apply_beam_splitter(state, (0, 1), BeamSplitter.balanced())
        )
        assert out.b1 == pytest.approx(0.5)
        assert out.b2 == pytest.approx(0.5)
        assert out.dbar12 == pytest.approx(0.5, abs=1e-14)
        assert out.c1 == out.c2 == pytest.approx(0.0, abs=1e-14)
        assert out.d12 == pytest.approx(0.0, abs=1e-14)

    def test_conserves_total_photon_number(self):
        rng = np.random.default_rng(5)
        state = random_four_mode_covariance(rng)
        before = total_mean_photons(state)
        for _ in range(6):
            modes = tuple(rng.choice(4, size=2, replace=False))
            bs = BeamSplitter(rng.uniform(0, 1), rng.uniform(0, 2 * np.pi))
            state = apply_beam_splitter(state, modes, bs)
        assert total_mean_photons(state) == pytest.approx(before, abs=1e-12)

    def test_preserves_physicality(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            state = build_covariance(random_state(rng, 1.5))
            for _ in range(3):
                state = apply_beam_splitter(
                    state,
                    (0, 1),
                    BeamSplitter(rng.uniform(0, 1), rng.uniform(0, 2 * np.pi)),
                )
                state = apply_phase_shift(state, 0, rng.uniform(0, 2 * np.pi))
            assert is_physical(state)


class TestPhaseShift:
    def test_zero_shift_is_identity(self):
        state = build_covariance(random_state(1, 1.0))
        out = apply_phase_shift(state, 1, 0.0)
        np.testing.assert_allclose(out.matrix, state.matrix, atol=1e-15)

    def test_coefficient_phases(self):
        coeffs = TwoModeCoefficients(0.5, 0.5, c1=0.2 + 0.1j, d12=0.3j, dbar12=0.1)
        theta = 0.8
        out = extract_coefficients(
            apply_phase_shift(build_covariance(coeffs), 0, theta)
        )
        assert out.b1 == pytest.approx(coeffs.b1)
        assert out.c1 == pytest.approx(coeffs.c1 * np.exp(2j * theta))
        assert out.c2 == pytest.approx(coeffs.c2)
        assert out.d12 == pytest.approx(coeffs.d12 * np.exp(1j * theta))
        assert out.dbar12 == pytest.approx(coeffs.dbar12 * np.exp(-1j * theta))

    def test_c_has_half_period(self):
        coeffs = TwoModeCoefficients(1.0, 0.0, c1=1.0)
        out = extract_coefficients(
            apply_phase_shift(build_covariance(coeffs), 0, np.pi)
        )
        assert out.c1 == pytest.approx(1.0)

    def test_twin_beam_quarter_turn(self):
        state = build_covariance(twin_beam(TwinBeamSource(1.0)))
        out = extract_coefficients(apply_phase_shift(state, 0, np.pi / 2.0))
        assert out.d12 == pytest.approx(1j * (1j * SQRT2))

    def test_invalid_mode_rejected(self):
        state = build_covariance(TwoModeCoefficients.vacuum())
        with pytest.raises(ValueError):
            apply_phase_shift(state, 2, 0.1)


class TestReferencePreparations:
    def test_pure_twin(self):
        ref = prepare_reference(
            ReferencePreparation.pure_twin(TwinBeamSource(1.0, 0.0))
        )
        assert ref.b1 == ref.b2 == pytest.approx(1.0)
        assert ref.d12 == pytest.approx(1j * SQRT2)

    @pytest.mark.parametrize("b_p", [0.1, 1.0, 10.0])
    def test_balanced_mix_identities(self, b_p):
        phi = 0.6
        ref = prepare_reference(
            ReferencePreparation.balanced_mix(TwinBeamSource(b_p, phi))
        )
        amp = 1j * np.exp(1j * phi) * np.sqrt(b_p * (b_p + 1.0))
        assert ref.c1 == pytest.approx(amp, abs=1e-12 * (1 + b_p))
        assert ref.c2 == pytest.approx(-amp, abs=1e-12 * (1 + b_p))
        assert ref.d12 == pytest.approx(0.0, abs=1e-12 * (1 + b_p))
        assert ref.b1 == ref.b2 == pytest.approx(b_p)

    @pytest.mark.parametrize("arm,sign", [(2, 1.0), (1, -1.0)])
    def test_single_arm_vacuum_sign_convention(self, arm, sign):
        ref = prepare_reference(
            ReferencePreparation.single_arm_vacuum(TwinBeamSource(1.0), vacuum_arm=arm)
        )
        assert ref.b1 == ref.b2 == pytest.approx(0.5)
        assert ref.dbar12 == pytest.approx(sign * 0.5, abs=1e-14)
        assert ref.c1 == ref.c2 == ref.d12 == pytest.approx(0.0, abs=1e-14)

    def test_modulator_rotates_dbar(self):
        theta = 0.7
        ref = prepare_reference(
            ReferencePreparation.single_arm_vacuum(
                TwinBeamSource(1.0), vacuum_arm=2, modulator_theta=theta
            )
        )
        assert ref.dbar12 == pytest.approx(0.5 * np.exp(-1j * theta), abs=1e-14)

    def test_unknown_variant_rejected(self):
        with pytest.raises(ValueError):
            ReferencePreparation("thermal", TwinBeamSource(1.0))
        with pytest.raises(ValueError):
            ReferencePreparation.single_arm_vacuum(TwinBeamSource(1.0), vacuum_arm=3)


class TestNetwork:
    def test_vacuum_in_vacuum_out(self):
        out = build_fig1_network(
            TwoModeCoefficients.vacuum(), TwoModeCoefficients.vacuum()
        )
        assert out.b == (0.0,) * 4
        assert out.c == (0j,) * 4

    def test_reference_photons_split_evenly(self):
        out = build_fig1_network(
            TwoModeCoefficients.vacuum(), twin_beam(TwinBeamSource(1.0))
        )
        assert out.b == pytest.approx((0.5, 0.5, 0.5, 0.5))

    def test_rejects_unphysical_input(self):
        bad = TwoModeCoefficients(1.0, 0.0, c1=2.0)
        with pytest.raises(ValueError, match="not physical"):
            build_fig1_network(bad, TwoModeCoefficients.vacuum())


class TestModeBookkeeping:
    def test_permute_round_trip(self):
        rng = np.random.default_rng(8)
        state = random_four_mode_covariance(rng)
        order = (2, 0, 3, 1)
        inverse = tuple(np.argsort(order))
        back = permute_modes(permute_modes(state, order), inverse)
        np.testing.assert_allclose(back.matrix, state.matrix, atol=1e-15)

    def test_permute_validates_order(self):
        state = build_covariance(TwoModeCoefficients.vacuum())
        with pytest.raises(ValueError):
            permute_modes(state, (0, 0))

    def test_tensor_product_blocks(self):
        a = build_covariance(TwoModeCoefficients(0.5, 0.25))
        b = build_covariance(TwoModeCoefficients(1.0, 2.0))
        both = tensor_product(a, b)
        assert both.n_modes == 4
        np.testing.assert_array_equal(both.matrix[:4, :4], a.matrix)
        np.testing.assert_array_equal(both.matrix[4:, 4:], b.matrix)
        assert np.all(both.matrix[:4, 4:] == 0)


class TestSources:
    def test_squeezed_thermal_saturates_when_pure(self):
        coeffs = squeezed_thermal_pair(0.0, 0.9, 0.3, 0.0, 0.4, 1.0)
        for b, c in ((coeffs.b1, coeffs.c1), (coeffs.b2, coeffs.c2)):
            assert abs(c) ** 2 == pytest.approx(b * (b + 1.0))
        assert is_physical(coeffs)

    def test_squeezed_thermal_rejects_negative_occupation(self):
        with pytest.raises(ValueError):
            squeezed_thermal_pair(-0.1, 0.0, 0.0, 0.0, 0.0, 0.0)

    def test_squeeze_transform_matches_closed_form(self):
        out = extract_coefficients(
            apply_single_mode_squeeze(
                build_covariance(TwoModeCoefficients(0.2, 0.0)), 0, 0.6, 1.1
            )
        )
        direct = squeezed_thermal_pair(0.2, 0.6, 1.1, 0.0, 0.0, 0.0)
        assert out.c1 == pytest.approx(direct.c1)
        assert out.b1 == pytest.approx(direct.b1)

    def test_random_state_is_deterministic_and_physical(self):
        a = random_state(123, 1.0)
        b = random_state(123, 1.0)
        assert a == b
        rng = np.random.default_rng(9)
        for _ in range(20):
            state = random_state(rng, 1.5)
            assert is_physical(state)

    def test_random_state_has_generic_coefficients(self):
        state = random_state(42, 1.0)
        for value in (state.c1, state.c2, state.d12, state.dbar12):
            assert abs(value) > 1e-3
