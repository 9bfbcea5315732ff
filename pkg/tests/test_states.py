"""Tests for the covariance value types and Gaussian-state algebra."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covrec.states import (
    FOUR_MODE_PAIRS,
    FourModeCoefficients,
    MultimodeCovariance,
    TwoModeCoefficients,
    build_covariance,
    build_four_mode_covariance,
    char_fn_eval,
    extract_coefficients,
    extract_four_mode_coefficients,
    intensity_moments,
    is_physical,
    mode_pairs,
    moment_oracle,
    pair_index,
    physicality_check,
    to_symmetric_ordering,
)
from covrec.optics import TwinBeamSource, twin_beam

from helpers import random_four_mode_covariance

SQRT2 = np.sqrt(2.0)

finite_reals = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
nonneg_reals = st.floats(min_value=0.0, max_value=3.0, allow_nan=False)
complexes = st.builds(complex, finite_reals, finite_reals)


def test_mode_pairs_ordering():
    assert mode_pairs(2) == ((0, 1),)
    assert FOUR_MODE_PAIRS == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
    assert pair_index(2, 0) == pair_index(0, 2) == 1
    with pytest.raises(ValueError):
        pair_index(1, 1)


class TestBuildExtract:
    def test_vacuum_matrix_is_zero(self):
        m = build_covariance(TwoModeCoefficients.vacuum())
        assert m.ordering == "normal"
        np.testing.assert_array_equal(m.matrix, np.zeros((4, 4)))

    def test_twin_beam_layout(self):
        # b1 = b2 = 1 and d12 = i sqrt(2) occupy fixed slots.
        m = build_covariance(twin_beam(TwinBeamSource(1.0))).matrix
        expected = np.array(
            [
                [-1, 0, 0, 1j * SQRT2],
                [0, -1, -1j * SQRT2, 0],
                [0, 1j * SQRT2, -1, 0],
                [-1j * SQRT2, 0, 0, -1],
            ]
        )
        np.testing.assert_allclose(m, expected, atol=1e-15)

    @given(
        b1=nonneg_reals,
        b2=nonneg_reals,
        c1=complexes,
        c2=complexes,
        d12=complexes,
        dbar12=complexes,
    )
    @settings(max_examples=80, deadline=None)
    def test_round_trip_is_exact(self, b1, b2, c1, c2, d12, dbar12):
        coeffs = TwoModeCoefficients(b1, b2, c1, c2, d12, dbar12)
        assert extract_coefficients(build_covariance(coeffs)) == coeffs

    def test_four_mode_round_trip(self):
        rng = np.random.default_rng(3)
        m = random_four_mode_covariance(rng)
        coeffs = extract_four_mode_coefficients(m)
        rebuilt = build_four_mode_covariance(coeffs)
        np.testing.assert_allclose(rebuilt.matrix, m.matrix, atol=1e-14)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            TwoModeCoefficients(np.nan, 0.0)
        with pytest.raises(ValueError):
            TwoModeCoefficients(0.0, 0.0, c1=complex(np.inf, 0.0))
        with pytest.raises(ValueError):
            FourModeCoefficients((0.0,) * 4, (0j,) * 4, (np.nan,) * 6, (0j,) * 6)

    def test_extract_requires_two_modes_normal(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            extract_coefficients(random_four_mode_covariance(rng))
        sym = to_symmetric_ordering(build_covariance(TwoModeCoefficients.vacuum()))
        with pytest.raises(ValueError):
            extract_coefficients(sym)


class TestCovarianceValidation:
    def test_rejects_non_hermitian(self):
        m = np.zeros((4, 4), dtype=complex)
        m[0, 1] = 1.0
        with pytest.raises(ValueError, match="Hermitian"):
            MultimodeCovariance(2, m)

    def test_rejects_broken_slot_symmetry(self):
        # Hermitian, but the two same-mode diagonal entries differ.
        m = np.diag([-1.0, -2.0, 0.0, 0.0]).astype(complex)
        with pytest.raises(ValueError, match="slot symmetry"):
            MultimodeCovariance(2, m)

    def test_rejects_bad_shape_and_ordering(self):
        with pytest.raises(ValueError):
            MultimodeCovariance(2, np.zeros((2, 2)))
        with pytest.raises(ValueError):
            MultimodeCovariance(2, np.zeros((4, 4)), ordering="antinormal")

    def test_matrix_is_read_only(self):
        m = build_covariance(TwoModeCoefficients.vacuum())
        with pytest.raises(ValueError):
            m.matrix[0, 0] = 1.0


class TestOrderingConversion:
    def test_vacuum_gains_half_quantum(self):
        m_s = to_symmetric_ordering(build_covariance(TwoModeCoefficients.vacuum()))
        assert m_s.ordering == "symmetric"
        np.testing.assert_array_equal(m_s.matrix, -0.5 * np.eye(4))

    def test_only_diagonal_changes(self):
        m = build_covariance(TwoModeCoefficients(0.3, 0.7, c1=0.2j, d12=0.1 + 0.2j))
        m_s = to_symmetric_ordering(m)
        delta = m.matrix - m_s.matrix
        np.testing.assert_allclose(delta, 0.5 * np.eye(4), atol=1e-15)

    def test_double_conversion_rejected(self):
        m_s = to_symmetric_ordering(build_covariance(TwoModeCoefficients.vacuum()))
        with pytest.raises(ValueError):
            to_symmetric_ordering(m_s)

    @pytest.mark.parametrize("b_p", [0.0, 0.5, 1.0, 5.0])
    def test_pure_twin_beam_purity(self, b_p):
        # det(A_S) = ((b_p + 1/2)^2 - b_p (b_p + 1))^2 = 1/16 for any pure twin.
        m_s = to_symmetric_ordering(build_covariance(twin_beam(TwinBeamSource(b_p, 0.8))))
        assert abs(np.linalg.det(m_s.matrix).real - 1.0 / 16.0) < 1e-12


class TestPhysicality:
    def test_vacuum_is_physical(self):
        m_s = to_symmetric_ordering(build_covariance(TwoModeCoefficients.vacuum()))
        assert physicality_check(m_s)

    def test_saturating_squeezed_mode_is_physical(self):
        # |C|^2 = B (B + 1) is the pure squeezed boundary.
        assert is_physical(TwoModeCoefficients(1.0, 0.0, c1=SQRT2))

    def test_overstrong_c_is_unphysical(self):
        assert not is_physical(TwoModeCoefficients(1.0, 0.0, c1=2.0))

    def test_requires_symmetric_ordering(self):
        m = build_covariance(TwoModeCoefficients.vacuum())
        with pytest.raises(ValueError):
            physicality_check(m)

    def test_negative_b_is_unphysical(self):
        assert not is_physical(TwoModeCoefficients(-0.2, 0.0))


class TestCharFn:
    def test_origin_is_one(self):
        m = build_covariance(TwoModeCoefficients(0.4, 0.6, c1=0.3j))
        assert char_fn_eval(m, [0, 0, 0, 0]) == 1.0

    def test_vacuum_is_identically_one(self):
        m = build_covariance(TwoModeCoefficients.vacuum())
        rng = np.random.default_rng(1)
        for _ in range(5):
            z = rng.normal(size=2) + 1j * rng.normal(size=2)
            beta = [z[0], np.conj(z[0]), z[1], np.conj(z[1])]
            assert char_fn_eval(m, beta) == pytest.approx(1.0)

    def test_twin_beam_value(self):
        m = build_covariance(twin_beam(TwinBeamSource(1.0)))
        assert char_fn_eval(m, [1, 1, 0, 0]) == pytest.approx(np.exp(-1.0), abs=1e-15)

    def test_input_validation(self):
        m = build_covariance(TwoModeCoefficients.vacuum())
        with pytest.raises(ValueError):
            char_fn_eval(m, [0, 0])
        with pytest.raises(ValueError):
            char_fn_eval(m, [np.nan, 0, 0, 0])
        with pytest.raises(ValueError):
            char_fn_eval(to_symmetric_ordering(m), [0, 0, 0, 0])


class TestIntensityMoments:
    def test_vacuum_all_zero(self):
        w = intensity_moments(FourModeCoefficients.vacuum())
        assert w.mean_w == (0.0,) * 4
        assert w.var_w == (0.0,) * 4
        assert w.cross_w == (0.0,) * 6

    def test_variance_adds_squeezing(self):
        coeffs = FourModeCoefficients((1.0, 0, 0, 0), (1j, 0, 0, 0), (0j,) * 6, (0j,) * 6)
        assert intensity_moments(coeffs).var_w[0] == pytest.approx(2.0)

    def test_cross_combines_both_correlations(self):
        d = [0j] * 6
        dbar = [0j] * 6
        d[pair_index(0, 1)] = 1.0 + 1.0j
        dbar[pair_index(0, 1)] = 1.0
        coeffs = FourModeCoefficients((0.0,) * 4, (0j,) * 4, tuple(d), tuple(dbar))
        assert intensity_moments(coeffs).cross(0, 1) == pytest.approx(3.0)


class TestMomentOracle:
    def test_vacuum(self):
        m = build_covariance(TwoModeCoefficients.vacuum())
        assert moment_oracle(m, 0, 1) == pytest.approx(0.0, abs=1e-10)

    def test_twin_beam_cross_intensity(self):
        # <dW1 dW2> = |D12|^2 = b_p (b_p + 1) = 2 for b_p = 1.
        m = build_covariance(twin_beam(TwinBeamSource(1.0)))
        assert moment_oracle(m, 0, 1) == pytest.approx(2.0, abs=1e-7)

    def test_matches_closed_form_on_random_states(self):
        rng = np.random.default_rng(17)
        worst = 0.0
        for _ in range(40):
            m = random_four_mode_covariance(rng)
            w = intensity_moments(extract_four_mode_coefficients(m))
            for j, k in FOUR_MODE_PAIRS:
                worst = max(worst, abs(moment_oracle(m, j, k) - w.cross(j, k)))
        assert worst < 1e-6

    def test_input_validation(self):
        m = build_covariance(TwoModeCoefficients.vacuum())
        with pytest.raises(ValueError):
            moment_oracle(m, 1, 1)
        with pytest.raises(ValueError):
            moment_oracle(m, 0, 2)
        with pytest.raises(ValueError):
            moment_oracle(to_symmetric_ordering(m), 0, 1)
