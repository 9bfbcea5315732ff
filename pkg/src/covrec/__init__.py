"""Covariance-matrix retrieval for two-mode Gaussian states via a twin-beam reference.

The package simulates the four-detector interference scheme -- an unknown
two-mode Gaussian state mixed with phase-swept reference fields derived from
a pure twin beam -- and inverts the measured photocount moments back into the
six covariance coefficients of the unknown state.
"""

from .detection import (
    DetectorBank,
    MeasurementRecord,
    closed_form_moments,
    exact_measurement,
    measure,
    sample_measurement,
)
from .optics import (
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
from .reconstruction import (
    CRetrieval,
    ExperimentPlan,
    PhaseSweep,
    RankDeficientGridError,
    ReconstructionReport,
    RecordSet,
    SinusoidFit,
    coefficient_errors,
    detector_difference,
    detector_difference_alt,
    fit_sinusoid,
    intensity_variances,
    reconstruct,
    retrieve_B,
    retrieve_C,
    retrieve_C_symmetric,
    retrieve_D12,
    retrieve_Dbar12,
    run_pipeline,
    simulate_records,
    twin_beam_self_check,
    uniform_phase_grid,
)
from .states import (
    FOUR_MODE_PAIRS,
    FourModeCoefficients,
    IntensityMoments,
    MultimodeCovariance,
    TwoModeCoefficients,
    build_covariance,
    build_four_mode_covariance,
    char_fn_eval,
    extract_coefficients,
    extract_four_mode_coefficients,
    intensity_moments,
    is_physical,
    moment_oracle,
    physicality_check,
    to_symmetric_ordering,
)

__version__ = "0.1.0"
