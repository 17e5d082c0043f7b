"""Magic and multifractality measures for pure qubit states."""

from __future__ import annotations

from .clifford import (
    CliffordTableau,
    apply_clifford,
    clifford_group_unitaries,
    enumerate_cliffords,
    random_clifford,
    stabilizer_participation_entropy,
    synthesize,
)
from .errors import ModelError, UnsupportedParameters
from .measures import (
    FitResult,
    MeasureReport,
    batch_flatness,
    fit_scaling,
    flatness_from_probs,
    generalized_flatness,
    ipr,
    measure_report,
    multifractal_flatness,
    participation_distribution,
    participation_entropy,
    stabilizer_entropy,
)
from .oracles import (
    HaarMomentSpec,
    haar_flatness_std,
    haar_ipr_moment,
    haar_mean_flatness,
    sample_haar_state,
    single_qubit_m_q,
    single_qubit_s_q,
)
from .orbit import (
    OrbitEstimate,
    estimate_m2,
    orbit_average,
    orbit_average_exact,
    orbit_average_mc,
    samples_to_accuracy,
    theorem_rhs,
)
from .pauli import PauliString, enumerate_paulis, pauli_expectation, pauli_spectrum, xi_norm
from .readout import (
    ReadoutModel,
    apply_readout_noise,
    device_experiment,
    fit_readout_model,
    mitigate_readout,
    sample_shots,
)
from .state import (
    Statevector,
    apply_one_qubit,
    apply_rxx,
    apply_two_qubit,
    new_basis_state,
    prepare_bloch,
    product_state,
    rxx_state,
)

__version__ = "0.1.0"
