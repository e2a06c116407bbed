"""Evolution-based quantum tomography.

Generate expectation-value time series under quantum channels, extend
finite series from spectral data alone, reconstruct unknown states or
observables from evolved probes, certify no-go cases by rank deficiency,
and bound the estimation error under finite measurement statistics.

All objects are immutable after construction and all randomness flows
through explicit ``numpy.random.Generator`` arguments, so everything here
is safe to share across threads.
"""

__version__ = "0.1.0"

from .operator_space import (
    DensityOperator,
    HermitianOperator,
    OperatorBasis,
    devectorize,
    random_density,
    random_hermitian,
    random_pure_state,
    standard_basis,
    traceless_project,
    vectorize,
)
from .channels import (
    ChoiMatrix,
    LindbladGenerator,
    SuperOperator,
    apply,
    build_lindblad,
    choi_matrix,
    depolarizing_mixture,
    exponentiate,
    haar_random_unitary,
    pauli_cycle_unitary,
    qubit_dephasing_depolarizing,
    random_lindblad,
    restrict_traceless,
    unitary_channel,
    validate_channel,
)
from .spectral import SpectralProfile, degree_bound_check, nondegenerate, spectral_profile
from .series_engine import (
    AffineExtension,
    ContinuousExtension,
    LinearExtension,
    TimeSeries,
    build_affine_extension,
    build_continuous_extension,
    build_linear_extension,
    generate_discrete,
    series_subspace_rank,
)
from .tomography import (
    InjectivityCertificate,
    MeasurementMap,
    balanced_axis_state,
    build_alpha,
    build_beta,
    certify,
    continuous_maps,
    qubit_landscape,
    reconstruct_observable,
    reconstruct_state,
    reference_constants,
    takens_probe,
    tetrahedral_sic_states,
)
from .statistics import (
    EstimationResult,
    MeasurementPlan,
    estimate_state,
    evolved_effect_plan,
    mse_bound,
    mse_experiment,
    sample_frequencies,
)
from . import errors

__all__ = [name for name in dir() if not name.startswith("_")]
