"""Markov chains with doubly stochastic kernels, their universal polytopes,
and sequences of non-selective quantum measurements."""

__version__ = "0.1.0"

from .errors import DStochError, ValidationError
from .stochastic import (
    DoublyStochasticMatrix,
    Permutation,
    PermutationMatrix,
    ProbabilityVector,
    kl_to_uniform,
    propagate,
    shannon_entropy,
    spectral_analysis,
    uniform_matrix,
    uniform_vector,
    validate_doubly_stochastic,
    validate_probability_vector,
)
from .birkhoff import BirkhoffDecomposition, decompose, recombine
from .markov import (
    ChainSchedule,
    PathDistribution,
    composite_kernel,
    entropy_trace,
    ergodicity_report,
    mixing_time_estimate,
    path_distribution,
    path_entropy,
    schedule_path_entropy,
    state_at,
)
from .polytope import (
    UniversalPolytope,
    contains,
    export_hat_vertices,
    is_nested,
    membership_oracle,
    min_entropy,
    orbit_vertices,
)
from .quantum import (
    DensityMatrix,
    HermitianHamiltonian,
    MeasurementChainConfig,
    UnitaryMatrix,
    evolve_unitary,
    fourier_matrix,
    hamiltonian_evolution,
    induced_kernel,
    markov_vs_quantum_gap,
    nonselective_measure,
    run_measurement_chain,
    zeno_report,
)
