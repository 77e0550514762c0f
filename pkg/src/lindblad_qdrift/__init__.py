"""Randomized (qDRIFT-type) simulation of Lindblad dynamics and random Davies Gibbs samplers."""
from .errors import (ConfigError, DimensionError, InputError, NumericRangeError,
                     PreconditionError, StateInvariantError)
from .linalg import (HermitianEigen, dagger, devectorize, expm, haar_unitary, herm_eig,
                     kron, partial_trace_ancilla, vectorize)
from .lindblad import (CPTPReport, Lindbladian, Superoperator, apply_generator, check_cptp,
                       choi_matrix, exact_propagator, to_superoperator)
from .metrics import (GibbsContext, chi_square, choi_distance, detailed_balance_residual,
                      frobenius_distance, kms_norm, spectral_gap, spectral_gap_report,
                      trace_distance, variance_sigma, weighted_l2_norm)
from .qdrift import (DiscreteEnsemble, LindbladTerm, SamplerEnsemble, StepAlgorithm,
                     TrajectoryRecord, average_channel_power, average_step_superop,
                     mc_average_channel, run_trajectory, sample_term, step_dilation,
                     step_exact, step_trotter)
from .davies import (ClassicalChain, RandomJumpSampler, SignMethod, WeightFunction,
                     analytic_davies, build_jump_K, coherence_decay_rate,
                     davies_gap_certificate, gap_bounds, glauber, metropolis, mh_chain,
                     pauli_master_matrix, sample_A)
from .hamiltonians import (PauliString, low_energy_fraction, pauli_string_hamiltonian,
                           semicircle_cdf, spectral_cdf, spin_chain_hamiltonian)

__version__ = "0.1.0"
