"""Random product of Lindblad steps versus the exact mean evolution.

A single qubit is driven by two non-commuting Lindblad terms, each picked
with probability 1/2 at every step. Averaging the step channel gives an
error of order T^2/M in trace distance. A single random trajectory drifts
further, but its mean squared error still falls like 1/M.
"""
import numpy as np

from lindblad_qdrift import GibbsContext, exact_propagator, trace_distance, weighted_l2_norm
from lindblad_qdrift.experiments.fixtures import qubit_pair_ensemble
from lindblad_qdrift.hamiltonians import spin_chain_hamiltonian
from lindblad_qdrift.qdrift import average_channel_power, trajectory_finals

T = 2.0
ens = qubit_pair_ensemble()
rho0 = np.diag([1.0, 0.0]).astype(complex)
target = exact_propagator(ens.mean_generator(), T).apply(rho0)

print("M     average-channel error")
for M in (8, 32, 128, 512):
    A = average_channel_power(ens, "exact", T / M, M)
    print(f"{M:<5d} {trace_distance(A.apply(rho0), target):.3e}")

# the weighted norm needs a full-rank reference state; use a thermal qubit
ctx = GibbsContext.from_hamiltonian(spin_chain_hamiltonian("tfim", 1, h=-0.5), 1.0)
print("\nM     mean squared weighted error of 200 trajectories")
for M in (16, 64, 256):
    finals = trajectory_finals(ens, "exact", T / M, M, rho0, 200, seed=1)
    err = np.mean([weighted_l2_norm(f - target, ctx) ** 2 for f in finals])
    print(f"{M:<5d} {err:.3e}")
