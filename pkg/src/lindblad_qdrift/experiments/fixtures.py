"""Systems, ensembles and states built from an :class:`ExperimentConfig`."""
from __future__ import annotations

import numpy as np

from .. import davies
from ..errors import ConfigError
from ..hamiltonians import pauli_string_hamiltonian, spin_chain_hamiltonian
from ..linalg import PAULI, random_pure_state
from ..qdrift import DiscreteEnsemble, LindbladTerm, SamplerEnsemble, derive_rng

# first spawn key of every derived stream, one per purpose
SYSTEM, ENSEMBLE, PROBE, TRAJECTORY, MONTE_CARLO, CALIBRATION = range(6)


def qubit_pair_ensemble(gain=float(np.exp(-0.5))):
    """Two equally weighted single-qubit terms with non-commuting pieces.

    ``(X/2, |0><1|)`` decays towards ``|0>``; ``(Y/2, gain |1><0|)`` pumps back
    towards ``|1>``. Bound ``lambda = 1``.
    """
    s01 = np.array([[0, 1], [0, 0]], dtype=complex)
    terms = [LindbladTerm(0.5 * PAULI["X"], s01),
             LindbladTerm(0.5 * PAULI["Y"], gain * s01.T)]
    return DiscreteEnsemble(terms, np.array([0.5, 0.5]), lam=max(1.0, gain**2))


def build_system(cfg):
    s = cfg.system
    kind = s["kind"]
    try:
        if kind in ("tfim", "heisenberg"):
            return spin_chain_hamiltonian(kind, int(s["n"]), s.get("J", 1.0),
                                          s.get("g", 0.0), s.get("h", 0.0))
        if kind == "pauli-strings":
            H, _ = pauli_string_hamiltonian(int(s["n"]), int(s["m"]), derive_rng(cfg.seed, SYSTEM))
            return H
        return np.diag(np.asarray(s["values"], dtype=complex))
    except KeyError as exc:
        raise ConfigError(f"system {kind!r} needs {exc}") from exc


def weight_function(cfg, beta=None):
    kind = cfg.ensemble.get("weight", "metropolis")
    return davies.WeightFunction(kind, cfg.beta if beta is None else beta)


def sign_method(cfg):
    try:
        return davies.SignMethod(cfg.ensemble.get("sign_method", "haar-signs"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_ensemble(cfg, eig):
    e = cfg.ensemble
    kind = e["kind"]
    if kind == "qubit-pair":
        ens = qubit_pair_ensemble(e.get("gain", float(np.exp(-0.5))))
    elif kind == "twirled-davies":
        ens = davies.twirled_davies_ensemble(eig, weight_function(cfg),
                                             derive_rng(cfg.seed, ENSEMBLE),
                                             n_base=int(e.get("n_base", 8)),
                                             method=sign_method(cfg))
        ens.lam = max(t.norm_bound() for t in ens.terms)
    else:
        sampler = davies.RandomJumpSampler(eig, weight_function(cfg), sign_method(cfg))
        ens = SamplerEnsemble(sampler.draw, eig.dim, "random Davies jump sampler")
    if "lam" in e:
        ens.lam = float(e["lam"])
    if "Lambda" in e:
        ens.Lam = float(e["Lambda"])
    return ens


def make_state(name, n, rng=None, ctx=None):
    if name == "mixed":
        return np.eye(n, dtype=complex) / n
    if name == "basis0":
        rho = np.zeros((n, n), dtype=complex)
        rho[0, 0] = 1.0
        return rho
    if name == "gibbs":
        if ctx is None:
            raise ConfigError("the Gibbs state needs a beta and a system")
        return ctx.sigma.astype(complex)
    return random_pure_state(n, rng)


def make_probes(cfg, n, ctx=None):
    rng = derive_rng(cfg.seed, PROBE)
    return {p: make_state(p, n, rng, ctx) for p in cfg.probes}
