"""Random Davies generators built from a single randomly sampled jump.

A random Hermitian ``A = U D U^+`` (``U`` Haar, ``D`` random signs) is
filtered in the energy eigenbasis into ``K_ij = sqrt(gamma(l_i - l_j)) A_ij``.
The mean of the single-jump dissipators ``L_K`` is a Davies generator whose
populations follow a classical rate equation and whose coherences
``|psi_i><psi_j|`` are eigenvectors.

``gamma`` arguments are any vectorized callable of the Bohr frequency;
:class:`WeightFunction` provides the two KMS-consistent choices.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import expit

from .errors import InputError
from .linalg import HermitianEigen, dagger, haar_unitary
from .lindblad import Superoperator, dissipator_superop

SpectrumLike = "HermitianEigen | np.ndarray"


def _values(eig) -> np.ndarray:
    if isinstance(eig, HermitianEigen):
        return np.asarray(eig.values, dtype=float)
    return np.sort(np.asarray(eig, dtype=float))


def _vectors(eig) -> np.ndarray:
    if isinstance(eig, HermitianEigen):
        return eig.vectors
    return np.eye(len(eig), dtype=complex)


@dataclass(frozen=True)
class WeightFunction:
    """Transition weight ``gamma(omega)`` obeying ``gamma(w) = exp(-beta w) gamma(-w)``."""

    kind: str
    beta: float

    def __post_init__(self):
        if self.kind not in ("metropolis", "glauber"):
            raise InputError(f"unknown weight kind {self.kind!r}")
        if self.beta < 0:
            raise InputError("beta must be non-negative")

    def __call__(self, omega):
        x = self.beta * np.asarray(omega, dtype=float)
        if self.kind == "metropolis":
            return np.exp(-np.maximum(x, 0.0))
        return expit(-x)


def metropolis(beta):
    return WeightFunction("metropolis", beta)


def glauber(beta):
    return WeightFunction("glauber", beta)


class SignMethod(enum.Enum):
    """How the random sign matrix ``D`` in ``A = U D U^+`` is drawn."""

    HAAR_CONJUGATED_SIGNS = "haar-signs"  # iid +-1 on every diagonal entry
    PER_QUBIT_PHASE_SIGNS = "per-qubit"   # kron_k diag(1, eps_k)


def random_signs(n, method: SignMethod, rng):
    if method is SignMethod.HAAR_CONJUGATED_SIGNS:
        return rng.choice([-1.0, 1.0], size=n)
    n_qubits = int(round(np.log2(n)))
    if 2**n_qubits != n:
        raise InputError("per-qubit signs need a power-of-two dimension")
    d = np.ones(1)
    for eps in rng.choice([-1.0, 1.0], size=n_qubits):
        d = np.kron(d, [1.0, eps])
    return d


def bohr_weights(values, gamma):
    """Matrix ``W_ij = gamma(l_i - l_j)``."""
    return np.asarray(gamma(values[:, None] - values[None, :]), dtype=float)


def build_jump_K(A, eig, gamma):
    """Energy-filtered jump ``K = sum_ij sqrt(gamma(l_i - l_j)) |i><i|A|j><j|``."""
    vals, vecs = _values(eig), _vectors(eig)
    A_eig = dagger(vecs) @ A @ vecs
    K_eig = np.sqrt(bohr_weights(vals, gamma)) * A_eig
    return vecs @ K_eig @ dagger(vecs)


@dataclass
class RandomJumpSampler:
    """Draws single-jump terms ``(H=0, V=K(A))`` of the random Davies ensemble."""

    eig: HermitianEigen
    gamma: Callable
    method: SignMethod = SignMethod.HAAR_CONJUGATED_SIGNS
    sigma2_empirical: float | None = None

    @property
    def dim(self):
        return self.eig.dim

    def sample_A(self, rng):
        return sample_A(self, rng)

    def draw(self, rng):
        from .qdrift import LindbladTerm
        K = build_jump_K(sample_A(self, rng), self.eig, self.gamma)
        return LindbladTerm(np.zeros((self.dim, self.dim), dtype=complex), K)

    def calibrate(self, rng, n_samples=2000):
        """Estimate ``E|A_ij|^2`` (i != j) in the energy eigenbasis."""
        if n_samples < 1000:
            raise InputError("calibration needs at least 1000 samples")
        n = self.dim
        off = ~np.eye(n, dtype=bool)
        acc = 0.0
        V = self.eig.vectors
        for _ in range(n_samples):
            A = dagger(V) @ sample_A(self, rng) @ V
            acc += np.mean(np.abs(A[off]) ** 2)
        self.sigma2_empirical = acc / n_samples
        return self.sigma2_empirical


def sample_A(sampler: RandomJumpSampler, rng):
    """Hermitian involution ``U D U^+`` with ``U`` Haar and ``D`` random signs."""
    n = sampler.dim
    U = haar_unitary(n, rng)
    d = random_signs(n, sampler.method, rng)
    A = (U * d) @ dagger(U)
    return 0.5 * (A + dagger(A))


def haar_sigma2(n):
    """Exact ``E|A_ij|^2 = 1/(N+1)`` for Haar-conjugated random signs."""
    return 1.0 / (n + 1)


def pauli_master_matrix(eig, gamma, sigma2):
    """Rate matrix ``Q`` of the population dynamics: ``dp/dt = Q p``.

    ``Q[k, i] = sigma2 * gamma(l_k - l_i)`` is the rate ``i -> k``; columns sum to 0.
    """
    vals = _values(eig)
    Q = sigma2 * bohr_weights(vals, gamma)
    np.fill_diagonal(Q, 0.0)
    Q[np.diag_indices_from(Q)] = -Q.sum(axis=0)
    return Q


def _decay_sums(vals, gamma, include_diagonal):
    W = bohr_weights(vals, gamma)  # W[k, i] = gamma(l_k - l_i)
    s = W.sum(axis=0)
    if not include_diagonal:
        s = s - np.diag(W)
    return s


def coherence_decay_rate(i, j, eig, gamma, sigma2, include_diagonal=True):
    """Decay rate of the coherence ``<psi_i|rho|psi_j>`` under the mean generator."""
    if i == j:
        raise InputError("coherence rate needs i != j")
    s = _decay_sums(_values(eig), gamma, include_diagonal)
    return 0.5 * sigma2 * (s[i] + s[j])


def coherence_rate_matrix(eig, gamma, sigma2, include_diagonal=True):
    """All rates ``R[i, j]`` at once; the diagonal is set to 0."""
    s = _decay_sums(_values(eig), gamma, include_diagonal)
    R = 0.5 * sigma2 * (s[:, None] + s[None, :])
    np.fill_diagonal(R, 0.0)
    return R


def analytic_davies(eig, gamma, sigma2, include_diagonal=True) -> Superoperator:
    """Mean generator assembled from its block structure, in the computational basis.

    ``include_diagonal=False`` drops the ``k = i, j`` terms from the coherence
    sums, the variant obtained by restricting the second moment to ``i != j``.
    """
    if sigma2 <= 0:
        raise InputError("sigma2 must be positive")
    vals, vecs = _values(eig), _vectors(eig)
    n = len(vals)
    R = coherence_rate_matrix(vals, gamma, sigma2, include_diagonal)
    # vec index j*n + i  <->  |i><j|
    S = np.diag(-R.T.reshape(-1)).astype(complex)
    Q = pauli_master_matrix(vals, gamma, sigma2)
    diag_idx = np.arange(n) * (n + 1)
    S[np.ix_(diag_idx, diag_idx)] = Q
    B = np.kron(vecs.conj(), vecs)
    return Superoperator(B @ S @ dagger(B), n)


class ClassicalChain(NamedTuple):
    transition: np.ndarray
    pi: np.ndarray


def gibbs_distribution(vals, beta):
    w = np.exp(-beta * (vals - vals.min()))
    return w / w.sum()


def mh_chain(eig, beta) -> ClassicalChain:
    """Metropolis chain ``p_ij = min(1, exp(-beta(l_j - l_i))) / (2N)`` on the spectrum."""
    vals = _values(eig)
    n = len(vals)
    P = np.exp(-np.maximum(beta * (vals[None, :] - vals[:, None]), 0.0)) / (2 * n)
    np.fill_diagonal(P, 0.0)
    P[np.diag_indices_from(P)] = 1.0 - P.sum(axis=1)
    return ClassicalChain(P, gibbs_distribution(vals, beta))


def reversibility_residual(chain: ClassicalChain) -> float:
    F = chain.pi[:, None] * chain.transition
    return float(np.max(np.abs(F - F.T)))


def chain_gap(chain: ClassicalChain) -> float:
    """``1 - lambda_2`` of a reversible transition matrix."""
    r = np.sqrt(chain.pi)
    sym = r[:, None] * chain.transition / r[None, :]
    ev = np.linalg.eigvalsh(0.5 * (sym + sym.T))
    return float(1.0 - ev[-2])


class GapBounds(NamedTuple):
    alpha: float
    min_ratio: float
    exact_chain_gap: float


def gap_bounds(eig, beta, sigma2=None) -> GapBounds:
    # sigma2 does not enter the discrete-time chain; kept for a uniform signature
    vals = _values(eig)
    n = len(vals)
    alpha = float(np.mean(np.exp(-beta * (vals - vals[0]))))
    chain = mh_chain(vals, beta)
    ratio = chain.transition / chain.pi[None, :]
    off = ~np.eye(n, dtype=bool)
    min_ratio = float(ratio[off].min()) if n > 1 else float("inf")
    return GapBounds(alpha, min_ratio, chain_gap(chain))


def _stationary(Q, vals, beta):
    """Stationary vector of ``Q``: the Gibbs one when it balances, else the null vector."""
    pi = gibbs_distribution(vals, beta)
    F = Q * pi[None, :]
    if np.max(np.abs(F - F.T)) <= 1e-12 * max(np.max(np.abs(F)), 1e-300):
        return pi
    n = len(vals)
    M = np.vstack([Q, np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return np.clip(pi, 1e-300, None) / np.clip(pi, 1e-300, None).sum()


def classical_generator_gap(Q, pi) -> float:
    """Second-smallest eigenvalue of ``-Q`` for a rate matrix reversible w.r.t. ``pi``."""
    r = np.sqrt(pi)
    sym = Q * r[None, :] / r[:, None]
    ev = np.linalg.eigvalsh(-0.5 * (sym + sym.T))
    return float(ev[1])


class DaviesGapCertificate(NamedTuple):
    exact_gap: float
    lower_bound: float
    low_energy_fraction: float
    classical_gap: float
    min_coherence_rate: float


def block_gap(eig, beta, gamma, sigma2, include_diagonal=True):
    """Spectral gap of the mean generator from its block structure.

    Needs only an ``N``-dimensional eigenproblem and the ``N^2`` coherence rates.
    """
    vals = _values(eig)
    Q = pauli_master_matrix(vals, gamma, sigma2)
    cg = classical_generator_gap(Q, _stationary(Q, vals, beta))
    s = _decay_sums(vals, gamma, include_diagonal)
    two = np.sort(s)[:2]
    min_rate = float(0.5 * sigma2 * two.sum())
    return min(cg, min_rate), cg, min_rate


def davies_gap_certificate(eig, beta, gamma=None, sigma2=None) -> DaviesGapCertificate:
    """Exact gap (block path) versus the ``alpha`` lower bound, ``sigma2 = 1/N`` by default."""
    from .hamiltonians import low_energy_fraction
    vals = _values(eig)
    n = len(vals)
    if gamma is None:
        gamma = metropolis(beta)
    if sigma2 is None:
        sigma2 = 1.0 / n
    gap, cg, rate = block_gap(vals, beta, gamma, sigma2)
    alpha = float(np.mean(np.exp(-beta * (vals - vals[0]))))
    return DaviesGapCertificate(gap, alpha, low_energy_fraction(vals, beta), cg, rate)


def _phase_vectors(n):
    """Diagonal phase patterns ``(1, w^a_2, ..., w^a_n)``, ``w = exp(2 pi i / 3)``."""
    w = np.exp(2j * np.pi / 3)
    for exps in itertools.product(range(3), repeat=n - 1):
        yield w ** np.array((0,) + exps)


def twirled_davies_ensemble(eig, gamma, rng, n_base=8,
                            method=SignMethod.HAAR_CONJUGATED_SIGNS, lam=None):
    """Finite single-jump ensemble whose mean generator is exactly detailed balanced.

    Each sampled ``A`` is conjugated by every diagonal cube-root phase in the
    energy eigenbasis. That averaging kills every second moment
    ``E A_ij A_kl`` except ``(i, j) = (l, k)`` and ``i = j, k = l``, which is
    all the Davies structure needs. The ensemble has ``n_base * 3**(N-1)``
    equally weighted terms.
    """
    from .qdrift import DiscreteEnsemble, LindbladTerm
    n = eig.dim
    sampler = RandomJumpSampler(eig, gamma, method)
    V = eig.vectors
    zero = np.zeros((n, n), dtype=complex)
    phases = list(_phase_vectors(n))
    terms = []
    for _ in range(n_base):
        A_eig = dagger(V) @ sample_A(sampler, rng) @ V
        for ph in phases:
            A = V @ (ph[:, None] * A_eig * ph.conj()[None, :]) @ dagger(V)
            terms.append(LindbladTerm(zero, build_jump_K(A, eig, gamma)))
    weights = np.full(len(terms), 1.0 / len(terms))
    return DiscreteEnsemble(terms, weights, lam=lam)


def sampled_mean_generator(sampler: RandomJumpSampler, n_samples, rng):
    """Monte Carlo mean of ``L_K`` over ``n_samples`` sampled jumps."""
    acc = np.zeros((sampler.dim**2,) * 2, dtype=complex)
    for _ in range(n_samples):
        acc += dissipator_superop(sampler.draw(rng).V)
    return Superoperator(acc / n_samples, sampler.dim)
