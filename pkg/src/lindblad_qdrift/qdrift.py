"""Randomized single-term simulation of ensemble-averaged Lindblad dynamics.

An ensemble of single-jump terms ``L_a`` with measure ``mu`` defines the
target generator ``Lbar = E L_a``. One step of length ``tau`` applies
``F_tau(L_a)`` for one freshly sampled ``a``; ``F_tau`` is one of

* ``EXACT``    -- ``exp(tau L_a)``
* ``TROTTER``  -- ``exp(tau L_V) o Ad(exp(-i tau H_a))``
* ``DILATION`` -- ``Ad(exp(-i tau H_a))`` followed by the one-ancilla
  dilation ``rho -> Tr_a[W (|0><0| x rho) W^+]``, ``W = exp(-i sqrt(tau) Vt)``,
  ``Vt = [[0, V^+], [V, 0]]``

Random streams are derived as ``SeedSequence(seed, spawn_key=keys)`` so any
trajectory can be regenerated independently of scheduling.
"""
from __future__ import annotations

import enum
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import linalg
from .errors import DimensionError, InputError, StateInvariantError
from .linalg import dagger, partial_trace_ancilla
from .lindblad import (Lindbladian, Superoperator, check_density_matrix,
                       conjugation_superop, dissipator_superop, hamiltonian_superop)


class StepAlgorithm(enum.Enum):
    EXACT = "exact"
    TROTTER = "trotter"
    DILATION = "dilation"


@dataclass(frozen=True, eq=False)
class LindbladTerm:
    """One Hamiltonian plus exactly one jump operator."""

    H: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex)
        V = np.asarray(self.V, dtype=complex)
        if H.shape != V.shape or H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise DimensionError("H and V must be square and of equal shape")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "V", V)

    @property
    def dim(self):
        return self.H.shape[0]

    def lindbladian(self) -> Lindbladian:
        return Lindbladian(self.H, (self.V,))

    def generator(self):
        return hamiltonian_superop(self.H) + dissipator_superop(self.V)

    def norm_bound(self) -> float:
        """``max(||H||, ||V||^2)`` in spectral norm."""
        return max(np.linalg.norm(self.H, 2), np.linalg.norm(self.V, 2) ** 2)


def weighted_norm_bound(term: LindbladTerm, ctx) -> float:
    """``max(||s H s^-1||, ||s V s^-1||^2, ||s V^+ s^-1||^2)`` with ``s = sigma^{1/4}``."""
    s, si = ctx.power(0.25), ctx.power(-0.25)
    return max(np.linalg.norm(s @ term.H @ si, 2),
               np.linalg.norm(s @ term.V @ si, 2) ** 2,
               np.linalg.norm(s @ dagger(term.V) @ si, 2) ** 2)


@dataclass
class DiscreteEnsemble:
    terms: Sequence[LindbladTerm]
    weights: np.ndarray
    lam: float | None = None
    Lam: float | None = None

    def __post_init__(self):
        if len(self.terms) == 0:
            raise InputError("ensemble is empty")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.terms),):
            raise InputError("one weight per term is required")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise InputError("weights must be a probability vector")
        self.weights = w
        dims = {t.dim for t in self.terms}
        if len(dims) != 1:
            raise DimensionError("all terms must share one dimension")
        if self.lam is not None:
            for i, t in enumerate(self.terms):
                if t.norm_bound() > self.lam * (1 + 1e-12):
                    raise InputError(
                        f"term {i} has norm bound {t.norm_bound():.4g} > lambda={self.lam}")
        self._cdf = np.cumsum(w)

    @property
    def dim(self):
        return self.terms[0].dim

    def mean_generator(self) -> Superoperator:
        m = sum(w * t.generator() for w, t in zip(self.weights, self.terms))
        return Superoperator(m, self.dim)


@dataclass
class SamplerEnsemble:
    draw: Callable[[np.random.Generator], LindbladTerm]
    dim: int
    description: str = ""
    lam: float | None = None
    Lam: float | None = None


Ensemble = "DiscreteEnsemble | SamplerEnsemble"


def derive_rng(seed, *keys) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))


def sample_indices(e: DiscreteEnsemble, rng, M):
    """``M`` iid term indices by inverse CDF; one uniform draw per index."""
    u = rng.random(int(M)) * e._cdf[-1]
    return np.minimum(np.searchsorted(e._cdf, u, side="right"), len(e.terms) - 1)


def sample_term(e, rng):
    """Draw one term; returns ``(term, index)`` with ``index=None`` for samplers."""
    if isinstance(e, DiscreteEnsemble):
        i = int(sample_indices(e, rng, 1)[0])
        return e.terms[i], i
    return e.draw(rng), None


def check_step_size(e, tau):
    if e.lam and tau > 0.5 / e.lam:
        warnings.warn(f"step tau={tau:.3g} exceeds 0.5/lambda = {0.5 / e.lam:.3g}",
                      RuntimeWarning, stacklevel=3)


def _check_tau(tau):
    if tau < 0:
        raise InputError("step size must be non-negative")


def dilation_unitary(V, tau):
    n = V.shape[0]
    Vt = np.zeros((2 * n, 2 * n), dtype=complex)
    Vt[:n, n:] = dagger(V)
    Vt[n:, :n] = V
    return linalg.expm(-1j * np.sqrt(tau) * Vt)


def step_exact(a: LindbladTerm, tau, rho):
    _check_tau(tau)
    return term_propagator(a, StepAlgorithm.EXACT, tau).apply(rho)


def step_trotter(a: LindbladTerm, tau, rho):
    _check_tau(tau)
    U = linalg.expm(-1j * tau * a.H)
    rho = U @ rho @ dagger(U)
    S_V = linalg.expm(tau * dissipator_superop(a.V))
    return Superoperator(S_V, a.dim).apply(rho)


def step_dilation(a: LindbladTerm, tau, rho):
    _check_tau(tau)
    n = a.dim
    U = linalg.expm(-1j * tau * a.H)
    rho = U @ rho @ dagger(U)
    W = dilation_unitary(a.V, tau)
    big = np.zeros((2 * n, 2 * n), dtype=complex)
    big[:n, :n] = rho
    return partial_trace_ancilla(W @ big @ dagger(W))


def term_propagator(a: LindbladTerm, alg: StepAlgorithm, tau) -> Superoperator:
    """Superoperator of ``F_tau(L_a)``."""
    _check_tau(tau)
    alg = StepAlgorithm(alg)
    if alg is StepAlgorithm.EXACT:
        m = linalg.expm(tau * a.generator())
    else:
        S_U = conjugation_superop(linalg.expm(-1j * tau * a.H))
        if alg is StepAlgorithm.TROTTER:
            S_V = linalg.expm(tau * dissipator_superop(a.V))
        else:
            n = a.dim
            W = dilation_unitary(a.V, tau)
            K0, K1 = W[:n, :n], W[n:, :n]
            S_V = np.kron(K0.conj(), K0) + np.kron(K1.conj(), K1)
        m = S_V @ S_U
    return Superoperator(m, a.dim, True)


def average_step_superop(e, alg, tau) -> Superoperator:
    """``E_mu F_tau(L_a)`` for a discrete ensemble."""
    if not isinstance(e, DiscreteEnsemble):
        raise InputError("average channel needs a discrete ensemble; use mc_average_channel")
    check_step_size(e, tau)
    m = sum(w * term_propagator(t, alg, tau).matrix
            for w, t in zip(e.weights, e.terms) if w > 0)
    return Superoperator(m, e.dim, True)


def average_channel_power(e, alg, tau, M) -> Superoperator:
    return average_step_superop(e, alg, tau).power(int(M))


@dataclass
class TrajectoryRecord:
    seed: int
    trajectory_id: int
    samples: list
    final: np.ndarray
    states: list = field(default_factory=list)


def propagator_stack(e: DiscreteEnsemble, alg, tau):
    """All per-term propagators as one ``(K, N^2, N^2)`` array."""
    return np.stack([term_propagator(t, alg, tau).matrix for t in e.terms])


def _check_final(rho, tol, where):
    try:
        check_density_matrix(rho, tol, tol, tol)
    except StateInvariantError as exc:
        raise StateInvariantError(f"{where} left the state space: {exc}") from exc


def run_trajectory(e, alg, tau, M, rho0, seed, snapshot_every=0, trajectory_id=0,
                   keys=(), stack=None, check_tol=1e-6) -> TrajectoryRecord:
    """Apply ``M`` independently sampled steps to ``rho0``.

    The stream is ``derive_rng(seed, *keys, trajectory_id)``. ``states`` holds
    the initial state and every ``snapshot_every``-th state when that is positive.
    """
    if M < 0:
        raise InputError("number of steps must be non-negative")
    _check_tau(tau)
    check_step_size(e, tau)
    rng = derive_rng(seed, *keys, trajectory_id)
    v = linalg.vectorize(np.asarray(rho0, dtype=complex)).copy()
    states = [linalg.devectorize(v).copy()] if snapshot_every else []
    if isinstance(e, DiscreteEnsemble):
        if stack is None:
            stack = propagator_stack(e, alg, tau)
        samples = sample_indices(e, rng, M).tolist()
        steps = (stack[i] for i in samples)
    else:
        samples = [e.draw(rng) for _ in range(int(M))]
        steps = (term_propagator(a, alg, tau).matrix for a in samples)
    for m, P in enumerate(steps, start=1):
        v = P @ v
        if snapshot_every and m % snapshot_every == 0:
            states.append(linalg.devectorize(v).copy())
    final = linalg.devectorize(v)
    _check_final(final, check_tol, f"trajectory {trajectory_id} (seed {seed}, {M} steps, tau={tau})")
    return TrajectoryRecord(int(seed), int(trajectory_id), samples, final, states)


def _chunks(n, workers):
    k = max(1, min(int(workers), n))
    bounds = np.linspace(0, n, k + 1).astype(int)
    return [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _map_ordered(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def batch_trajectories(e: DiscreteEnsemble, alg, tau, M, rho0, n_traj, seed, keys=(),
                       observe=None, workers=1, stack=None, check_tol=1e-6):
    """Propagate trajectories ``0..n_traj-1`` of a discrete ensemble together.

    Each trajectory uses the same stream and index sequence as
    :func:`run_trajectory`. ``observe(V)`` is called on the ``(B, N^2)`` block
    of vectorized states after every step and its outputs are stacked along
    the step axis. Returns ``(finals, observations)`` in trajectory order,
    independent of ``workers``.
    """
    if not isinstance(e, DiscreteEnsemble):
        raise InputError("batched propagation needs a discrete ensemble")
    if n_traj < 1:
        raise InputError("need at least one trajectory")
    _check_tau(tau)
    check_step_size(e, tau)
    if stack is None:
        stack = propagator_stack(e, alg, tau)
    v0 = linalg.vectorize(np.asarray(rho0, dtype=complex))

    def chunk(ids):
        idx = np.stack([sample_indices(e, derive_rng(seed, *keys, k), M) for k in ids])
        V = np.repeat(v0[None, :, None], len(ids), axis=0)
        obs = []
        for m in range(int(M)):
            V = np.matmul(stack[idx[:, m]], V)
            if observe is not None:
                obs.append(observe(V[:, :, 0]))
        return V[:, :, 0], (np.stack(obs, axis=1) if obs else None)

    parts = _map_ordered(chunk, _chunks(n_traj, workers), workers)
    finals = np.stack([linalg.devectorize(f.reshape(-1)) for f in
                       np.concatenate([p[0] for p in parts])])
    for k, rho in enumerate(finals):
        _check_final(rho, check_tol, f"trajectory {k} (seed {seed}, {M} steps, tau={tau})")
    obs = np.concatenate([p[1] for p in parts]) if observe is not None else None
    return finals, obs


def run_trajectories(e, alg, tau, M, rho0, n_traj, seed, keys=(), workers=1,
                     snapshot_every=0):
    """Full :class:`TrajectoryRecord` objects for trajectories ``0..n_traj-1``."""
    stack = propagator_stack(e, alg, tau) if isinstance(e, DiscreteEnsemble) else None
    return _map_ordered(
        lambda k: run_trajectory(e, alg, tau, M, rho0, seed, snapshot_every=snapshot_every,
                                 trajectory_id=k, keys=keys, stack=stack),
        list(range(n_traj)), workers)


def trajectory_finals(e, alg, tau, M, rho0, n_traj, seed, keys=(), workers=1):
    """Final states ``(n_traj, N, N)``, batched when the ensemble is discrete."""
    if isinstance(e, DiscreteEnsemble):
        return batch_trajectories(e, alg, tau, M, rho0, n_traj, seed, keys, workers=workers)[0]
    return np.array([r.final for r in run_trajectories(e, alg, tau, M, rho0, n_traj, seed,
                                                       keys, workers)])


class MCAverage(NamedTuple):
    mean: np.ndarray
    stderr: np.ndarray
    n_traj: int


def mc_average_channel(e, alg, tau, M, rho0, n_traj, seed, keys=(), workers=1) -> MCAverage:
    """Trajectory estimate of the average channel applied to ``rho0``.

    ``stderr`` is the entrywise standard error ``|std| / sqrt(n)`` of the mean,
    computed separately for real and imaginary parts.
    """
    if n_traj < 2:
        raise InputError("need at least two trajectories for a standard error")
    finals = trajectory_finals(e, alg, tau, M, rho0, n_traj, seed, keys, workers)
    mean = finals.mean(axis=0)
    se = (np.sqrt(finals.real.var(axis=0, ddof=1) / n_traj)
          + 1j * np.sqrt(finals.imag.var(axis=0, ddof=1) / n_traj))
    return MCAverage(mean, se, n_traj)
