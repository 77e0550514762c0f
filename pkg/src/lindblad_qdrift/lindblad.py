"""GKSL generators, their superoperator matrices and exact propagators.

The dense exponential of the superoperator is the ground truth that every
randomized approximation is measured against.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import linalg
from .errors import DimensionError, InputError, StateInvariantError
from .linalg import dagger, devectorize, vectorize


@dataclass(frozen=True)
class Lindbladian:
    """``L(rho) = -i[H, rho] + sum_j (V_j rho V_j^+ - {V_j^+ V_j, rho}/2)``."""

    H: np.ndarray
    jumps: Sequence[np.ndarray] = field(default_factory=tuple)

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise DimensionError("H must be square")
        if np.linalg.norm(H - dagger(H)) > 1e-10 * max(np.linalg.norm(H), 1.0):
            raise InputError("H is not Hermitian")
        jumps = tuple(np.asarray(V, dtype=complex) for V in self.jumps)
        for V in jumps:
            if V.shape != H.shape:
                raise DimensionError(
                    f"jump of shape {V.shape} does not match H of shape {H.shape}")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "jumps", jumps)

    @property
    def dim(self) -> int:
        return self.H.shape[0]


@dataclass(frozen=True)
class Superoperator:
    """An ``N^2 x N^2`` matrix acting on column-stacked ``N x N`` operators."""

    matrix: np.ndarray
    dim: int
    is_channel: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.dim**2, self.dim**2):
            raise DimensionError(
                f"superoperator of shape {m.shape} does not match dim {self.dim}")
        object.__setattr__(self, "matrix", m)

    def apply(self, X):
        X = np.asarray(X)
        if X.shape != (self.dim, self.dim):
            raise DimensionError("operand does not match superoperator dimension")
        return devectorize(self.matrix @ vectorize(X))

    def __call__(self, X):
        return self.apply(X)

    def compose(self, other: "Superoperator") -> "Superoperator":
        """``self`` after ``other``."""
        if other.dim != self.dim:
            raise DimensionError("dimension mismatch in composition")
        return Superoperator(self.matrix @ other.matrix, self.dim,
                             self.is_channel and other.is_channel)

    def power(self, m: int) -> "Superoperator":
        return Superoperator(np.linalg.matrix_power(self.matrix, m), self.dim,
                             self.is_channel)

    @classmethod
    def identity(cls, dim: int) -> "Superoperator":
        return cls(np.eye(dim * dim, dtype=complex), dim, True)


class CPTPReport(NamedTuple):
    trace_defect: float
    min_choi_eigenvalue: float


def check_density_matrix(rho, herm_tol=1e-10, eig_tol=1e-10, trace_tol=1e-10):
    """Raise :class:`StateInvariantError` unless ``rho`` is a valid state."""
    rho = np.asarray(rho)
    defect = np.max(np.abs(rho - dagger(rho)))
    if defect > herm_tol:
        raise StateInvariantError(f"state is not Hermitian (defect {defect:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise StateInvariantError(f"state trace is {tr!r}")
    lo = np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))[0]
    if lo < -eig_tol:
        raise StateInvariantError(f"state has eigenvalue {lo:.3e}")
    return rho


def apply_generator(L: Lindbladian, rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != L.H.shape:
        raise DimensionError("state does not match Lindbladian dimension")
    out = -1j * (L.H @ rho - rho @ L.H)
    for V in L.jumps:
        VdV = dagger(V) @ V
        out += V @ rho @ dagger(V) - 0.5 * (VdV @ rho + rho @ VdV)
    return out


def hamiltonian_superop(H):
    n = H.shape[0]
    eye = np.eye(n)
    return -1j * (np.kron(eye, H) - np.kron(H.T, eye))


def dissipator_superop(V):
    n = V.shape[0]
    eye = np.eye(n)
    VdV = dagger(V) @ V
    return (np.kron(V.conj(), V) - 0.5 * np.kron(eye, VdV)
            - 0.5 * np.kron(VdV.T, eye))


def conjugation_superop(U):
    """Superoperator of ``X -> U X U^+``."""
    return np.kron(U.conj(), U)


def to_superoperator(L: Lindbladian) -> Superoperator:
    m = hamiltonian_superop(L.H)
    for V in L.jumps:
        m = m + dissipator_superop(V)
    return Superoperator(m, L.dim)


def _as_superop(L) -> Superoperator:
    if isinstance(L, Superoperator):
        return L
    return to_superoperator(L)


def exact_propagator(L, t: float, debug: bool = False) -> Superoperator:
    """``exp(t L)`` for a :class:`Lindbladian` or generator :class:`Superoperator`."""
    if t < 0:
        raise InputError("propagation time must be non-negative")
    gen = _as_superop(L)
    S = Superoperator(linalg.expm(t * gen.matrix), gen.dim, True)
    if debug:
        rep = check_cptp(S)
        if rep.trace_defect > 1e-10 or rep.min_choi_eigenvalue < -1e-9:
            raise StateInvariantError(f"propagator is not CPTP: {rep}")
    return S


def choi_matrix(S: Superoperator, normalized: bool = True):
    """Choi matrix ``sum_ij |i><j| kron S(|i><j|)``, divided by N if normalized."""
    n = S.dim
    # S[(c_out, r_out), (j, i)] -> C[(i, r_out), (j, c_out)]
    T = S.matrix.reshape(n, n, n, n)
    C = T.transpose(3, 1, 2, 0).reshape(n * n, n * n)
    return C / n if normalized else C


def check_cptp(S: Superoperator) -> CPTPReport:
    n = S.dim
    vec_i = vectorize(np.eye(n, dtype=complex))
    row = vec_i.conj() @ S.matrix
    defect = float(np.max(np.abs(row - vec_i.conj())))
    C = choi_matrix(S)
    lo = float(np.linalg.eigvalsh(0.5 * (C + dagger(C)))[0])
    return CPTPReport(defect, lo)


def transpose_superop(n: int) -> Superoperator:
    """The (positive but not completely positive) transpose map."""
    m = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            m[i * n + j, j * n + i] = 1.0
    return Superoperator(m, n)
