"""Dense complex linear algebra used by every other module.

Vectorization is column stacking throughout the package::

    vec(|i><j|) = e_{j*N + i},    vec(A X B) = (B^T kron A) vec(X)

The ancilla of a dilated system is always the first (slowest) tensor factor.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import DimensionError, InputError

MAX_ENTRIES = 2**26

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class HermitianEigen(NamedTuple):
    """Eigendecomposition ``H = vectors @ diag(values) @ vectors^dagger``."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.values)


def _square(A, name="matrix"):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")
    return A


def dagger(A):
    return np.conj(np.swapaxes(A, -1, -2))


def kron(A, B, max_entries=MAX_ENTRIES):
    """Kronecker product with a cap on the number of output entries."""
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    n_out = A.shape[0] * B.shape[0] * A.shape[1] * B.shape[1]
    if n_out > max_entries:
        raise DimensionError(
            f"kron output would have {n_out} entries (cap {max_entries})")
    return np.kron(A, B)


def kron_all(*mats, max_entries=MAX_ENTRIES):
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = kron(out, m, max_entries=max_entries)
    return out


def partial_trace_ancilla(M):
    """Trace out a leading qubit: ``Tr_a M = M[:N, :N] + M[N:, N:]``."""
    M = _square(M)
    d = M.shape[0]
    if d % 2:
        raise DimensionError(f"dimension {d} is odd; no leading qubit to trace")
    n = d // 2
    return M[:n, :n] + M[n:, n:]


def herm_eig(H, tol=1e-10) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix with a reproducible gauge.

    Eigenvalues ascend. Each eigenvector is rotated so that its first entry
    of non-negligible magnitude is real and positive.
    """
    H = _square(H)
    scale = np.linalg.norm(H)
    if np.linalg.norm(H - dagger(H)) > tol * max(scale, 1.0):
        raise InputError("matrix is not Hermitian within tolerance")
    H = 0.5 * (H + dagger(H))
    if scale == 0.0:
        n = H.shape[0]
        return HermitianEigen(np.zeros(n), np.eye(n, dtype=complex))
    values, vectors = np.linalg.eigh(H)
    vectors = np.array(vectors, dtype=complex)
    mags = np.abs(vectors)
    first = np.argmax(mags > 1e-8, axis=0)
    cols = np.arange(vectors.shape[1])
    pivot = vectors[first, cols]
    vectors *= np.conj(pivot) / np.abs(pivot)
    return HermitianEigen(values, vectors)


def expm(A):
    """Matrix exponential (Pade scaling-and-squaring)."""
    return scipy.linalg.expm(_square(A))


def haar_unitary(n, rng):
    """Haar-random ``n x n`` unitary from the QR decomposition of a Ginibre matrix.

    The phases of ``diag(R)`` are moved into ``Q`` so the result is exactly
    Haar distributed rather than biased by the QR sign convention.
    """
    if n < 1:
        raise InputError("dimension must be >= 1")
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def vectorize(X):
    X = _square(X)
    return X.reshape(-1, order="F")


def devectorize(v):
    v = np.asarray(v).reshape(-1)
    n = int(round(np.sqrt(v.size)))
    if n * n != v.size:
        raise DimensionError(f"length {v.size} is not a perfect square")
    return v.reshape((n, n), order="F")


def random_density_matrix(n, rng, rank=None):
    """Random state ``G G^dagger / Tr`` from a complex Ginibre ``G``."""
    k = n if rank is None else rank
    g = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_pure_state(n, rng):
    psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_hermitian(n, rng, scale=1.0):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (g + dagger(g))
