"""Test Hamiltonians and spectral-density diagnostics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DimensionError, InputError
from .linalg import PAULI, kron_all

MAX_QUBITS = 12


@dataclass(frozen=True)
class PauliString:
    """Signed tensor product of single-qubit Paulis; letter 0 acts on the leading qubit."""

    letters: str
    sign: int = 1

    def __post_init__(self):
        if set(self.letters) - set("IXYZ"):
            raise InputError(f"invalid Pauli letters {self.letters!r}")
        if self.sign not in (1, -1):
            raise InputError("sign must be +1 or -1")

    @property
    def n(self):
        return len(self.letters)

    def masks(self):
        """Bit-flip mask, phase mask and number of Y factors."""
        x = z = 0
        for letter in self.letters:
            x, z = x << 1, z << 1
            if letter in "XY":
                x |= 1
            if letter in "ZY":
                z |= 1
        return x, z, self.letters.count("Y")

    def dense(self):
        return self.sign * kron_all(*(PAULI[c] for c in self.letters))


def _parity(a):
    """Bit parity of each entry of an integer array."""
    a = a.copy()
    p = np.zeros_like(a)
    while np.any(a):
        p ^= a & 1
        a >>= 1
    return p


def add_pauli_string(H, ps: PauliString, coeff):
    """In place ``H += coeff * ps`` without forming the Kronecker product.

    A Pauli string maps basis state ``c`` to ``c ^ x`` with phase
    ``i^{#Y} (-1)^{popcount(c & z)}``.
    """
    x, z, ny = ps.masks()
    cols = np.arange(H.shape[0])
    phase = (1j) ** ny * (1 - 2 * _parity(cols & z))
    H[cols ^ x, cols] += coeff * ps.sign * phase
    return H


def _check_qubits(n):
    if n < 1 or n > MAX_QUBITS:
        raise DimensionError(f"n = {n} outside the dense range 1..{MAX_QUBITS}")


def pauli_string_hamiltonian(n, m, rng):
    """``H = sum_j r_j sigma_j / sqrt(m)`` with iid random Pauli strings and signs.

    Returns the dense matrix and the list of sampled :class:`PauliString`.
    """
    _check_qubits(n)
    if m < 1:
        raise InputError("need at least one Pauli string")
    letters = np.array(list("IXYZ"))
    codes = rng.integers(0, 4, size=(m, n))
    signs = rng.choice([-1, 1], size=m)
    strings = [PauliString("".join(letters[row]), int(s)) for row, s in zip(codes, signs)]
    H = np.zeros((2**n, 2**n), dtype=complex)
    for ps in strings:
        add_pauli_string(H, ps, 1.0 / np.sqrt(m))
    return H, strings


def hamiltonian_from_strings(n, strings, coeffs):
    H = np.zeros((2**n, 2**n), dtype=complex)
    for ps, c in zip(strings, coeffs):
        add_pauli_string(H, ps, c)
    return H


def _site_string(n, ops):
    letters = ["I"] * n
    for site, op in ops.items():
        letters[site] = op
    return PauliString("".join(letters))


def spin_chain_hamiltonian(kind, n, J=1.0, g=0.0, h=0.0):
    """Open-boundary nearest-neighbour chains.

    ``tfim``:       ``J sum Z_k Z_{k+1} + g sum X_k + h sum Z_k``
    ``heisenberg``: ``J sum (X X + Y Y + Z Z)_{k,k+1} + h sum Z_k``
    """
    _check_qubits(n)
    H = np.zeros((2**n, 2**n), dtype=complex)
    kind = kind.lower()
    if kind == "tfim":
        for k in range(n - 1):
            add_pauli_string(H, _site_string(n, {k: "Z", k + 1: "Z"}), J)
        for k in range(n):
            add_pauli_string(H, _site_string(n, {k: "X"}), g)
            add_pauli_string(H, _site_string(n, {k: "Z"}), h)
    elif kind == "heisenberg":
        for k in range(n - 1):
            for op in "XYZ":
                add_pauli_string(H, _site_string(n, {k: op, k + 1: op}), J)
        for k in range(n):
            add_pauli_string(H, _site_string(n, {k: "Z"}), h)
    else:
        raise InputError(f"unknown spin chain {kind!r}")
    return H


def spectral_cdf(values):
    """Empirical CDF ``F(x) = #{l_i <= x} / N`` as a vectorized callable."""
    v = np.sort(np.asarray(values, dtype=float))

    def cdf(x):
        return np.searchsorted(v, np.asarray(x, dtype=float), side="right") / v.size

    cdf.values = v
    return cdf


def semicircle_density(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) < 2, np.sqrt(np.clip(4 - x**2, 0, None)) / (2 * np.pi), 0.0)


def semicircle_cdf(x):
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    return 0.5 + x * np.sqrt(4 - x**2) / (4 * np.pi) + np.arcsin(x / 2) / np.pi


def ks_distance(values, cdf=semicircle_cdf):
    """Kolmogorov-Smirnov distance between a spectrum and a reference CDF."""
    return float(stats.kstest(np.asarray(values, dtype=float), cdf).statistic)


def low_energy_fraction(values, beta, tol=1e-12):
    """Fraction of levels within ``1/beta`` of the ground energy (1 when ``beta <= 0``)."""
    if hasattr(values, "values") and not isinstance(values, np.ndarray):
        values = values.values
    v = np.asarray(values, dtype=float)
    if beta <= 0:
        return 1.0
    return float(np.mean(v <= v.min() + 1.0 / beta + tol))


def semicircle_window(beta):
    """Semicircle mass within ``1/beta`` of the lower edge."""
    return float(semicircle_cdf(-2.0 + 1.0 / beta))
