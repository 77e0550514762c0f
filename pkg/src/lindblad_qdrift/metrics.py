"""Distances, KMS-weighted norms, chi-square divergence and spectral gaps.

All weighted quantities are taken with respect to a full-rank Gibbs state
``sigma = exp(-beta H) / Z`` held in a :class:`GibbsContext`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, NumericRangeError, PreconditionError
from .linalg import HermitianEigen, dagger, herm_eig
from .lindblad import Superoperator, _as_superop, choi_matrix

EXP_RANGE = 700.0
MIN_SIGMA_EIGENVALUE = 1e-300


@dataclass(frozen=True)
class GibbsContext:
    """Thermal state of ``H`` at inverse temperature ``beta`` and its powers."""

    eig: HermitianEigen
    beta: float

    @classmethod
    def from_hamiltonian(cls, H, beta: float) -> "GibbsContext":
        return cls(herm_eig(H), float(beta))

    def __post_init__(self):
        if self.beta < 0:
            raise NumericRangeError("beta must be non-negative")
        spread = self.eig.values[-1] - self.eig.values[0]
        if self.beta * spread > EXP_RANGE:
            raise NumericRangeError(
                f"beta * spectral spread = {self.beta * spread:.1f} exceeds "
                f"{EXP_RANGE}; the Gibbs state is numerically singular. Lower beta "
                f"or rescale H.")

    @property
    def dim(self) -> int:
        return self.eig.dim

    @cached_property
    def populations(self) -> np.ndarray:
        w = np.exp(-self.beta * (self.eig.values - self.eig.values[0]))
        p = w / w.sum()
        if p.min() < MIN_SIGMA_EIGENVALUE:
            raise NumericRangeError("Gibbs state is not full rank at this beta")
        return p

    def power(self, x: float):
        """``sigma**x`` in the computational basis."""
        return self._power(float(x))

    def _power(self, x):
        cache = self.__dict__.setdefault("_pow_cache", {})
        if x not in cache:
            V = self.eig.vectors
            cache[x] = (V * self.populations**x) @ dagger(V)
        return cache[x]

    @property
    def sigma(self):
        return self.power(1.0)

    def weighting(self, X, x: float = 1.0):
        """``Gamma_sigma^x X = sigma^{x/2} X sigma^{x/2}``."""
        s = self.power(0.5 * x)
        return s @ X @ s

    def weighting_superop(self, x: float = 1.0):
        s = self.power(0.5 * x)
        return np.kron(s.T, s)


def _check_dims(X, ctx):
    if np.shape(X) != (ctx.dim, ctx.dim):
        raise DimensionError("operand does not match the Gibbs context dimension")


def trace_distance(rho1, rho2) -> float:
    """Half the trace norm of ``rho1 - rho2``."""
    d = np.asarray(rho1) - np.asarray(rho2)
    return 0.5 * float(np.sum(np.linalg.svd(d, compute_uv=False)))


def frobenius_distance(A, B) -> float:
    return float(np.linalg.norm(np.asarray(A) - np.asarray(B)))


def choi_distance(S1: Superoperator, S2: Superoperator) -> float:
    """Trace distance between normalized Choi states; lower-bounds the diamond distance / 2."""
    return trace_distance(choi_matrix(S1), choi_matrix(S2))


def kms_norm(X, ctx: GibbsContext) -> float:
    _check_dims(X, ctx)
    s = ctx.power(0.25)
    return float(np.linalg.norm(s @ X @ s))


def weighted_l2_norm(Y, ctx: GibbsContext) -> float:
    """``||sigma^{-1/4} Y sigma^{-1/4}||_F``, the KMS norm of the relative density."""
    _check_dims(Y, ctx)
    s = ctx.power(-0.25)
    return float(np.linalg.norm(s @ Y @ s))


def chi_square(rho, ctx: GibbsContext) -> float:
    return weighted_l2_norm(np.asarray(rho) - ctx.sigma, ctx) ** 2


def variance_sigma(X, ctx: GibbsContext) -> float:
    mean = np.trace(ctx.sigma @ X).real
    return kms_norm(X, ctx) ** 2 - mean**2


def detailed_balance_residual(L, ctx: GibbsContext) -> float:
    """Relative violation of ``L Gamma = Gamma L^dagger`` (0 for KMS detailed balance)."""
    S = _as_superop(L).matrix
    G = ctx.weighting_superop(1.0)
    left = S @ G
    denom = np.linalg.norm(left)
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(left - G @ dagger(S)) / denom)


class GapReport(NamedTuple):
    gap: float
    degenerate: bool
    max_imag: float
    eigenvalues: np.ndarray


def spectral_gap_report(L, ctx: GibbsContext, db_tol: float = 1e-6,
                        zero_tol: float = 1e-9, check_imag: bool = False) -> GapReport:
    """Spectrum of ``-L`` in the KMS geometry.

    Raises :class:`PreconditionError` if ``L`` is not detailed balanced;
    the gap is undefined otherwise.
    """
    gen = _as_superop(L)
    res = detailed_balance_residual(gen, ctx)
    if res > db_tol:
        raise PreconditionError(
            f"detailed-balance residual {res:.3e} exceeds {db_tol:.1e}; "
            f"spectral gap is undefined")
    S = ctx.weighting_superop(-0.5) @ gen.matrix @ ctx.weighting_superop(0.5)
    max_imag = float("nan")
    if check_imag:
        max_imag = float(np.max(np.abs(np.linalg.eigvals(S).imag)))
    evals = np.linalg.eigvalsh(-0.5 * (S + dagger(S)))
    zero_tol = zero_tol * max(1.0, float(np.abs(evals[-1])))
    if abs(evals[0]) > zero_tol:
        raise PreconditionError(
            f"smallest eigenvalue of -L is {evals[0]:.3e}, expected 0")
    degenerate = bool(evals[1] <= zero_tol)
    gap = 0.0 if degenerate else float(evals[1])
    return GapReport(gap, degenerate, max_imag, evals)


def spectral_gap(L, ctx: GibbsContext, db_tol: float = 1e-6) -> float:
    return spectral_gap_report(L, ctx, db_tol=db_tol).gap
