import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import sqrtm

from lindblad_qdrift import linalg
from lindblad_qdrift.davies import analytic_davies, block_gap, metropolis
from lindblad_qdrift.errors import NumericRangeError, PreconditionError
from lindblad_qdrift.linalg import PAULI
from lindblad_qdrift.lindblad import Lindbladian, Superoperator, exact_propagator, to_superoperator
from lindblad_qdrift.metrics import (GibbsContext, chi_square, detailed_balance_residual,
                                     kms_norm, spectral_gap, spectral_gap_report,
                                     trace_distance, variance_sigma, weighted_l2_norm)

from oracles import gibbs


def ctx_for(H, beta):
    return GibbsContext.from_hamiltonian(H, beta)


def random_ctx(n, beta, rng):
    return ctx_for(linalg.random_hermitian(n, rng), beta)


def depolarizing_lindbladian():
    # jumps |i><j| / sqrt(2) realise rho -> Tr(rho) I/2 - rho
    jumps = []
    for i in range(2):
        for j in range(2):
            E = np.zeros((2, 2), dtype=complex)
            E[i, j] = 1 / np.sqrt(2)
            jumps.append(E)
    return Lindbladian(np.zeros((2, 2)), jumps)


def test_gibbs_state_matches_expm(rng):
    H = linalg.random_hermitian(3, rng)
    ctx = ctx_for(H, 1.3)
    assert np.allclose(ctx.sigma, gibbs(H, 1.3), atol=1e-12)
    assert np.allclose(ctx.power(0.5) @ ctx.power(0.5), ctx.sigma, atol=1e-12)
    assert np.allclose(ctx.power(-0.25) @ ctx.power(0.25), np.eye(3), atol=1e-10)


def test_gibbs_context_range_guard():
    with pytest.raises(NumericRangeError):
        ctx_for(np.diag([0.0, 1.0]), 800.0)
    with pytest.raises(NumericRangeError):
        ctx_for(np.diag([0.0, 1.0]), -1.0)


def test_trace_distance_of_identical_states(rng):
    rho = linalg.random_density_matrix(3, rng)
    assert trace_distance(rho, rho) == 0


def test_trace_distance_orthogonal_states():
    assert trace_distance(np.diag([1.0, 0]), np.diag([0, 1.0])) == pytest.approx(1.0)


@pytest.mark.parametrize("p,q", [(0.1, 0.7), (0.5, 0.5), (0.9, 0.2)])
def test_trace_distance_diagonal(p, q):
    assert trace_distance(np.diag([p, 1 - p]), np.diag([q, 1 - q])) == pytest.approx(abs(p - q))


def test_kms_norm_of_identity(rng):
    assert kms_norm(np.eye(3), random_ctx(3, 0.8, rng)) == pytest.approx(1.0, abs=1e-12)


def test_kms_norm_infinite_temperature(rng):
    X = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    ctx = random_ctx(4, 0.0, rng)
    assert kms_norm(X, ctx) == pytest.approx(np.linalg.norm(X) / 2, rel=1e-12)


def test_kms_norm_inner_product_oracle(rng):
    H = linalg.random_hermitian(4, rng)
    X = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    s_half = sqrtm(gibbs(H, 0.9))
    ref = np.sqrt(np.trace(X.conj().T @ s_half @ X @ s_half).real)
    assert kms_norm(X, ctx_for(H, 0.9)) == pytest.approx(ref, rel=1e-12)


def test_weighted_norm_of_sigma(rng):
    ctx = random_ctx(3, 1.1, rng)
    assert weighted_l2_norm(ctx.sigma, ctx) == pytest.approx(1.0, abs=1e-12)
    assert weighted_l2_norm(np.zeros((3, 3)), ctx) == 0


def test_weighted_norm_infinite_temperature(rng):
    Y = rng.standard_normal((4, 4))
    assert weighted_l2_norm(Y, random_ctx(4, 0.0, rng)) == pytest.approx(2 * np.linalg.norm(Y))


def test_chi_square_of_sigma(rng):
    ctx = random_ctx(3, 2.0, rng)
    assert chi_square(ctx.sigma, ctx) == pytest.approx(0.0, abs=1e-12)


def test_chi_square_classical_reduction():
    lam = np.array([0.0, 0.7, 1.5])
    q = np.exp(-lam) / np.exp(-lam).sum()
    p = np.array([0.5, 0.3, 0.2])
    ref = np.sum((p - q) ** 2 / q)
    assert chi_square(np.diag(p), ctx_for(np.diag(lam), 1.0)) == pytest.approx(ref, rel=1e-12)


def test_chi_square_pure_qubit_against_mixed():
    assert chi_square(np.diag([1.0, 0.0]), ctx_for(np.zeros((2, 2)), 1.0)) == pytest.approx(1.0)


def test_variance_examples(rng):
    ctx = random_ctx(3, 0.6, rng)
    assert variance_sigma(np.eye(3), ctx) == pytest.approx(0.0, abs=1e-12)
    assert variance_sigma(-2.5 * np.eye(3), ctx) == pytest.approx(0.0, abs=1e-12)
    mixed = ctx_for(np.zeros((2, 2)), 1.0)
    assert variance_sigma(PAULI["Z"], mixed) == pytest.approx(1.0)


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 3.0))
def test_weighted_norm_consistency(seed, beta):
    rng = np.random.default_rng(seed)
    ctx = random_ctx(3, beta, rng)
    X = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert weighted_l2_norm(ctx.weighting(X), ctx) == pytest.approx(kms_norm(X, ctx), rel=1e-10)


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 3.0))
def test_chi_square_is_relative_density_variance(seed, beta):
    rng = np.random.default_rng(seed)
    ctx = random_ctx(3, beta, rng)
    rho = linalg.random_density_matrix(3, rng)
    rel = ctx.weighting(rho, -1.0)
    assert chi_square(rho, ctx) == pytest.approx(variance_sigma(rel, ctx), rel=1e-10, abs=1e-12)


def test_variance_nonnegative(rng):
    ctx = random_ctx(4, 1.0, rng)
    for _ in range(20):
        X = linalg.random_hermitian(4, rng)
        assert variance_sigma(X, ctx) >= -1e-12


def test_detailed_balance_of_davies(rng):
    H = linalg.random_hermitian(4, rng)
    ctx = ctx_for(H, 1.0)
    L = analytic_davies(ctx.eig, metropolis(1.0), 0.2)
    assert detailed_balance_residual(L, ctx) <= 1e-10


def test_detailed_balance_violated_by_coherent_term(rng):
    ctx = random_ctx(3, 1.0, rng)
    H_L = linalg.random_hermitian(3, rng)
    assert detailed_balance_residual(Lindbladian(H_L, []), ctx) > 0.1


def test_detailed_balance_of_zero_generator(rng):
    assert detailed_balance_residual(Lindbladian(np.zeros((2, 2)), []), random_ctx(2, 1, rng)) == 0


def test_gap_of_depolarizing_generator():
    ctx = ctx_for(np.zeros((2, 2)), 1.0)
    assert spectral_gap(depolarizing_lindbladian(), ctx) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("c", [0.3, 2.0, 7.5])
def test_gap_scales_linearly(c, rng):
    ctx = random_ctx(3, 1.0, rng)
    L = analytic_davies(ctx.eig, metropolis(1.0), 0.25)
    scaled = Superoperator(c * L.matrix, 3)
    assert spectral_gap(scaled, ctx) == pytest.approx(c * spectral_gap(L, ctx), rel=1e-10)


def test_gap_of_qubit_davies_matches_block_formula():
    ctx = ctx_for(PAULI["Z"], 1.0)
    L = analytic_davies(ctx.eig, metropolis(1.0), 0.5)
    classical = 0.5 * (1 + np.exp(-2.0))
    coherence = 0.25 * (3 + np.exp(-2.0))
    assert spectral_gap(L, ctx) == pytest.approx(min(classical, coherence), abs=1e-9)
    assert block_gap(ctx.eig, 1.0, metropolis(1.0), 0.5)[0] == pytest.approx(classical, abs=1e-12)


def test_gap_requires_detailed_balance(rng):
    ctx = random_ctx(2, 1.0, rng)
    with pytest.raises(PreconditionError):
        spectral_gap(Lindbladian(linalg.random_hermitian(2, rng), []), ctx)


def test_gap_report_flags_degenerate_kernel():
    # two decoupled fixed points: the jump never touches level 2
    H = np.diag([0.0, 1.0, 5.0])
    ctx = ctx_for(H, 0.0)
    V = np.zeros((3, 3), dtype=complex)
    V[0, 1] = V[1, 0] = 1.0
    rep = spectral_gap_report(Lindbladian(np.zeros((3, 3)), [V]), ctx)
    assert rep.degenerate and rep.gap == 0.0


def test_symmetrized_generator_spectrum_is_real(rng):
    ctx = random_ctx(4, 1.5, rng)
    L = analytic_davies(ctx.eig, metropolis(1.5), 0.2)
    rep = spectral_gap_report(L, ctx, check_imag=True)
    assert rep.max_imag <= 1e-8
    assert np.all(rep.eigenvalues >= -1e-9)


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 2.0])
def test_chi_square_decay_under_depolarizing(t, rng):
    L = depolarizing_lindbladian()
    ctx = ctx_for(np.zeros((2, 2)), 1.0)
    gap = spectral_gap(L, ctx)
    S = exact_propagator(L, t)
    for _ in range(20):
        rho = linalg.random_density_matrix(2, rng)
        bound = np.exp(-2 * gap * t) * chi_square(rho, ctx) * (1 + 1e-6)
        assert chi_square(S.apply(rho), ctx) <= bound + 1e-15
