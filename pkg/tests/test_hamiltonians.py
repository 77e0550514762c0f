import numpy as np
import pytest
from functools import reduce
from hypothesis import given, strategies as st
from scipy.integrate import quad

from lindblad_qdrift.errors import DimensionError, InputError
from lindblad_qdrift.hamiltonians import (PauliString, add_pauli_string, hamiltonian_from_strings,
                                          ks_distance, low_energy_fraction,
                                          pauli_string_hamiltonian, semicircle_cdf,
                                          semicircle_density, semicircle_window, spectral_cdf,
                                          spin_chain_hamiltonian)

P = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
     "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}


def kron_oracle(letters):
    return reduce(np.kron, [P[c] for c in letters])


@given(letters=st.text(alphabet="IXYZ", min_size=1, max_size=5), sign=st.sampled_from([1, -1]),
       coeff=st.floats(-3, 3))
def test_string_action_matches_kron(letters, sign, coeff):
    ps = PauliString(letters, sign)
    ref = sign * kron_oracle(letters)
    assert np.array_equal(ps.dense(), ref)
    H = add_pauli_string(np.zeros((2**ps.n,) * 2, dtype=complex), ps, coeff)
    assert np.allclose(H, coeff * ref, atol=1e-14)


@pytest.mark.parametrize("bad", [("XQ", 1), ("XX", 2)])
def test_pauli_string_validation(bad):
    with pytest.raises(InputError):
        PauliString(*bad)


def test_single_string_hamiltonian():
    H = hamiltonian_from_strings(2, [PauliString("ZI")], [1.0])
    assert np.array_equal(H, np.diag([1, 1, -1, -1]).astype(complex))


def test_random_pauli_hamiltonian_m1(rng):
    H, strings = pauli_string_hamiltonian(3, 1, rng)
    assert np.allclose(H, strings[0].dense())


@pytest.mark.parametrize("n,m", [(2, 5), (4, 30), (6, 100)])
def test_random_pauli_hamiltonian_structure(n, m, rng):
    H, strings = pauli_string_hamiltonian(n, m, rng)
    assert np.allclose(H, H.conj().T)
    assert np.allclose(H, sum(ps.dense() for ps in strings) / np.sqrt(m))
    nonid = [ps for ps in strings if set(ps.letters) != {"I"}]
    ident_weight = sum(ps.sign for ps in strings if set(ps.letters) == {"I"})
    assert np.trace(H).real == pytest.approx(2**n * ident_weight / np.sqrt(m))


def test_distinct_strings_orthogonal(rng):
    strings = [PauliString(s) for s in ("XZ", "YY", "ZI", "IX")]
    for a in strings:
        for b in strings:
            ip = np.trace(a.dense().conj().T @ b.dense())
            assert ip == pytest.approx(4.0 if a == b else 0.0)
    coeffs = [1 / 2] * 4
    H = hamiltonian_from_strings(2, strings, coeffs)
    assert np.linalg.norm(H) ** 2 == pytest.approx(4 * 4 * 0.25)


@pytest.mark.parametrize("n", [0, 13])
def test_qubit_cap(n, rng):
    with pytest.raises(DimensionError):
        pauli_string_hamiltonian(n, 3, rng)


def test_tfim_single_site():
    H = spin_chain_hamiltonian("tfim", 1, J=1.0, g=0.7, h=-0.2)
    assert np.allclose(H, 0.7 * P["X"] - 0.2 * P["Z"])


def test_tfim_two_sites():
    H = spin_chain_hamiltonian("tfim", 2, J=1.0, g=0.6)
    ref = np.kron(P["Z"], P["Z"]) + 0.6 * (np.kron(P["X"], P["I"]) + np.kron(P["I"], P["X"]))
    assert np.allclose(H, ref)


def test_heisenberg_dimer_spectrum():
    H = spin_chain_hamiltonian("heisenberg", 2)
    assert np.allclose(np.linalg.eigvalsh(H), [-3, 1, 1, 1])


def test_unknown_chain():
    with pytest.raises(InputError):
        spin_chain_hamiltonian("ising-ladder", 2)


def test_spectral_cdf_examples():
    F = spectral_cdf([0.0, 1.0, 1.0, 3.0])
    assert F(-1) == 0.0
    assert F(0.0) == 0.25
    assert F(1.0) == 0.75
    assert F(10) == 1.0


@given(values=st.lists(st.floats(-5, 5), min_size=1, max_size=30),
       xs=st.lists(st.floats(-6, 6), min_size=2, max_size=10))
def test_spectral_cdf_monotone(values, xs):
    F = spectral_cdf(values)
    xs = np.sort(xs)
    out = F(xs)
    assert np.all(np.diff(out) >= 0)
    assert np.all((0 <= out) & (out <= 1))
    assert F(max(values)) == 1.0


def test_semicircle_values():
    assert semicircle_cdf(0.0) == pytest.approx(0.5)
    assert semicircle_cdf(-2.0) == 0.0 and semicircle_cdf(2.0) == 1.0
    ref = quad(lambda x: np.sqrt(4 - x * x) / (2 * np.pi), -2, 1)[0]
    assert semicircle_cdf(1.0) == pytest.approx(ref, abs=1e-12)
    assert semicircle_cdf(1.0) == pytest.approx(0.8045, abs=1e-4)
    assert quad(semicircle_density, -2, 2)[0] == pytest.approx(1.0)
    assert semicircle_window(1.0) == pytest.approx(semicircle_cdf(-1.0))


def test_ks_distance_of_large_random_pauli_spectrum():
    H, _ = pauli_string_hamiltonian(9, 800, np.random.default_rng(3))
    assert ks_distance(np.linalg.eigvalsh(H)) < 0.05
    assert ks_distance(np.full(10, 5.0)) == pytest.approx(1.0)


@pytest.mark.parametrize("values,beta,expected", [
    ([0.0, 0.4, 3.0], 2.0, 2 / 3),
    ([0.0, 0.4, 3.0], 0.0, 1.0),
    ([0.0, 0.4, 3.0], -1.0, 1.0),
    ([-1.0, -1.0, 0.5, 2.0], 1e6, 0.5),
])
def test_low_energy_fraction(values, beta, expected):
    assert low_energy_fraction(np.array(values), beta) == pytest.approx(expected)
