import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddbound.errors import BranchCutError, DimensionError, NumericInputError
from ddbound.operators import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    bath_traceless_split,
    commutator,
    evolve,
    matrix_exp,
    matrix_log_principal,
    partial_trace_system,
    random_hermitian,
    random_unitary,
    spectral_norm,
    tensor_product,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_pauli_norms():
    assert spectral_norm(PAULI_X) == pytest.approx(1.0)
    assert spectral_norm(PAULI_X + PAULI_Z) == pytest.approx(np.sqrt(2))


def test_norm_matches_eigensolve(rng):
    h = random_hermitian(8, rng, 3.7)
    ev = np.linalg.eigvalsh(h)
    assert spectral_norm(h) == pytest.approx(np.abs(ev).max(), rel=1e-10)
    assert spectral_norm(h, hermitian=True) == pytest.approx(np.abs(ev).max(), rel=1e-10)


def test_non_finite_rejected():
    with pytest.raises(NumericInputError):
        spectral_norm(np.array([[np.nan, 0], [0, 1]]))
    with pytest.raises(DimensionError):
        spectral_norm(np.ones((2, 3)))


def test_exp_examples(rng):
    u = evolve(PAULI_Z, np.pi / 2)
    np.testing.assert_allclose(u, np.diag([np.exp(-0.5j * np.pi), np.exp(0.5j * np.pi)]), atol=1e-14)
    np.testing.assert_allclose(matrix_exp(np.zeros((3, 3)), 1.0, hermitian=False), np.eye(3))
    h = random_hermitian(6, rng)
    w, v = np.linalg.eigh(h)
    ref = (v * np.exp(-1.3j * w)) @ v.conj().T
    np.testing.assert_allclose(evolve(h, 1.3), ref, atol=1e-10)
    np.testing.assert_allclose(ref.conj().T @ ref, np.eye(6), atol=1e-10)


def test_log_examples():
    np.testing.assert_allclose(matrix_log_principal(np.eye(4)), 0, atol=1e-14)
    np.testing.assert_allclose(matrix_log_principal(evolve(PAULI_X, 0.3)), -0.3j * PAULI_X, atol=1e-12)
    with pytest.raises(BranchCutError):
        matrix_log_principal(evolve(PAULI_X, np.pi))
    assert np.allclose(matrix_log_principal(evolve(PAULI_X, np.pi), allow_branch=True).diagonal().imag.max() >= 0, True)


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(min_value=0.0, max_value=3.0))
def test_log_exp_round_trip(seed, scale):
    rng = np.random.default_rng(seed)
    h = random_hermitian(4, rng, scale)
    u = evolve(h, 1.0)
    log = matrix_log_principal(u)
    np.testing.assert_allclose(matrix_exp(log, hermitian=False), u, atol=1e-10)
    np.testing.assert_allclose(log, -1j * h, atol=1e-9)
    np.testing.assert_allclose(log + log.conj().T, 0, atol=1e-12)


def test_commutator_and_tensor():
    np.testing.assert_allclose(commutator(PAULI_X, PAULI_Y), 2j * PAULI_Z)
    np.testing.assert_allclose(commutator(PAULI_X, PAULI_X), 0)
    with pytest.raises(DimensionError):
        commutator(np.eye(2), np.eye(3))
    t = tensor_product(PAULI_Z, np.eye(2))
    assert t[0, 0] == 1 and t[2, 2] == -1


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_norm_inequalities(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    b = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    na, nb = spectral_norm(a), spectral_norm(b)
    assert spectral_norm(commutator(a, b)) <= 2 * na * nb * (1 + 1e-12)
    assert spectral_norm(a @ b) <= na * nb * (1 + 1e-12)
    u, v = random_unitary(6, rng), random_unitary(6, rng)
    assert spectral_norm(u @ a @ v) == pytest.approx(na, rel=1e-10)


def test_split_examples(rng):
    b0 = random_hermitian(3, rng)
    s = bath_traceless_split(np.kron(np.eye(2), b0), 2)
    np.testing.assert_allclose(s.traceless_part, 0, atol=1e-14)
    np.testing.assert_allclose(s.bath_operator, b0, atol=1e-14)
    s = bath_traceless_split(np.kron(PAULI_X, b0), 2)
    np.testing.assert_allclose(s.bath_part, 0, atol=1e-14)
    with pytest.raises(DimensionError):
        bath_traceless_split(np.eye(6), 4)


def test_split_lemma_many(rng):
    for _ in range(100):
        dim_s = int(rng.choice([2, 3]))
        o = random_hermitian(dim_s * 3, rng, rng.uniform(0.1, 5))
        s = bath_traceless_split(o, dim_s)  # asserts both inequalities
        np.testing.assert_allclose(s.bath_part + s.traceless_part, o, atol=1e-14)
        np.testing.assert_allclose(partial_trace_system(s.traceless_part, dim_s), 0, atol=1e-12)
        n = spectral_norm(o)
        assert spectral_norm(s.bath_part) <= n * (1 + 1e-10)
        assert spectral_norm(s.traceless_part) <= 2 * n * (1 + 1e-10)


def test_qubit_split_needs_real_bath_components(rng):
    paulis = [np.eye(2), PAULI_X, PAULI_Y, PAULI_Z]
    for _ in range(100):
        bs = []
        for _ in range(4):
            g = rng.normal(size=(3, 3))
            bs.append((g + g.T) * rng.uniform(0, 1))
        o = sum(np.kron(p, b) for p, b in zip(paulis, bs))
        s = bath_traceless_split(o, 2)
        assert spectral_norm(s.traceless_part) <= spectral_norm(o) * (1 + 1e-10)
    # complex bath components: the tighter qubit inequality is not guaranteed
    worst = max(
        spectral_norm(bath_traceless_split(h, 2).traceless_part) / spectral_norm(h)
        for h in (random_hermitian(6, rng) for _ in range(200))
    )
    assert 1.0 < worst <= 2.0
