import numpy as np
import pytest
from hypothesis import given

from compton_witness import qcore
from compton_witness.errors import BadDim, NotHermitian

from conftest import random_density, random_pure, seeds


def test_pauli_algebra():
    sx, sy, sz = qcore.PAULI
    assert np.allclose(sx @ sy, 1j * sz)
    assert np.allclose(sy @ sz, 1j * sx)
    for s in qcore.PAULI:
        assert np.allclose(s @ s, qcore.I2)


def test_swap_exchanges_factors(rng):
    a, b = random_pure(rng, 2), random_pure(rng, 2)
    assert np.allclose(qcore.SWAP @ np.kron(a, b), np.kron(b, a))


def test_eigvals_descending_and_rejects_non_hermitian():
    ev = qcore.eigvals_hermitian(np.diag([0.1, 0.7, 0.2]).astype(complex))
    assert np.allclose(ev, [0.7, 0.2, 0.1])
    with pytest.raises(NotHermitian):
        qcore.eigvals_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(BadDim):
        qcore.eigvals_hermitian(np.zeros((2, 3)))


def test_check_density_rejections():
    with pytest.raises(ValueError):
        qcore.check_density(np.eye(4) / 2)
    with pytest.raises(ValueError):
        qcore.check_density(np.diag([1.5, -0.5]).astype(complex))
    with pytest.raises(BadDim):
        qcore.check_density(np.eye(3) / 3)
    assert not qcore.is_density(np.eye(4))


def test_partial_transpose_of_product_is_local_transpose(rng):
    a, b = random_density(rng, 2), random_density(rng, 2)
    assert np.allclose(qcore.partial_transpose(np.kron(a, b), 1), np.kron(a, b.T))
    assert np.allclose(qcore.partial_transpose(np.kron(a, b), 0), np.kron(a.T, b))


@given(seeds)
def test_density_invariants(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 4, rank=int(rng.integers(1, 5)))
    qcore.check_density(rho)
    # PT preserves trace and Hermiticity
    pt = qcore.partial_transpose(rho, 1)
    assert abs(np.trace(pt) - 1) < 1e-12
    assert qcore.hermiticity_error(pt) < 1e-12
    # reconstruct from the Bloch data
    r_a, r_b, T = qcore.bloch_data(rho)
    basis = [qcore.I2] + list(qcore.PAULI)
    coef = np.zeros((4, 4))
    coef[0, 0] = 1
    coef[1:, 0], coef[0, 1:], coef[1:, 1:] = r_a, r_b, T
    rebuilt = sum(coef[i, j] * np.kron(basis[i], basis[j]) for i in range(4) for j in range(4)) / 4
    assert np.allclose(rebuilt, rho, atol=1e-12)
    assert np.linalg.norm(r_a) <= 1 + 1e-12


@given(seeds)
def test_su2_is_unitary_with_unit_determinant(seed):
    a, b, c = np.random.default_rng(seed).uniform(0, 2 * np.pi, 3)
    u = qcore.su2(a, b, c)
    qcore.check_unitary(u)
    assert abs(np.linalg.det(u) - 1) < 1e-12


def test_same_up_to_phase(rng):
    psi = random_pure(rng, 4)
    assert qcore.same_up_to_phase(psi, np.exp(0.7j) * psi)
    assert not qcore.same_up_to_phase(psi, psi[::-1])
