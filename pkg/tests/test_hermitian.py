import numpy as np
import pytest

from tomomle.errors import CapacityError, DimensionError, NumericalError
from tomomle.hermitian import (
    check_density_matrix,
    eig_hermitian,
    fidelity,
    is_hermitian,
    pauli_basis,
    purity,
    stokes_decompose,
    stokes_reconstruct,
)
from tomomle.parameterize import random_density


def test_pauli_basis_orthonormal():
    for n in (1, 2):
        basis = pauli_basis(n)
        assert len(basis) == 4**n
        for i, gi in enumerate(basis):
            assert is_hermitian(gi)
            for j, gj in enumerate(basis):
                want = 1.0 if i == j else 0.0
                assert abs(np.trace(gi @ gj) - want) < 1e-12


def test_pauli_basis_identity_first():
    basis = pauli_basis(1)
    assert np.allclose(basis[0], np.eye(2) / np.sqrt(2))


def test_pauli_basis_qubit_cap():
    with pytest.raises(CapacityError):
        pauli_basis(9)
    with pytest.raises(ValueError):
        pauli_basis(0)


def test_stokes_roundtrip(rng):
    for d in (2, 4):
        basis = pauli_basis(int(np.log2(d)))
        rho = random_density(rng, d)
        coeffs = stokes_decompose(rho, basis, validate_basis=True)
        back = stokes_reconstruct(coeffs, basis)
        assert np.max(np.abs(back - rho)) < 1e-12


def test_stokes_dimension_mismatch(rng):
    basis = pauli_basis(1)
    with pytest.raises(DimensionError):
        stokes_decompose(np.eye(4) / 4, basis)
    with pytest.raises(DimensionError):
        stokes_reconstruct(np.ones(3), basis)


def test_check_density_matrix_rejections():
    with pytest.raises(DimensionError):
        check_density_matrix(np.ones((2, 3)))
    with pytest.raises(NumericalError):
        check_density_matrix(np.array([[0.5, 1.0], [0.0, 0.5]]))
    with pytest.raises(NumericalError):
        check_density_matrix(np.eye(2))  # trace 2
    with pytest.raises(NumericalError):
        check_density_matrix(np.diag([1.5, -0.5]).astype(complex))


def test_purity_range(rng):
    assert purity(np.eye(2) / 2) == pytest.approx(0.5)
    v = np.array([1, 0], dtype=complex)
    assert purity(np.outer(v, v)) == pytest.approx(1.0)
    for _ in range(20):
        rho = random_density(rng, 4)
        assert 0.25 - 1e-12 <= purity(rho) <= 1.0 + 1e-10


def test_eig_hermitian_sorted(rng):
    rho = random_density(rng, 4)
    w = eig_hermitian(rho)
    assert np.all(np.diff(w) >= 0)
    assert w.sum() == pytest.approx(1.0)


def test_fidelity_properties(rng):
    rho = random_density(rng, 2)
    sigma = random_density(rng, 2)
    assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-10)
    f = fidelity(rho, sigma)
    assert 0.0 <= f <= 1.0
    assert f == pytest.approx(fidelity(sigma, rho), abs=1e-10)
    with pytest.raises(DimensionError):
        fidelity(np.eye(2) / 2, np.eye(4) / 4)
