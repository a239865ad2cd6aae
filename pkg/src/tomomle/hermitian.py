"""Complex Hermitian matrix helpers: Pauli bases, Stokes coefficients, state metrics.

All functions operate on plain numpy arrays.  A "density matrix" here is a
d x d complex array that is Hermitian, has unit trace, and is positive
semidefinite up to small numerical slack; `check_density_matrix` enforces
exactly that contract.
"""

import itertools

import numpy as np

from .errors import CapacityError, DimensionError, InvalidBasisError, NumericalError

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_TOL = 1e-10

MAX_QUBITS = 8

_SIGMA = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def is_hermitian(m, tol=HERMITICITY_TOL):
    m = np.asarray(m)
    return bool(np.all(np.abs(m - m.conj().T) <= tol))


def check_density_matrix(rho, tol_eig=EIGENVALUE_TOL):
    """Validate the density-matrix contract; returns rho as a complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {rho.shape}")
    if not is_hermitian(rho):
        raise NumericalError("matrix is not Hermitian within tolerance")
    tr = rho.trace()
    if abs(tr - 1.0) > 1e-8:
        raise NumericalError(f"trace {tr} is not 1")
    if eig_hermitian(rho)[0] < -tol_eig:
        raise NumericalError("matrix has a negative eigenvalue beyond tolerance")
    return rho


def pauli_basis(n_qubits, max_qubits=MAX_QUBITS):
    """Orthonormal Hermitian basis from normalized Pauli tensor products.

    Returns 4**n_qubits matrices of dimension 2**n_qubits, ordered
    lexicographically over Pauli indices (identity first), each scaled by
    1/sqrt(2**n_qubits) so that tr(G_i G_j) = delta_ij.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    if n_qubits > max_qubits:
        raise CapacityError(f"n_qubits={n_qubits} exceeds the maximum {max_qubits}")
    scale = 1.0 / np.sqrt(2.0**n_qubits)
    basis = []
    for idx in itertools.product(range(4), repeat=n_qubits):
        m = _SIGMA[idx[0]]
        for i in idx[1:]:
            m = np.kron(m, _SIGMA[i])
        basis.append(scale * m)
    return basis


def _check_orthonormal(basis, tol=1e-10):
    for i, gi in enumerate(basis):
        for j, gj in enumerate(basis):
            val = np.trace(gi @ gj)
            want = 1.0 if i == j else 0.0
            if abs(val - want) > tol:
                raise InvalidBasisError(f"tr(G_{i} G_{j}) = {val}, expected {want}")


def stokes_decompose(rho, basis, validate_basis=False):
    """Coefficients s[i] = tr(G_i rho) of rho in an orthonormal Hermitian basis."""
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    if len(basis) != d * d:
        raise DimensionError(f"basis has {len(basis)} elements, expected {d * d}")
    if validate_basis:
        _check_orthonormal(basis)
    coeffs = np.empty(d * d)
    for i, g in enumerate(basis):
        val = np.trace(g @ rho)
        if abs(val.imag) >= 1e-10:
            raise NumericalError(f"tr(G_{i} rho) has imaginary part {val.imag}")
        coeffs[i] = val.real
    return coeffs


def stokes_reconstruct(coeffs, basis):
    """Sum_i coeffs[i] * G_i.  Hermitian by construction; trace/positivity not enforced."""
    coeffs = np.asarray(coeffs, dtype=float)
    if len(coeffs) != len(basis):
        raise DimensionError(f"{len(coeffs)} coefficients for {len(basis)} basis matrices")
    d = basis[0].shape[0]
    out = np.zeros((d, d), dtype=complex)
    for c, g in zip(coeffs, basis):
        out += c * g
    return out


def purity(rho):
    """tr(rho^2), clamped to [0, 1 + 1e-10]."""
    rho = np.asarray(rho, dtype=complex)
    val = float(np.real(np.trace(rho @ rho)))
    return min(max(val, 0.0), 1.0 + 1e-10)


def eig_hermitian(h):
    """Real eigenvalues of a Hermitian matrix, sorted ascending."""
    try:
        return np.linalg.eigvalsh(np.asarray(h, dtype=complex))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc


def _sqrt_psd(h):
    w, v = np.linalg.eigh(np.asarray(h, dtype=complex))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho, sigma):
    """(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, clamped to [0, 1]."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise DimensionError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    sr = _sqrt_psd(rho)
    inner = _sqrt_psd(sr @ sigma @ sr)
    val = float(np.real(np.trace(inner))) ** 2
    return min(max(val, 0.0), 1.0)
