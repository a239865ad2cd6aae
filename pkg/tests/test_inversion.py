import numpy as np
import pytest

from tomomle.errors import IncompleteMeasurementsError
from tomomle.hermitian import pauli_basis
from tomomle.inversion import build_b_matrix, linear_invert
from tomomle.measurement import (
    born_probability,
    normalize,
    polarization_projectors,
    simulate_counts,
    tensor_povm,
)
from tomomle.parameterize import random_density


def test_b_matrix_shape_and_entries():
    pol = polarization_projectors()
    basis = pauli_basis(1)
    b = build_b_matrix(pol, basis)
    assert b.shape == (4, 4)
    # entry (nu, mu) = tr(O_mu G_nu)
    assert b[0, 0] == pytest.approx(np.real(np.trace(pol[0].matrix @ basis[0])))
    assert b[3, 1] == pytest.approx(np.real(np.trace(pol[1].matrix @ basis[3])))


def test_exact_probabilities_roundtrip(rng):
    for d, n in ((2, 1), (4, 2)):
        pol = polarization_projectors()
        povm = pol if d == 2 else tensor_povm([pol, pol])
        basis = pauli_basis(n)
        rho = random_density(rng, d)
        freqs = np.array([born_probability(op, rho) for op in povm])
        report = linear_invert(freqs, povm, basis)
        assert np.max(np.abs(report.matrix - rho)) < 1e-12
        assert report.is_physical
        assert abs(report.trace - 1.0) < 1e-12
        assert report.condition_estimate >= 1.0


def test_rank_deficient_raises():
    pol = polarization_projectors()[:3]  # H, V, D only: no sigma_y information
    basis = pauli_basis(1)
    with pytest.raises(IncompleteMeasurementsError):
        linear_invert(np.array([0.9, 0.1, 0.5]), pol, basis)


def test_unphysical_result_flagged():
    # frequencies outside the Bloch ball force a negative eigenvalue
    pol = polarization_projectors()
    basis = pauli_basis(1)
    report = linear_invert(np.array([1.0, 0.0, 1.0, 1.0]), pol, basis)
    assert not report.is_physical
    assert report.min_eigenvalue < -1e-10


def test_noisy_counts_stay_close(rng):
    rho = random_density(rng, 2)
    pol = polarization_projectors()
    rec = simulate_counts(rho, pol, 10**6, noise="poisson", seed=1)
    report = linear_invert(normalize(rec), pol, pauli_basis(1))
    assert np.max(np.abs(report.matrix - rho)) < 5e-3
