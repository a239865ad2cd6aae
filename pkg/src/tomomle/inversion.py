"""Linear tomography: solve the Stokes-coefficient linear system and diagnose
physicality of the result.

The system rows are sum_nu s_nu * tr(O_mu G_nu) = f_mu.  Overdetermined sets
(more settings than d^2) are solved in the least-squares sense.  No projection
back to the physical set is applied: an unphysical result is reported as such.
"""

from dataclasses import dataclass

import numpy as np

from .errors import IncompleteMeasurementsError, NumericalError
from .hermitian import eig_hermitian, stokes_reconstruct

RANK_RTOL = 1e-10


@dataclass
class InversionReport:
    matrix: np.ndarray
    stokes: np.ndarray
    is_physical: bool
    min_eigenvalue: float
    trace: float
    condition_estimate: float


def build_b_matrix(povm, basis):
    """Real matrix with entry (nu, mu) = tr(O_mu G_nu); shape d^2 x m."""
    n = len(basis)
    m = len(povm)
    b = np.empty((n, m))
    for mu, op in enumerate(povm):
        mat = op.matrix if hasattr(op, "matrix") else np.asarray(op, dtype=complex)
        for nu, g in enumerate(basis):
            val = np.trace(mat @ g)
            if abs(val.imag) >= 1e-10:
                raise NumericalError(
                    f"tr(O_{mu} G_{nu}) has imaginary part {val.imag}"
                )
            b[nu, mu] = val.real
    return b


def linear_invert(freqs, povm, basis):
    """Recover sum_nu s_nu G_nu from normalized frequencies.

    Raises IncompleteMeasurementsError when the measurement set does not
    determine all d^2 Stokes coefficients.
    """
    freqs = np.asarray(freqs, dtype=float)
    b = build_b_matrix(povm, basis)
    a = b.T  # rows indexed by settings
    sv = np.linalg.svd(a, compute_uv=False)
    rank = int(np.sum(sv > RANK_RTOL * sv[0]))
    n = len(basis)
    if rank < n:
        raise IncompleteMeasurementsError(
            f"measurement set determines only {rank} of {n} coefficients"
        )
    stokes, *_ = np.linalg.lstsq(a, freqs, rcond=None)
    matrix = stokes_reconstruct(stokes, basis)
    eigs = eig_hermitian(matrix)
    trace = float(np.real(matrix.trace()))
    is_physical = bool(eigs[0] >= -1e-10 and abs(trace - 1.0) <= 1e-8)
    return InversionReport(
        matrix=matrix,
        stokes=stokes,
        is_physical=is_physical,
        min_eigenvalue=float(eigs[0]),
        trace=trace,
        condition_estimate=float(sv[0] / sv[rank - 1]),
    )
