"""Small dense linear algebra helpers for 2-, 4- and 8-dimensional polarization spaces.

Matrices and state vectors are plain complex ``numpy`` arrays.  The
``check_*`` functions validate the invariants a density matrix, pure state
or unitary has to satisfy and raise on violation.
"""
from functools import reduce

import numpy as np

from .errors import BadDim, NotHermitian

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_FLOOR = -1e-10
UNITARY_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SX, SY, SZ)

# |ab> -> |ba> on two qubits
SWAP = np.array([[1, 0, 0, 0],
                 [0, 0, 1, 0],
                 [0, 1, 0, 0],
                 [0, 0, 0, 1]], dtype=complex)


def tensor(*mats):
    """Kronecker product of any number of matrices or vectors."""
    if not mats:
        raise ValueError("tensor() needs at least one operand")
    return reduce(np.kron, (np.asarray(m, dtype=complex) for m in mats))


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def projector(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def hermiticity_error(m):
    m = np.asarray(m)
    return float(np.max(np.abs(m - dagger(m))))


def eigvals_hermitian(m, tol=1e-10):
    """Real spectrum of a Hermitian matrix in descending order.

    Raises
    ------
    NotHermitian
        If ``max|m - m^dagger| > tol``.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise BadDim(f"expected a square matrix, got shape {m.shape}")
    if hermiticity_error(m) > tol:
        raise NotHermitian(f"matrix deviates from Hermitian by {hermiticity_error(m):.3g}")
    # symmetrize so that rounding noise above the diagonal does not leak in
    return np.linalg.eigvalsh(0.5 * (m + dagger(m)))[::-1]


def check_density(rho, herm_tol=HERMITIAN_TOL, trace_tol=TRACE_TOL, psd_floor=PSD_FLOOR):
    """Validate a density matrix and return it as a complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise BadDim(f"density matrix must be square, got shape {rho.shape}")
    if rho.shape[0] not in (2, 4, 8):
        raise BadDim(f"dimension must be 2, 4 or 8, got {rho.shape[0]}")
    if hermiticity_error(rho) > herm_tol:
        raise NotHermitian(f"density matrix deviates from Hermitian by {hermiticity_error(rho):.3g}")
    tr = np.trace(rho)
    if abs(tr - 1) > trace_tol:
        raise ValueError(f"density matrix has trace {tr.real:.15g}, expected 1")
    lam = eigvals_hermitian(rho, tol=herm_tol)
    if lam[-1] < psd_floor:
        raise ValueError(f"density matrix has negative eigenvalue {lam[-1]:.3g}")
    return rho


def is_density(rho, **kw):
    try:
        check_density(rho, **kw)
    except (ValueError, BadDim):
        return False
    return True


def check_pure(psi, tol=1e-12):
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise BadDim("pure state must be a vector")
    norm = np.vdot(psi, psi).real
    if abs(norm - 1) > tol:
        raise ValueError(f"state has squared norm {norm:.15g}, expected 1")
    return psi


def check_unitary(u, tol=UNITARY_TOL):
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise BadDim(f"unitary must be square, got shape {u.shape}")
    err = np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0])))
    if err > tol:
        raise ValueError(f"matrix is not unitary (max |U^dag U - 1| = {err:.3g})")
    return u


def partial_transpose(rho, subsystem):
    """Transpose one tensor factor of a two-qubit operator.

    ``subsystem`` is 0 for the first photon and 1 for the second.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise BadDim(f"partial_transpose needs a 4x4 operator, got {rho.shape}")
    if subsystem not in (0, 1):
        raise BadDim(f"subsystem must be 0 or 1, got {subsystem}")
    t = rho.reshape(2, 2, 2, 2)  # indices a, b, a', b'
    if subsystem == 0:
        t = t.transpose(2, 1, 0, 3)
    else:
        t = t.transpose(0, 3, 2, 1)
    return t.reshape(4, 4)


def bloch_data(rho):
    """Local Bloch vectors and correlation tensor of a two-qubit state.

    Returns ``(r_a, r_b, T)`` with ``r_a[i] = tr(rho sigma_i x 1)``,
    ``r_b[j] = tr(rho 1 x sigma_j)`` and ``T[i, j] = tr(rho sigma_i x sigma_j)``,
    Pauli order (x, y, z).
    """
    rho = np.asarray(rho, dtype=complex)
    r_a = np.array([np.trace(rho @ np.kron(s, I2)).real for s in PAULI])
    r_b = np.array([np.trace(rho @ np.kron(I2, s)).real for s in PAULI])
    T = np.array([[np.trace(rho @ np.kron(s, t)).real for t in PAULI] for s in PAULI])
    return r_a, r_b, T


def bloch_vector(rho):
    rho = np.asarray(rho, dtype=complex)
    return np.array([np.trace(rho @ s).real for s in PAULI])


def su2(alpha, beta, gamma):
    """Euler-angle unitary ``Rz(alpha) Ry(beta) Rz(gamma)``."""
    ca, sa = np.cos(alpha / 2), np.sin(alpha / 2)
    rz_a = np.array([[ca - 1j * sa, 0], [0, ca + 1j * sa]])
    cb, sb = np.cos(beta / 2), np.sin(beta / 2)
    ry = np.array([[cb, -sb], [sb, cb]], dtype=complex)
    cg, sg = np.cos(gamma / 2), np.sin(gamma / 2)
    rz_g = np.array([[cg - 1j * sg, 0], [0, cg + 1j * sg]])
    return rz_a @ ry @ rz_g


def align_phase(psi):
    """Divide out the phase of the first non-negligible amplitude."""
    psi = np.asarray(psi, dtype=complex)
    idx = np.flatnonzero(np.abs(psi) > 1e-12)
    if idx.size == 0:
        return psi
    a = psi[idx[0]]
    return psi * (abs(a) / a)


def same_up_to_phase(psi, phi, tol=1e-12):
    return bool(np.max(np.abs(align_phase(psi) - align_phase(phi))) < tol)
