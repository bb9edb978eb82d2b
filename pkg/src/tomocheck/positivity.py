"""Positivity conditions on Bloch data.

A unit-trace Hermitian matrix is a state exactly when every zeta is <= 0.
For two qubits, zeta_1, zeta_2 and zeta_3 are -8, -16 and -256 times the
second, third and fourth elementary symmetric polynomials of the
eigenvalues. The epsilon conditions are zeta_2 and zeta_3 of the partial
transpose, so they add the PPT (for two qubits: separability) requirement.

The two-qubit functions broadcast over leading axes: u, v of shape (..., 3)
and R of shape (..., 3, 3).
"""
from dataclasses import dataclass

import numpy as np

from .linalg import eig_hermitian
from .states import BlochMatrix

VIOLATION_TOL = 1e-7


def zeta1_single(u):
    """Tr(rho^2) - 1 for the qubit with Bloch vector u."""
    u = np.asarray(u, dtype=float)
    return 0.5 * (1.0 + np.sum(u * u, axis=-1)) - 1.0


def det3(R):
    R = np.asarray(R)
    return (R[..., 0, 0] * (R[..., 1, 1] * R[..., 2, 2] - R[..., 1, 2] * R[..., 2, 1])
            - R[..., 0, 1] * (R[..., 1, 0] * R[..., 2, 2] - R[..., 1, 2] * R[..., 2, 0])
            + R[..., 0, 2] * (R[..., 1, 0] * R[..., 2, 1] - R[..., 1, 1] * R[..., 2, 0]))


def cofactor(R):
    """Cofactor matrix: C[i, j] = (-1)^(i+j) * minor_ij(R)."""
    R = np.asarray(R, dtype=float)
    c = np.empty_like(R)
    # cyclic index trick: C[i, j] = R[i+1, j+1] R[i+2, j+2] - R[i+1, j+2] R[i+2, j+1]
    for i in range(3):
        i1, i2 = (i + 1) % 3, (i + 2) % 3
        for j in range(3):
            j1, j2 = (j + 1) % 3, (j + 2) % 3
            c[..., i, j] = R[..., i1, j1] * R[..., i2, j2] - R[..., i1, j2] * R[..., i2, j1]
    return c


def _parts(u, v, R):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    R = np.asarray(R, dtype=float)
    uu = np.sum(u * u, axis=-1)
    vv = np.sum(v * v, axis=-1)
    n2 = 1.0 + uu + vv + np.sum(R * R, axis=(-2, -1))
    Rv = np.einsum("...ij,...j->...i", R, v)
    uR = np.einsum("...i,...ij->...j", u, R)
    uRv = np.sum(u * Rv, axis=-1)
    C = cofactor(R)
    uCv = np.einsum("...i,...ij,...j->...", u, C, v)
    quad = uu * vv + np.sum(uR * uR, axis=-1) + np.sum(Rv * Rv, axis=-1) + np.sum(C * C, axis=(-2, -1))
    return n2, uRv, det3(R), uCv, quad


def zetas_arrays(u, v, R):
    """(zeta_1, zeta_2, zeta_3) stacked on the last axis."""
    n2, uRv, d, uCv, quad = _parts(u, v, R)
    z1 = n2 - 4.0
    z2 = (n2 - 2.0) - 2.0 * (uRv - d)
    z3 = -8.0 * (uRv - d) - (n2 - 2.0) ** 2 - 8.0 * uCv + 4.0 * quad
    return np.stack([z1, z2, z3], axis=-1)


def epsilons_arrays(u, v, R):
    """(epsilon_2, epsilon_3) stacked on the last axis."""
    n2, uRv, d, uCv, quad = _parts(u, v, R)
    e2 = (n2 - 2.0) - 2.0 * (uRv + d)
    e3 = -8.0 * (uRv + d) - (n2 - 2.0) ** 2 + 4.0 * quad + 8.0 * uCv
    return np.stack([e2, e3], axis=-1)


def zetas_two_qubit(b):
    """zeta_1..3 of a two-qubit Bloch matrix."""
    return zetas_arrays(b.u, b.v, b.R)


def epsilons_ppt(b):
    """epsilon_2, epsilon_3 of a two-qubit Bloch matrix (zeta_2, zeta_3 of its partial transpose)."""
    return epsilons_arrays(b.u, b.v, b.R)


def min_eigenvalue(m):
    w, _ = eig_hermitian(m)
    return float(w[-1])


@dataclass
class ConstraintValues:
    zetas: np.ndarray
    min_eigenvalue: float

    @property
    def violated(self):
        return bool(np.any(self.zetas > VIOLATION_TOL))


def constraint_values(rho):
    """zetas (1 for a qubit, 3 for two qubits) and the smallest eigenvalue of `rho`."""
    from .states import bloch_from_state
    b = bloch_from_state(rho)
    if isinstance(b, BlochMatrix):
        z = zetas_two_qubit(b)
    else:
        z = np.atleast_1d(zeta1_single(b))
    return ConstraintValues(np.asarray(z), min_eigenvalue(rho))
