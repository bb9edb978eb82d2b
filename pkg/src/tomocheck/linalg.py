"""Small dense linear algebra for qubit-sized matrices.

Everything here works on plain numpy arrays. Matrices are expected to be
tiny (2x2 up to 8x8), so the Hermitian eigensolver is a cyclic Jacobi
iteration rather than a LAPACK call.
"""
import numpy as np

HERMITIAN_TOL = 1e-12
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


class NotHermitianError(ValueError):
    """Raised when a matrix deviates from its adjoint beyond tolerance."""


class UnsupportedDimensionError(ValueError):
    """Raised when an operation is called with a dimension it does not handle."""


def hermitian_part(m, tol=HERMITIAN_TOL):
    """Return (m + m^dagger)/2 after checking that m is Hermitian within `tol`."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise UnsupportedDimensionError(f"expected a square matrix, got shape {m.shape}")
    asym = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if asym > tol:
        raise NotHermitianError(
            f"matrix is not Hermitian: max |m_ij - conj(m_ji)| = {asym:.3e} > {tol:.1e}")
    return 0.5 * (m + m.conj().T)


def _off_norm(a):
    off = a - np.diag(np.diag(a))
    return np.sqrt(np.sum(np.abs(off) ** 2))


def eig_hermitian(m, tol=HERMITIAN_TOL):
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Parameters
    ----------
    m : array_like, shape (d, d)
        Hermitian matrix. Inputs within `tol` of Hermitian are symmetrized
        first; anything further off raises :class:`NotHermitianError`.

    Returns
    -------
    eigenvalues : ndarray, shape (d,)
        Real eigenvalues in descending order.
    eigenvectors : ndarray, shape (d, d)
        Unitary matrix whose columns are the matching eigenvectors.
    """
    a = hermitian_part(m, tol).copy()
    d = a.shape[0]
    v = np.eye(d, dtype=complex)
    scale = max(np.max(np.abs(a)), 1.0) if d else 1.0

    for _ in range(JACOBI_MAX_SWEEPS):
        if _off_norm(a) <= JACOBI_TOL * scale:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                # phase-align the pivot, then a real Givens rotation zeroes it
                theta = 0.5 * np.arctan2(2.0 * mag, aqq - app)
                c, s = np.cos(theta), np.sin(theta)
                j = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ j
                a[idx, :] = j.conj().T @ a[idx, :]
                v[:, idx] = v[:, idx] @ j
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real

    w = np.real(np.diag(a))
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def eigvalsh_batch(ms):
    """Ascending eigenvalues of a stack of Hermitian matrices (LAPACK).

    Used on hot paths (optimizers, thousands of sub-experiments) where the
    Jacobi loop above would dominate the runtime.
    """
    return np.linalg.eigvalsh(np.asarray(ms))


def project_simplex(v):
    """Euclidean projection onto the probability simplex.

    Works on the last axis, so a stack of vectors can be projected at once.
    Uses the sort-and-threshold construction, which is exact (no iteration).
    """
    v = np.asarray(v, dtype=float)
    if v.shape[-1] == 0:
        raise ValueError("cannot project an empty vector onto the simplex")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    d = v.shape[-1]
    u = -np.sort(-v, axis=-1)
    css = np.cumsum(u, axis=-1) - 1.0
    k = np.arange(1, d + 1)
    cond = u - css / k > 0
    # last index where the condition holds; cond[..., 0] is always true
    rho = d - 1 - np.argmax(cond[..., ::-1], axis=-1)
    theta = np.take_along_axis(css, rho[..., None], axis=-1) / (rho[..., None] + 1)
    return np.maximum(v - theta, 0.0)


def tensor(*ms):
    """Kronecker product of the given matrices, left to right."""
    out = np.array([[1.0 + 0j]])
    for m in ms:
        out = np.kron(out, np.asarray(m))
    return out


def partial_transpose(m, subsystem):
    """Partial transpose of a two-qubit operator on qubit `subsystem` (0 or 1)."""
    m = np.asarray(m)
    if m.shape != (4, 4):
        raise UnsupportedDimensionError(
            f"partial transpose is implemented for 4x4 (two-qubit) matrices, got {m.shape}")
    if subsystem not in (0, 1):
        raise ValueError(f"subsystem must be 0 or 1, got {subsystem}")
    t = m.reshape(2, 2, 2, 2)  # (i1, i2, j1, j2)
    if subsystem == 0:
        t = t.transpose(2, 1, 0, 3)
    else:
        t = t.transpose(0, 3, 2, 1)
    return t.reshape(4, 4)


def singular_values_3x3(m):
    """Singular values of a real 3x3 matrix, descending."""
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise UnsupportedDimensionError(f"expected a 3x3 matrix, got {m.shape}")
    w, _ = eig_hermitian(m.T @ m)
    return np.sqrt(np.clip(w, 0.0, None))


def hs_norm(m):
    """Hilbert-Schmidt (Frobenius) norm."""
    return float(np.sqrt(np.sum(np.abs(np.asarray(m)) ** 2)))
