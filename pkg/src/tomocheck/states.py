"""Density matrices, Bloch data and the quantum-dot source model.

Pauli index convention used everywhere in the package::

    0 -> identity, 1 -> X, 2 -> Y, 3 -> Z

For n qubits, the Pauli coefficient tensor ``r`` has shape ``(4,) * n`` with
``r[mu_1, ..., mu_n] = Tr(rho  sigma_mu_1 x ... x sigma_mu_n)`` and
``rho = 2**-n * sum_mu r[mu] sigma_mu``. Qubit 0 is the leftmost tensor
factor (most significant bit of a basis index).
"""
from dataclasses import dataclass
from functools import lru_cache
import itertools

import numpy as np
from scipy.optimize import brentq

from .linalg import UnsupportedDimensionError, hermitian_part, eig_hermitian

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.array([I2, X, Y, Z])

STATE_TOL = 1e-10
# hbar in micro-eV * ps
HBAR_UEV_PS = 658.211956950907


class InvalidStateError(ValueError):
    pass


class InvalidModelParametersError(ValueError):
    pass


def num_qubits_of(rho):
    d = np.asarray(rho).shape[-1]
    n = int(round(np.log2(d)))
    if d < 2 or 2 ** n != d:
        raise UnsupportedDimensionError(f"dimension {d} is not a power of two")
    return n


@lru_cache(maxsize=None)
def pauli_basis(n):
    """All 4**n Pauli strings as an array of shape (4**n, 2**n, 2**n), lexicographic order."""
    ops = []
    for idx in itertools.product(range(4), repeat=n):
        op = np.array([[1.0 + 0j]])
        for a in idx:
            op = np.kron(op, PAULIS[a])
        ops.append(op)
    out = np.array(ops)
    out.setflags(write=False)
    return out


def pauli_coefficients(rho):
    """Pauli coefficient tensor r with r[mu] = Tr(rho sigma_mu), shape (4,)*n.

    Accepts a stack of matrices; leading axes are kept.
    """
    rho = np.asarray(rho)
    n = num_qubits_of(rho)
    basis = pauli_basis(n)
    # Tr(rho P) = sum_ij rho_ij P_ji
    r = np.einsum("...ij,kji->...k", rho, basis).real
    return r.reshape(rho.shape[:-2] + (4,) * n)


def state_from_pauli_coefficients(r, n=None):
    """Inverse of :func:`pauli_coefficients`; trailing n axes of `r` are Pauli indices."""
    r = np.asarray(r, dtype=float)
    if n is None:
        n = r.ndim
    lead = r.shape[: r.ndim - n]
    flat = r.reshape(lead + (4 ** n,))
    return np.einsum("...k,kij->...ij", flat, pauli_basis(n)) / 2 ** n


def validate_state(rho, tol=STATE_TOL):
    """Check trace and positivity; return the symmetrized matrix."""
    rho = hermitian_part(rho)
    num_qubits_of(rho)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise InvalidStateError(f"trace is {tr:.12g}, expected 1")
    w, _ = eig_hermitian(rho)
    if w[-1] < -tol:
        raise InvalidStateError(f"state has negative eigenvalue {w[-1]:.3e}")
    return rho


def ket(*amplitudes):
    v = np.asarray(amplitudes, dtype=complex)
    return v / np.linalg.norm(v)


def pure_state(psi):
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def bell_state():
    """|phi+><phi+| with |phi+> = (|00> + |11>)/sqrt(2)."""
    return pure_state([1, 0, 0, 1])


def maximally_mixed(n):
    d = 2 ** n
    return np.eye(d, dtype=complex) / d


def purity(rho):
    rho = np.asarray(rho)
    return float(np.real(np.einsum("ij,ji->", rho, rho)))


def apply_white_noise(rho, eps):
    """Mix with the maximally mixed state: (1 - eps) rho + eps I / 2**n."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"noise strength must lie in [0, 1], got {eps}")
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    return (1.0 - eps) * rho + eps * np.eye(d) / d


def noise_for_purity(rho, target):
    """White-noise strength that brings `rho` down to purity `target`.

    Purity along the noise path is (1-eps)^2 (p0 - 1/d) + 1/d.
    """
    d = np.asarray(rho).shape[0]
    p0 = purity(rho)
    if not 1.0 / d - 1e-12 <= target <= p0 + 1e-12:
        raise ValueError(f"purity {target} not reachable from {p0:.6g} by white noise")
    if p0 - 1.0 / d < 1e-15:
        return 0.0
    s = np.sqrt(max(target - 1.0 / d, 0.0) / (p0 - 1.0 / d))
    return float(np.clip(1.0 - s, 0.0, 1.0))


def fidelity_pure(rho, psi):
    """<psi|rho|psi>, real part (rho may be indefinite)."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return float(np.real(psi.conj() @ np.asarray(rho) @ psi))


def random_density_matrix(n, rng, rank=None):
    """Random n-qubit state from the induced (Ginibre) measure of given rank."""
    d = 2 ** n
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@dataclass(frozen=True)
class BlochMatrix:
    """Two-qubit Bloch data: local vectors u (qubit 0), v (qubit 1) and correlations R.

    Together with r00 = 1 these are the 16 coefficients r[mu, nu] of the state.
    """
    u: np.ndarray
    v: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float).reshape(3))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float).reshape(3))
        object.__setattr__(self, "R", np.asarray(self.R, dtype=float).reshape(3, 3))

    @property
    def matrix(self):
        r = np.empty((4, 4))
        r[0, 0] = 1.0
        r[1:, 0] = self.u
        r[0, 1:] = self.v
        r[1:, 1:] = self.R
        return r

    @classmethod
    def from_coefficients(cls, r):
        r = np.asarray(r, dtype=float)
        return cls(r[1:, 0], r[0, 1:], r[1:, 1:])

    @property
    def norm2(self):
        """||r||^2 = 1 + |u|^2 + |v|^2 + ||R||^2, which equals 4 Tr(rho^2)."""
        return 1.0 + self.u @ self.u + self.v @ self.v + np.sum(self.R * self.R)

    def to_vector(self):
        return np.concatenate([self.u, self.v, self.R.ravel()])

    @classmethod
    def from_vector(cls, x):
        x = np.asarray(x, dtype=float)
        return cls(x[:3], x[3:6], x[6:15].reshape(3, 3))


def bloch_from_state(rho):
    """Bloch vector u (one qubit) or :class:`BlochMatrix` (two qubits)."""
    rho = np.asarray(rho)
    n = num_qubits_of(rho)
    r = pauli_coefficients(rho)
    if n == 1:
        return r[1:]
    if n == 2:
        return BlochMatrix.from_coefficients(r)
    raise UnsupportedDimensionError(f"Bloch data is defined for 1 or 2 qubits, got {n}")


def state_from_bloch(b):
    """Inverse of :func:`bloch_from_state`. No positivity check is made."""
    if isinstance(b, BlochMatrix):
        return state_from_pauli_coefficients(b.matrix, 2)
    u = np.asarray(b, dtype=float)
    if u.shape != (3,):
        raise UnsupportedDimensionError(f"expected a Bloch vector of length 3, got {u.shape}")
    return state_from_pauli_coefficients(np.concatenate([[1.0], u]), 1)


@dataclass(frozen=True)
class QDotParams:
    """Parameters of the quantum-dot two-photon state.

    fss in micro-eV, tau1 in ps, tau_ss and tau_hv in micro-seconds. `kappa`
    is the weight of the correlated two-photon component; the default 0.945
    gives purity 0.92 at zero splitting.
    """
    fss: float = 0.0
    tau1: float = 150.0
    tau_ss: float = 1.0
    tau_hv: float = 1.0
    kappa: float = 0.945

    def __post_init__(self):
        if self.fss < 0:
            raise InvalidModelParametersError("fine structure splitting must be >= 0")
        if not (self.tau1 > 0 and self.tau_ss > 0 and self.tau_hv > 0):
            raise InvalidModelParametersError("all lifetimes must be positive")
        if not 0.0 <= self.kappa <= 1.0:
            raise InvalidModelParametersError("kappa must lie in [0, 1]")


def qdot_state(params=None):
    """Two-photon polarization state of the biexciton cascade (Hudson et al. model)."""
    p = params or QDotParams()
    t1_over_ss = p.tau1 / (p.tau_ss * 1e6)
    t1_over_hv = p.tau1 / (p.tau_hv * 1e6)
    g_prime = 1.0 / (1.0 + t1_over_ss)
    g = 1.0 / (1.0 + t1_over_ss + t1_over_hv)
    iota = g * p.fss * p.tau1 / HBAR_UEV_PS
    z = (1.0 + 1j * iota) / (1.0 + iota ** 2)
    kg = p.kappa * g_prime
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = rho[3, 3] = 1.0 + kg
    rho[1, 1] = rho[2, 2] = 1.0 - kg
    rho[0, 3] = 2.0 * p.kappa * g * np.conj(z)
    rho[3, 0] = 2.0 * p.kappa * g * z
    rho /= 4.0
    w, _ = eig_hermitian(rho)
    if w[-1] < -STATE_TOL:
        raise InvalidModelParametersError(
            f"parameters give a negative eigenvalue {w[-1]:.3e}")
    return rho


def qdot_fss_for_purity(target, **params):
    """Fine structure splitting (micro-eV) at which the qdot state has purity `target`.

    Purity decreases monotonically with the splitting. Targets above the
    zero-splitting purity return 0; targets below the large-splitting limit
    raise ValueError.
    """
    base = QDotParams(**{**params, "fss": 0.0})

    def f(fss):
        return purity(qdot_state(QDotParams(**{**params, "fss": fss}))) - target

    if f(0.0) <= 0:
        return 0.0
    hi = 10.0
    while f(hi) > 0:
        hi *= 2
        if hi > 1e6:
            raise ValueError(
                f"purity {target} is below what kappa={base.kappa} can reach")
    return float(brentq(f, 0.0, hi, xtol=1e-12))


def qdot_kappa_for_purity(target, **params):
    """kappa giving purity `target` at the other parameters held fixed.

    Purity is (1 + kappa^2 (g'^2 + 2 g^2 |z|^2)) / 4, so this is closed form.
    """
    p = QDotParams(**{**params, "kappa": 1.0})
    full = purity(qdot_state(p))
    if not 0.25 <= target <= full + 1e-12:
        raise InvalidModelParametersError(
            f"purity {target} needs kappa outside [0, 1] (reachable range 0.25 to {full:.6g})")
    return float(min(1.0, np.sqrt((4.0 * target - 1.0) / (4.0 * full - 1.0))))


def state_to_json(rho):
    rho = np.asarray(rho, dtype=complex)
    return {
        "num_qubits": num_qubits_of(rho),
        "re": rho.real.tolist(),
        "im": rho.imag.tolist(),
    }


def state_from_json(obj):
    rho = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    n = num_qubits_of(rho)
    if "num_qubits" in obj and int(obj["num_qubits"]) != n:
        raise ValueError(f"num_qubits={obj['num_qubits']} does not match a {rho.shape} matrix")
    return rho
