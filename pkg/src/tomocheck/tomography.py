"""Local Pauli tomography: outcome probabilities, sampling and estimators.

Conventions
-----------
* Settings are the 3**n strings over ('X', 'Y', 'Z'), enumerated with
  ``itertools.product`` (qubit 0 varies slowest).
* Outcomes of one setting are bitstrings b_0 ... b_{n-1} read as a binary
  number with qubit 0 as the most significant bit; bit 0 is the +1
  eigenvalue of that qubit's observable.
* Random numbers come from numpy's PCG64 bit generator seeded with the
  user's integer seed; outcomes are drawn by inverse-CDF lookup of uniform
  variates, one setting after another in canonical order.
"""
from dataclasses import dataclass, field
from functools import lru_cache
import itertools

import numpy as np

from .errors import AXES, ErrorModelError, error_matrices
from .linalg import eig_hermitian, eigvalsh_batch, hermitian_part, project_simplex, hs_norm
from .states import num_qubits_of, pauli_coefficients, pauli_basis

PROB_TOL = 1e-12
TRACE_TOL = 1e-10


class IncompleteRecordError(ValueError):
    pass


class RecordFormatError(ValueError):
    pass


@lru_cache(maxsize=None)
def all_settings(n):
    return tuple(itertools.product(AXES, repeat=n))


def setting_index(setting):
    idx = 0
    for a in setting:
        idx = 3 * idx + AXES.index(a)
    return idx


def _outcome_signs():
    return np.array([1.0, -1.0])


def _qubit_response(m):
    """W[mu, s, b]: contribution of Pauli mu to outcome b of setting s on one qubit.

    p_s(b) = 2**-n sum_mu r[mu] prod_k W_k[mu_k, s_k, b_k].
    """
    w = np.zeros((4, 3, 2))
    w[0] = 1.0
    signs = _outcome_signs()
    for a in range(3):
        w[a + 1] = m[:, a][:, None] * signs[None, :]
    return w


@lru_cache(maxsize=None)
def _inversion_matrix(n):
    """Linear map from flattened per-setting frequencies to Pauli expectations.

    Per qubit, identity components average over the three settings and sum
    over outcomes; component a takes the signed outcome sum of setting a.
    The n-qubit map is the tensor product of the single-qubit one.
    Input layout: frequencies of shape (3**n, 2**n); output: (4**n,).
    """
    t = np.zeros((4, 3, 2))
    t[0] = 1.0 / 3.0
    signs = _outcome_signs()
    for a in range(3):
        t[a + 1, a] = signs
    out = np.array(1.0)
    for _ in range(n):
        out = np.multiply.outer(out, t)
    # axes are (mu_0, s_0, b_0, mu_1, s_1, b_1, ...); reorder to (mu..., s..., b...)
    order = [3 * k for k in range(n)] + [3 * k + 1 for k in range(n)] + [3 * k + 2 for k in range(n)]
    out = out.transpose(order).reshape(4 ** n, 3 ** n * 2 ** n)
    out.setflags(write=False)
    return out


def probabilities_from_coefficients(r, matrices):
    """All setting/outcome probabilities, shape (3**n, 2**n), from Pauli coefficients."""
    n = len(matrices)
    p = np.asarray(r, dtype=float)
    # contract each Pauli axis with that qubit's response, leaving (s, b) pairs
    for k, m in enumerate(matrices):
        w = _qubit_response(m)
        p = np.tensordot(p, w, axes=([0], [0]))  # consumes leading mu axis, appends (s, b)
    # axes now (s_0, b_0, s_1, b_1, ...)
    order = [2 * k for k in range(n)] + [2 * k + 1 for k in range(n)]
    return p.transpose(order).reshape(3 ** n, 2 ** n) / 2 ** n


def all_probabilities(rho, error=None):
    """Born-rule probabilities for every setting, shape (3**n, 2**n)."""
    rho = np.asarray(rho)
    n = num_qubits_of(rho)
    mats = error_matrices(error, n)
    p = probabilities_from_coefficients(pauli_coefficients(rho), mats)
    if np.min(p) < -PROB_TOL:
        raise ErrorModelError(
            f"error model produces negative probability {np.min(p):.3e}")
    p = np.clip(p, 0.0, None)
    return p / p.sum(axis=1, keepdims=True)


def born_probabilities(rho, setting, error=None):
    """Outcome probabilities for one setting, length 2**n."""
    rho = np.asarray(rho)
    n = num_qubits_of(rho)
    setting = tuple(setting)
    if len(setting) != n:
        raise ValueError(f"setting {setting} has {len(setting)} axes for {n} qubits")
    return all_probabilities(rho, error)[setting_index(setting)]


@dataclass
class TomographyRecord:
    """Outcome counts per Pauli setting, rows in canonical setting order."""
    num_qubits: int
    shots_per_setting: int
    counts: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        n = self.num_qubits
        if self.counts.shape != (3 ** n, 2 ** n):
            raise IncompleteRecordError(
                f"expected counts of shape {(3 ** n, 2 ** n)}, got {self.counts.shape}")
        if np.any(self.counts < 0):
            raise RecordFormatError("counts must be non-negative")
        sums = self.counts.sum(axis=1)
        if np.any(sums != self.shots_per_setting):
            raise RecordFormatError(
                f"every setting must hold {self.shots_per_setting} counts, got {sorted(set(sums.tolist()))}")

    @property
    def settings(self):
        return all_settings(self.num_qubits)

    @property
    def shots_total(self):
        return int(self.counts.sum())

    def frequencies(self):
        return self.counts / self.shots_per_setting

    def to_json(self):
        out = dict(self.metadata)
        out.update({
            "num_qubits": self.num_qubits,
            "shots_per_setting": int(self.shots_per_setting),
            "settings": [
                {"axes": list(s), "counts": c.tolist()}
                for s, c in zip(self.settings, self.counts)
            ],
        })
        return out

    @classmethod
    def from_json(cls, obj):
        try:
            n = int(obj["num_qubits"])
            shots = int(obj["shots_per_setting"])
            entries = obj["settings"]
        except (KeyError, TypeError, ValueError) as exc:
            raise RecordFormatError(f"malformed record: {exc}") from exc
        if n < 1 or shots < 1 or not isinstance(entries, list):
            raise RecordFormatError("num_qubits and shots_per_setting must be >= 1, settings a list")
        counts = np.full((3 ** n, 2 ** n), -1, dtype=np.int64)
        for e in entries:
            try:
                axes = tuple(e["axes"])
                c = np.asarray(e["counts"], dtype=np.int64)
            except (KeyError, TypeError, ValueError) as exc:
                raise RecordFormatError(f"malformed setting entry {e!r}") from exc
            if len(axes) != n or any(a not in AXES for a in axes):
                raise RecordFormatError(f"bad setting {axes}")
            i = setting_index(axes)
            if counts[i, 0] != -1:
                raise RecordFormatError(f"setting {axes} appears twice")
            if c.shape != (2 ** n,) or np.any(c < 0):
                raise RecordFormatError(f"setting {axes} needs {2 ** n} non-negative counts")
            counts[i] = c
        missing = [all_settings(n)[i] for i in np.flatnonzero(counts[:, 0] == -1)]
        if missing:
            raise IncompleteRecordError(f"missing settings: {missing}")
        meta = {k: v for k, v in obj.items()
                if k not in ("num_qubits", "shots_per_setting", "settings")}
        return cls(n, shots, counts, meta)


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def draw_outcomes(probs, shots, rng):
    """Inverse-CDF draws: outcome indices for `shots` events with distribution `probs`."""
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    out = np.searchsorted(cdf, rng.random(shots), side="right")
    return np.minimum(out, len(probs) - 1)


def sample_record(rho, shots_per_setting, error=None, seed=0):
    """Simulate a tomography run with multinomial counts per setting."""
    if shots_per_setting < 1:
        raise ValueError("shots_per_setting must be >= 1")
    rho = np.asarray(rho)
    n = num_qubits_of(rho)
    probs = all_probabilities(rho, error)
    rng = make_rng(seed)
    counts = np.array([
        np.bincount(draw_outcomes(p, shots_per_setting, rng), minlength=2 ** n)
        for p in probs
    ])
    return TomographyRecord(n, shots_per_setting, counts, {"seed": seed})


def record_from_probabilities(probs, shots_per_setting):
    """Record whose counts are the rounded expected counts (noiseless up to rounding)."""
    probs = np.asarray(probs)
    n = int(round(np.log2(probs.shape[1])))
    counts = np.floor(probs * shots_per_setting + 0.5).astype(np.int64)
    # fix rounding so each row sums to the shot count
    for row, p in zip(counts, probs):
        diff = shots_per_setting - row.sum()
        row[np.argmax(p)] += diff
    return TomographyRecord(n, shots_per_setting, counts)


def expectations_from_frequencies(freqs):
    """Empirical Pauli expectations, shape (..., 4**n), from (..., 3**n, 2**n) frequencies."""
    freqs = np.asarray(freqs, dtype=float)
    d = freqs.shape[-1]
    n = int(round(np.log2(d)))
    if freqs.shape[-2] != 3 ** n or 2 ** n != d:
        raise IncompleteRecordError(f"frequencies of shape {freqs.shape} do not cover 3**n settings")
    flat = freqs.reshape(freqs.shape[:-2] + (3 ** n * 2 ** n,))
    return flat @ _inversion_matrix(n).T


def least_squares_from_frequencies(freqs):
    """Linear-inversion estimate(s) from per-setting frequencies (batch over leading axes)."""
    e = expectations_from_frequencies(freqs)
    n = int(round(np.log(e.shape[-1]) / np.log(4)))
    return np.einsum("...k,kij->...ij", e, pauli_basis(n)) / 2 ** n


def least_squares(record):
    """Least-squares (linear inversion) estimate: unit trace, Hermitian, maybe not PSD."""
    if not isinstance(record, TomographyRecord):
        raise TypeError("least_squares expects a TomographyRecord")
    return least_squares_from_frequencies(record.frequencies())


def project_physical(rho_ls):
    """Closest density matrix in Hilbert-Schmidt norm.

    The HS distance is unitarily invariant and the nearest PSD unit-trace
    matrix shares the input's eigenbasis, so the problem reduces to a
    Euclidean projection of the spectrum onto the probability simplex.
    """
    rho_ls = hermitian_part(rho_ls)
    tr = np.trace(rho_ls).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"estimate has trace {tr:.12g}, expected 1")
    w, v = eig_hermitian(rho_ls)
    if w[-1] >= 0:
        return rho_ls
    p = project_simplex(w)
    out = (v * p) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def distance(a, b):
    """Hilbert-Schmidt distance ||a - b||_2."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return hs_norm(a - b)


def distances_from_frequencies(freqs):
    """Batch D = ||rho_LS - rho_hat|| for a stack of frequency tables.

    Only the spectrum is needed: D is the Euclidean distance between the
    eigenvalues of rho_LS and their simplex projection.
    """
    rho = least_squares_from_frequencies(freqs)
    w = eigvalsh_batch(rho)
    return np.linalg.norm(w - project_simplex(w), axis=-1)


@dataclass
class EstimatePair:
    rho_ls: np.ndarray
    rho_phys: np.ndarray
    distance: float


def estimate(record):
    rho_ls = least_squares(record)
    rho_phys = project_physical(rho_ls)
    return EstimatePair(rho_ls, rho_phys, distance(rho_ls, rho_phys))


def erroneous_estimate(rho, error=None):
    """Least-squares estimate in the limit of infinite statistics under `error`."""
    return least_squares_from_frequencies(all_probabilities(rho, error))
