"""Systematic measurement-error models for local Pauli measurements.

Every per-qubit error reduces to a 3x3 real matrix whose row ``k`` is the
Bloch vector of the observable actually measured when setting ``k`` (X, Y,
Z) was intended. Rows have unit norm, so each observable has eigenvalues
+-1. Angles are radians.
"""
from dataclasses import dataclass, field
import numpy as np

from .states import PAULIS, X, Y, Z, BlochMatrix

AXES = ("X", "Y", "Z")
AXIS_INDEX = {a: i for i, a in enumerate(AXES)}

# (psi, chi): quarter-wave and half-wave plate angles per Pauli setting
SETTING_ANGLES = {
    "X": (0.0, np.pi / 8),
    "Y": (np.pi / 4, 0.0),
    "Z": (0.0, 0.0),
}

ROW_NORM_SLACK = 0.10
ROW_NORM_TOL = 1e-10


class ErrorModelError(ValueError):
    pass


@dataclass(frozen=True)
class MisalignmentMatrix:
    """Rows map each ideal Pauli axis to the implemented one.

    Rows within 10 % of unit norm are rescaled on construction; anything
    further off is rejected.
    """
    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (3, 3):
            raise ErrorModelError(f"misalignment matrix must be 3x3, got {m.shape}")
        norms = np.linalg.norm(m, axis=1)
        bad = np.abs(norms - 1.0) > ROW_NORM_SLACK
        if np.any(bad):
            raise ErrorModelError(
                f"rows {np.flatnonzero(bad).tolist()} have norms {norms[bad].round(4).tolist()}; "
                "misalignment rows must have unit norm")
        m = m / norms[:, None]
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @classmethod
    def identity(cls):
        return cls(np.eye(3))


def _as_matrix(m):
    return m.m if isinstance(m, MisalignmentMatrix) else np.asarray(m, dtype=float)


def general_error(alpha, beta, gamma, delta):
    """Most general single-qubit misalignment of the Y and Z settings."""
    sa, ca = np.sin(alpha), np.cos(alpha)
    sg, cg = np.sin(gamma), np.cos(gamma)
    return MisalignmentMatrix(np.array([
        [1.0, 0.0, 0.0],
        [np.sin(beta) * sa, ca, np.cos(beta) * sa],
        [np.sin(delta) * sg, np.cos(delta) * sg, cg],
    ]))


def yz_swap():
    """X -> X, Y -> Z, Z -> Y (partial transposition up to a local unitary)."""
    return MisalignmentMatrix(np.array([[1.0, 0, 0], [0, 0, 1.0], [0, 1.0, 0]]))


def y_for_z():
    """Y is measured in place of Z."""
    return MisalignmentMatrix(np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 1.0, 0]]))


def observable_from_bloch(n):
    n = np.asarray(n, dtype=float)
    return n[0] * X + n[1] * Y + n[2] * Z


def bloch_of_observable(o):
    o = np.asarray(o)
    return np.real([np.trace(o @ p) / 2 for p in PAULIS[1:]])


def misaligned_observable(m, axis):
    """n . sigma for the row of `m` belonging to `axis` ('X', 'Y', 'Z' or 0-2)."""
    k = AXIS_INDEX[axis] if isinstance(axis, str) else int(axis)
    row = _as_matrix(m)[k]
    if abs(np.linalg.norm(row) - 1.0) > ROW_NORM_TOL:
        raise ErrorModelError(f"row {k} has norm {np.linalg.norm(row):.6g}, expected 1")
    return observable_from_bloch(row)


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def waveplate_unitary(kind, fast_axis="V", theta=0.0):
    """Jones matrix of a wave plate whose fast axis is rotated by `theta`."""
    kind = kind.upper()
    fast_axis = fast_axis.upper()
    if kind == "QWP":
        if fast_axis == "V":
            u = np.exp(1j * np.pi / 4) * np.diag([1, -1j])
        elif fast_axis == "H":
            u = np.exp(-1j * np.pi / 4) * np.diag([1, 1j])
        else:
            raise ValueError(f"fast axis must be 'V' or 'H', got {fast_axis!r}")
    elif kind == "HWP":
        if fast_axis not in ("V", "H"):
            raise ValueError(f"fast axis must be 'V' or 'H', got {fast_axis!r}")
        phase = 1j if fast_axis == "V" else -1j
        u = phase * np.diag([1, -1]).astype(complex)
    else:
        raise ValueError(f"unknown wave plate {kind!r}")
    return rotation(theta) @ u @ rotation(-theta)


# Per-qubit error entries. Each knows the 3x3 matrix of measured Bloch axes.

@dataclass(frozen=True)
class Identity:
    def matrix(self):
        return np.eye(3)


@dataclass(frozen=True)
class Misalignment:
    m: MisalignmentMatrix

    def matrix(self):
        return np.array(self.m.m)


@dataclass(frozen=True)
class WavePlateOffset:
    """Constant offset `delta` (rad) on the quarter-wave plate angle.

    `settings` restricts the offset to some settings; by default it hits all.
    """
    delta: float
    settings: tuple = AXES

    def matrix(self):
        rows = []
        for axis in AXES:
            psi, chi = SETTING_ANGLES[axis]
            if axis in self.settings:
                psi += self.delta
            rows.append(bloch_of_observable(setting_observable(psi, chi)))
        return np.array(rows)


@dataclass(frozen=True)
class WavePlateSwap:
    """Quarter- and half-wave plate exchanged between their mounts."""

    def matrix(self):
        return _scenario_matrix(self)


@dataclass(frozen=True)
class FastAxisFlip:
    """Quarter-wave plate mounted with its fast axis horizontal instead of vertical."""

    def matrix(self):
        return _scenario_matrix(self)


def _scenario_matrix(scenario):
    return np.array([
        bloch_of_observable(setting_observable(*SETTING_ANGLES[axis], scenario=scenario))
        for axis in AXES
    ])


def setting_observable(psi, chi, scenario=None):
    """Observable measured by a QWP at `psi` and a HWP at `chi` in front of the PBS.

    The photon passes the HWP, then the QWP, and the beam splitter measures
    Z, so the effective observable is U^dagger Z U with U = Q H.
    `scenario` may be None/Identity, a WavePlateOffset (added to psi),
    WavePlateSwap or FastAxisFlip.
    """
    qwp_axis = "V"
    swapped = False
    if isinstance(scenario, WavePlateOffset):
        psi = psi + scenario.delta
    elif isinstance(scenario, FastAxisFlip):
        qwp_axis = "H"
    elif isinstance(scenario, WavePlateSwap):
        swapped = True
    elif scenario is not None and not isinstance(scenario, Identity):
        raise ErrorModelError(f"{type(scenario).__name__} is not a wave-plate scenario")
    if swapped:
        # each mount keeps its angle, the plates trade places
        u = waveplate_unitary("HWP", "V", psi) @ waveplate_unitary("QWP", qwp_axis, chi)
    else:
        u = waveplate_unitary("QWP", qwp_axis, psi) @ waveplate_unitary("HWP", "V", chi)
    o = u.conj().T @ Z @ u
    return 0.5 * (o + o.conj().T)


@dataclass(frozen=True)
class MeasurementError:
    """One error entry per qubit."""
    entries: tuple = field(default_factory=tuple)

    @classmethod
    def none(cls, num_qubits):
        return cls(tuple(Identity() for _ in range(num_qubits)))

    @classmethod
    def on_qubit(cls, entry, qubit=0, num_qubits=2):
        if isinstance(entry, MisalignmentMatrix):
            entry = Misalignment(entry)
        entries = [Identity() for _ in range(num_qubits)]
        entries[qubit] = entry
        return cls(tuple(entries))

    @property
    def num_qubits(self):
        return len(self.entries)

    def matrices(self):
        """Per-qubit 3x3 axis matrices."""
        return [e.matrix() for e in self.entries]


def error_matrices(error, num_qubits):
    """Per-qubit axis matrices for `error` (None means no error)."""
    if error is None:
        return [np.eye(3) for _ in range(num_qubits)]
    if error.num_qubits != num_qubits:
        raise ErrorModelError(
            f"error model covers {error.num_qubits} qubits, state has {num_qubits}")
    return error.matrices()


def extended(m):
    """4x4 map on Pauli coefficients: identity component untouched, axes mixed by m."""
    out = np.eye(4)
    out[1:, 1:] = m
    return out


def transform_coefficients(r, matrices):
    """Apply per-qubit axis matrices to an n-qubit Pauli coefficient tensor."""
    r = np.asarray(r, dtype=float)
    n = len(matrices)
    for k, m in enumerate(matrices):
        r = np.moveaxis(np.tensordot(extended(m), r, axes=([1], [r.ndim - n + k])), 0,
                        r.ndim - n + k)
    return r


def transform_bloch(error, b):
    """Erroneous Bloch data: u -> M1 u, v -> M2 v, R -> M1 R M2^T.

    For a single-qubit Bloch vector `b`, `error` may be a MeasurementError
    with one entry or a bare 3x3 matrix.
    """
    if isinstance(b, BlochMatrix):
        m1, m2 = error_matrices(error, 2)
        return BlochMatrix(m1 @ b.u, m2 @ b.v, m1 @ b.R @ m2.T)
    u = np.asarray(b, dtype=float)
    if isinstance(error, MeasurementError):
        (m,) = error_matrices(error, 1)
    elif error is None:
        m = np.eye(3)
    else:
        m = _as_matrix(error) if not hasattr(error, "matrix") else error.matrix()
    return m @ u


_TYPES = {
    "identity": Identity,
    "misalignment": Misalignment,
    "qwp_offset": WavePlateOffset,
    "swap": WavePlateSwap,
    "fast_axis_flip": FastAxisFlip,
}


PRESETS = {"y_for_z": y_for_z, "yz_swap": yz_swap}


def entry_from_json(obj):
    """One per-qubit scenario from its JSON form. Angles are in degrees."""
    try:
        return _entry_from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ErrorModelError):
            raise
        raise ErrorModelError(f"malformed error scenario {obj!r}: {exc!r}") from exc


def _entry_from_json(obj):
    kind = obj.get("type")
    if kind == "identity":
        return Identity()
    if kind == "misalignment":
        if "preset" in obj:
            if obj["preset"] not in PRESETS:
                raise ErrorModelError(f"unknown preset {obj['preset']!r}; choose from {sorted(PRESETS)}")
            return Misalignment(PRESETS[obj["preset"]]())
        return Misalignment(MisalignmentMatrix(np.asarray(obj["rows"], dtype=float)))
    if kind == "general":
        a, b, g, d = (np.radians(float(obj[k])) for k in ("alpha_deg", "beta_deg", "gamma_deg", "delta_deg"))
        return Misalignment(general_error(a, b, g, d))
    if kind == "qwp_offset":
        settings = tuple(obj.get("settings", AXES))
        for s in settings:
            if s not in AXES:
                raise ErrorModelError(f"unknown setting {s!r}")
        return WavePlateOffset(np.radians(float(obj["delta_deg"])), settings)
    if kind == "swap":
        return WavePlateSwap()
    if kind == "fast_axis_flip":
        return FastAxisFlip()
    raise ErrorModelError(f"unknown error type {kind!r}")


def entry_to_json(entry):
    if isinstance(entry, Identity):
        return {"type": "identity"}
    if isinstance(entry, Misalignment):
        return {"type": "misalignment", "rows": np.asarray(entry.m.m).tolist()}
    if isinstance(entry, WavePlateOffset):
        out = {"type": "qwp_offset", "delta_deg": float(np.degrees(entry.delta))}
        if tuple(entry.settings) != AXES:
            out["settings"] = list(entry.settings)
        return out
    if isinstance(entry, WavePlateSwap):
        return {"type": "swap"}
    if isinstance(entry, FastAxisFlip):
        return {"type": "fast_axis_flip"}
    raise ErrorModelError(f"cannot serialize {entry!r}")


def error_from_json(obj, num_qubits):
    """Build a MeasurementError from one scenario object or a list of them.

    Each object carries an optional "qubit"; the default is its position in
    the list (0 for a lone object). Qubits without a scenario are error free.
    """
    items = obj if isinstance(obj, list) else [obj]
    entries = [Identity() for _ in range(num_qubits)]
    seen = set()
    for pos, item in enumerate(items):
        if not isinstance(item, dict):
            raise ErrorModelError(f"scenario entry must be a JSON object, got {item!r}")
        try:
            q = int(item.get("qubit", pos))
        except (TypeError, ValueError) as exc:
            raise ErrorModelError(f"bad qubit index {item.get('qubit')!r}") from exc
        if not 0 <= q < num_qubits:
            raise ErrorModelError(f"qubit {q} out of range for {num_qubits} qubits")
        if q in seen:
            raise ErrorModelError(f"more than one scenario for qubit {q}")
        seen.add(q)
        entries[q] = entry_from_json(item)
    return MeasurementError(tuple(entries))


def error_to_json(error):
    out = []
    for q, e in enumerate(error.entries):
        if isinstance(e, Identity):
            continue
        out.append({"qubit": q, **entry_to_json(e)})
    return out
