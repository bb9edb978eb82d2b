"""Distance sweeps over an error parameter, exact or from simulated sub-experiments."""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import MeasurementError, WavePlateOffset
from .states import fidelity_pure, num_qubits_of, pauli_coefficients
from .stats import sample_events, subexperiment_counts, subexperiment_distances, summarize_histogram
from .tomography import (distance, distances_from_frequencies, erroneous_estimate, estimate,
                         probabilities_from_coefficients, project_physical)

VARIABLES = ("delta", "psi_z")


def offset_error(variable, angle, num_qubits, qubit=0):
    """QWP offset on every setting ('delta') or on the Z setting only ('psi_z')."""
    if variable == "delta":
        entry = WavePlateOffset(angle)
    elif variable == "psi_z":
        entry = WavePlateOffset(angle, settings=("Z",))
    else:
        raise ValueError(f"sweep variable must be one of {VARIABLES}, got {variable!r}")
    return MeasurementError.on_qubit(entry, qubit, num_qubits)


def analytic_distance(rho, error):
    """D in the limit of infinite statistics."""
    rho_ls = erroneous_estimate(rho, error)
    return distance(rho_ls, project_physical(rho_ls))


@dataclass
class SweepPoint:
    value: float          # radians
    d_mean: float
    d_std: float
    mode: str = "exact"


@lru_cache(maxsize=64)
def _offset_matrices(variable, angles):
    return tuple(offset_error(variable, a, 1).matrices()[0] for a in angles)


def sweep_analytic(rho, variable, angles, qubit=0):
    n = num_qubits_of(rho)
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} out of range for {n} qubits")
    angles = tuple(float(a) for a in angles)
    r = pauli_coefficients(rho)
    eye = [np.eye(3)] * n
    freqs = np.stack([
        probabilities_from_coefficients(r, eye[:qubit] + [m] + eye[qubit + 1:])
        for m in _offset_matrices(variable, angles)])
    d = distances_from_frequencies(freqs)
    return [SweepPoint(a, float(x), 0.0) for a, x in zip(angles, d)]


def simulate_subexperiments(rho, error, n_sub, events_per_sub, seed, bins=50):
    """Sample events, split them, and summarize the D histogram. Returns (summary, distances)."""
    n = num_qubits_of(rho)
    events = sample_events(rho, n_sub * events_per_sub, error, seed)
    counts = subexperiment_counts(events, n, n_sub, events_per_sub)
    d = subexperiment_distances(counts, events_per_sub)
    return summarize_histogram(d, bins), d


def sweep_experimental(rho, variable, angles, n_sub=1000, events_per_sub=400, seed=0, qubit=0, bins=50):
    """Monte-Carlo version of the sweep; point i uses the RNG stream (seed, i)."""
    n = num_qubits_of(rho)
    out = []
    for i, a in enumerate(angles):
        summary, _ = simulate_subexperiments(
            rho, offset_error(variable, a, n, qubit), n_sub, events_per_sub, [seed, i], bins)
        out.append(SweepPoint(a, summary.mean, summary.std, summary.mode))
    return out


def fidelity_compare(record, psi):
    """(F(rho_LS, psi), F(rho_hat, psi)) with F = <psi|rho|psi>."""
    est = estimate(record)
    return fidelity_pure(est.rho_ls, psi), fidelity_pure(est.rho_phys, psi)
