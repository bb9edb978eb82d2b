"""Confidence bound for the distance test and the sub-experiment pipeline."""
import csv
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq

from .tomography import (TomographyRecord, all_probabilities, distances_from_frequencies,
                         draw_outcomes, estimate, make_rng)
from .states import num_qubits_of

DETECTED = "systematic-error-detected"
INCONCLUSIVE = "inconclusive"
ZERO_BIN_SWITCH = 0.20
CUMULATIVE_LEVEL = 0.682


class DataSizeError(ValueError):
    pass


def bernstein_delta(tau, n_qubits, shots_total):
    """Probability bound for D >= tau under purely statistical errors, clamped to [0, 1].

    `shots_total` counts measurements over all settings (3**n times the
    shots per setting). sigma = 5**(n/2).
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if shots_total < 1:
        raise ValueError("shots_total must be >= 1")
    s2 = 5.0 ** n_qubits
    expo = -shots_total * tau ** 2 / (2 * s2) * 3.0 / (3.0 + np.sqrt(2.0) * tau / np.sqrt(s2))
    return float(min(1.0, 8.0 * np.exp(expo)))


def tau_for_confidence(confidence, n_qubits, shots_total):
    """Smallest tau at which the bound reaches the requested confidence."""
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    target = 1.0 - confidence
    hi = 1.0
    while bernstein_delta(hi, n_qubits, shots_total) > target:
        hi *= 2
    return float(brentq(lambda t: bernstein_delta(t, n_qubits, shots_total) - target, 1e-12, hi, xtol=1e-14))


@dataclass
class DetectionReport:
    distance: float
    tau: float
    delta_sta: float
    confidence: float
    n_qubits: int
    shots_total: int
    verdict: str
    confidence_threshold: float = 0.9

    def to_json(self):
        return asdict(self)


def detect(record, tau, confidence_threshold=0.9):
    """Distance test: a systematic error is reported when D >= tau at enough confidence."""
    est = estimate(record)
    n = record.num_qubits
    shots = 3 ** n * record.shots_per_setting
    delta = bernstein_delta(tau, n, shots)
    conf = 1.0 - delta
    hit = est.distance >= tau and conf >= confidence_threshold
    return DetectionReport(float(est.distance), float(tau), delta, conf, n, shots,
                           DETECTED if hit else INCONCLUSIVE, float(confidence_threshold))


# -- events and sub-experiments ----------------------------------------------------

def sample_events(rho, events_per_setting, error=None, seed=0):
    """Simulated event list, shape (3**n * events_per_setting, 2): (setting_index, outcome_index).

    Settings are acquired one after the other in canonical order.
    """
    rho = np.asarray(rho)
    probs = all_probabilities(rho, error)
    rng = make_rng(seed)
    rows = []
    for s, p in enumerate(probs):
        out = draw_outcomes(p, events_per_setting, rng)
        rows.append(np.column_stack([np.full(events_per_setting, s), out]))
    return np.concatenate(rows).astype(np.int64)


def subexperiment_counts(events, num_qubits, n_sub, events_per_sub):
    """Counts of every sub-experiment, shape (n_sub, 3**n, 2**n).

    Per setting the event stream is cut into `events_per_sub` blocks of
    `n_sub` consecutive events; sub-experiment j gets event j of every block.
    """
    events = np.asarray(events, dtype=np.int64)
    ns, no = 3 ** num_qubits, 2 ** num_qubits
    if events.ndim != 2 or events.shape[1] != 2:
        raise ValueError("events must have two columns (setting_index, outcome_index)")
    if len(events) and (events[:, 0].min() < 0 or events[:, 0].max() >= ns
                        or events[:, 1].min() < 0 or events[:, 1].max() >= no):
        raise ValueError("event indices out of range for the qubit count")
    need = n_sub * events_per_sub
    counts = np.zeros((n_sub, ns, no), dtype=np.int64)
    for s in range(ns):
        outs = events[events[:, 0] == s, 1]
        if len(outs) < need:
            raise DataSizeError(
                f"setting {s} has {len(outs)} events, need {n_sub} x {events_per_sub} = {need}")
        blocks = outs[:need].reshape(events_per_sub, n_sub)   # row k = block k
        for o in range(no):
            counts[:, s, o] = np.sum(blocks == o, axis=0)
    return counts


def split_subexperiments(events, num_qubits, n_sub, events_per_sub):
    counts = subexperiment_counts(events, num_qubits, n_sub, events_per_sub)
    return [TomographyRecord(num_qubits, events_per_sub, c) for c in counts]


def subexperiment_distances(counts, events_per_sub):
    """D for every sub-experiment from a (n_sub, 3**n, 2**n) count stack."""
    return distances_from_frequencies(np.asarray(counts) / events_per_sub)


# -- histograms ------------------------------------------------------------------

@dataclass
class HistogramSummary:
    bin_edges: np.ndarray
    counts: np.ndarray
    mode: str
    mean: float
    std: float

    def to_json(self):
        return {"mode": self.mode, "mean": self.mean, "std": self.std,
                "bin_edges": np.asarray(self.bin_edges).tolist(),
                "counts": np.asarray(self.counts).tolist()}

    @classmethod
    def from_json(cls, obj):
        return cls(np.asarray(obj["bin_edges"]), np.asarray(obj["counts"]),
                   obj["mode"], float(obj["mean"]), float(obj["std"]))


def summarize_histogram(values, bins=50, mode=None):
    """Histogram over [0, max] plus a location/width summary.

    Gaussian mode uses the sample mean and standard deviation. When the
    first bin holds at least 20 % of the values the distribution is piled
    up at zero; then the interval [0, E] holding 68.2 % of the data is used,
    reporting E/2 as both centre and half-width. `mode` forces either
    "gaussian-fit" or "cumulative-682".
    """
    vals = np.asarray(values, dtype=float).ravel()
    if vals.size == 0:
        raise ValueError("no values to summarize")
    if vals.size < 2:
        raise ValueError("need at least two values")
    if np.any(vals < 0) or not np.all(np.isfinite(vals)):
        raise ValueError("values must be finite and non-negative")
    top = vals.max() if vals.max() > 0 else 1.0
    counts, edges = np.histogram(vals, bins=bins, range=(0.0, top))
    if mode is None:
        mode = "cumulative-682" if counts[0] / vals.size >= ZERO_BIN_SWITCH else "gaussian-fit"
    if mode == "gaussian-fit":
        mean, std = float(vals.mean()), float(vals.std(ddof=1))
    elif mode == "cumulative-682":
        frac = np.cumsum(counts) / vals.size
        k = int(np.searchsorted(frac, CUMULATIVE_LEVEL - 1e-12))
        upper = 0.0 if vals.max() == 0 else float(edges[k + 1])
        mean = std = 0.5 * upper
    else:
        raise ValueError(f"unknown histogram mode {mode!r}")
    return HistogramSummary(edges, counts, mode, mean, std)


# -- event files -----------------------------------------------------------------

def write_events_csv(path, events):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["setting_index", "outcome_index"])
        w.writerows(np.asarray(events).tolist())


def read_events_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["setting_index", "outcome_index"]:
        raise ValueError(f"{path}: expected header 'setting_index,outcome_index'")
    try:
        data = np.array([[int(a), int(b)] for a, b in rows[1:]], dtype=np.int64)
    except ValueError as exc:
        raise ValueError(f"{path}: malformed event row ({exc})") from exc
    return data.reshape(-1, 2)


def infer_num_qubits(events):
    """Smallest n whose 3**n settings and 2**n outcomes cover the indices seen."""
    events = np.asarray(events)
    n = 1
    while 3 ** n <= events[:, 0].max() or 2 ** n <= events[:, 1].max():
        n += 1
    return n
